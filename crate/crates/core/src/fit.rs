//! Least-squares line fits used by the divergence-rate diagnostics.

use crate::scalar::{count, Scalar};

#[derive(Debug, Clone, Copy)]
pub struct LinearFit<S> {
    pub slope: S,
    pub intercept: S,
    /// Coefficient of determination of the fit; 1 for an exact line.
    pub r_squared: S,
}

/// Ordinary least squares `y = intercept + slope * x`.
///
/// Returns `None` for fewer than two points or degenerate x values. An exactly
/// constant y is reported with slope 0 and r_squared 1.
pub fn linear_fit<S: Scalar>(xs: &[S], ys: &[S]) -> Option<LinearFit<S>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = count::<S>(xs.len());
    let mean_x = xs.iter().copied().sum::<S>() / n;
    let mean_y = ys.iter().copied().sum::<S>() / n;
    let mut sxx = S::zero();
    let mut sxy = S::zero();
    let mut syy = S::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if !(sxx > S::zero()) {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy > S::zero() {
        (sxy * sxy / (sxx * syy)).min(S::one())
    } else {
        S::one()
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
