//! One-dimensional quadrature building blocks: Gauss–Legendre rules and a
//! geometrically graded panel scheme for integrands with a sharp but
//! integrable peak at one endpoint.

use crate::scalar::{count, real, Scalar};

/// Gauss–Legendre nodes and weights on (-1, 1).
///
/// Nodes are the roots of the Legendre polynomial `P_order`, found by Newton
/// iteration from the Chebyshev-like initial guess; weights are
/// `2 / ((1 - x^2) P'_order(x)^2)`. Weights sum to 2 up to roundoff.
pub fn gauss_legendre<S: Scalar>(order: usize) -> (Vec<S>, Vec<S>) {
    assert!(order >= 1, "Gauss-Legendre order must be at least 1");
    let mut nodes = vec![S::zero(); order];
    let mut weights = vec![S::zero(); order];
    let n = count::<S>(order);
    let tol = S::epsilon() * real(4.0);

    for i in 0..order.div_ceil(2) {
        // Initial guess: cos(pi (i + 3/4) / (order + 1/2)).
        let guess = ((count::<S>(i) + real(0.75)) * S::PI() / (n + real(0.5))).cos();
        let mut x = guess;
        let mut dp = S::zero();
        for _ in 0..100 {
            // Evaluate P_order and P'_order by the three-term recurrence.
            let mut p0 = S::one();
            let mut p1 = x;
            for k in 2..=order {
                let kf = count::<S>(k);
                let p2 = ((real::<S>(2.0) * kf - S::one()) * x * p1 - (kf - S::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
            dp = n * (x * p1 - p0) / (x * x - S::one());
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= tol * x.abs().max(S::one()) {
                break;
            }
        }
        let w = real::<S>(2.0) / ((S::one() - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[order - 1 - i] = x;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = S::zero();
    }
    (nodes, weights)
}

/// Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate_panel<S: Scalar>(
    nodes: &[S],
    weights: &[S],
    a: S,
    b: S,
    mut f: impl FnMut(S) -> S,
) -> S {
    let half = (b - a) * real(0.5);
    let mid = (b + a) * real(0.5);
    let mut acc = S::zero();
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over `(0, upper]` when `f` has a peak of width `peak_scale`
/// at 0 but is bounded there. Panels are halved geometrically toward 0 until
/// they resolve the peak, then the innermost stub is integrated directly.
pub fn integrate_graded_to_zero<S: Scalar>(
    upper: S,
    peak_scale: S,
    order: usize,
    mut f: impl FnMut(S) -> S,
) -> S {
    let (nodes, weights) = gauss_legendre::<S>(order.max(4));
    let floor = (peak_scale * real(0.125)).max(upper * real(1e-18));
    let mut depth = 0usize;
    let mut edge = upper;
    while edge > floor && depth < 96 {
        edge *= real::<S>(0.5);
        depth += 1;
    }

    let mut acc = S::zero();
    let mut hi = upper;
    for _ in 0..depth {
        let lo = hi * real(0.5);
        acc += integrate_panel(&nodes, &weights, lo, hi, &mut f);
        hi = lo;
    }
    acc + integrate_panel(&nodes, &weights, S::zero(), hi, &mut f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_weights_sum_to_two() {
        for order in [2usize, 5, 16, 48] {
            let (_, w) = gauss_legendre::<f64>(order);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gl_exact_for_polynomials() {
        let (x, w) = gauss_legendre::<f64>(6);
        // degree 11 is integrated exactly by a 6-point rule
        let int: f64 = x
            .iter()
            .zip(&w)
            .map(|(&x, &w)| w * (x.powi(11) + 3.0 * x.powi(4)))
            .sum();
        assert_relative_eq!(int, 6.0 / 5.0, max_relative = 1e-13);
    }

    #[test]
    fn gl_degree_three_reference_nodes() {
        let (x, _) = gauss_legendre::<f64>(3);
        assert_relative_eq!(x[0], -0.774596669241483, max_relative = 1e-12);
        assert!(x[1].abs() < 1e-15);
    }

    #[test]
    fn graded_handles_sharp_peak() {
        // int_0^1 dv / (eps + v)^{3/2} = 2 (eps^{-1/2} - (eps+1)^{-1/2})
        let eps = 1e-8f64;
        let got = integrate_graded_to_zero(1.0, eps, 24, |v| (eps + v).powf(-1.5));
        let exact = 2.0 * (eps.powf(-0.5) - (eps + 1.0).powf(-0.5));
        assert_relative_eq!(got, exact, max_relative = 1e-10);
    }

    #[test]
    fn graded_smooth_integrand() {
        let got = integrate_graded_to_zero(std::f64::consts::PI, 1.0, 16, f64::sin);
        assert_relative_eq!(got, 2.0, max_relative = 1e-12);
    }
}
