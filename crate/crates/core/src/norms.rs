//! Mixed radial-angular Lebesgue norms with power weights.
//!
//! The norm of a field `f` on a polar grid is
//! `( sum_i W_i * ||f(rho_i .)||_{L^ptilde(S^{n-1})}^p )^{1/p}` with the
//! radial weights `W_i` implementing `rho^{n-1} drho` over the grid window.
//! All norms here are truncated to that window; the truncation is the
//! caller's to control and is exploited deliberately by the sharpness
//! probes. The power weight `|x|^alpha` is applied per shell as the exact
//! scalar `rho_i^alpha`, never sampled as a field.

use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, PolarField, PolarGridSpec};
use crate::point::{scale, Point};
use crate::scalar::{count, real, Scalar};

/// The exponent triple (p, ptilde, alpha) in dimension n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormParams<S> {
    pub p: S,
    pub p_tilde: S,
    pub alpha: S,
    pub dim: usize,
}

impl<S: Scalar> NormParams<S> {
    /// Both exponents strictly in (1, infinity).
    pub fn new(p: S, p_tilde: S, alpha: S, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::UnsupportedDimension(dim));
        }
        if !(p > S::one()) || !p.is_finite() {
            return Err(CoreError::InvalidExponent(format!("p = {p}")));
        }
        if !(p_tilde > S::one()) || !p_tilde.is_finite() {
            return Err(CoreError::InvalidExponent(format!("p_tilde = {p_tilde}")));
        }
        if !alpha.is_finite() {
            return Err(CoreError::InvalidExponent(format!("alpha = {alpha}")));
        }
        Ok(Self {
            p,
            p_tilde,
            alpha,
            dim,
        })
    }

    /// Edge sentinel `ptilde = infinity` (angular sup). Outside the admissible
    /// range of the boundedness statement but supported by the machinery.
    pub fn with_sup_angular(p: S, alpha: S, dim: usize) -> Result<Self> {
        let mut params = Self::new(p, real(2.0), alpha, dim)?;
        params.p_tilde = S::infinity();
        Ok(params)
    }

    /// The sharp weight range: `-n/p < alpha < n - n/p`.
    pub fn admissible(&self) -> bool {
        let n = count::<S>(self.dim);
        -n / self.p < self.alpha && self.alpha < n - n / self.p
    }

    /// Dual exponents with the weight reflected: `(p', ptilde', -alpha)`.
    pub fn dual(&self) -> Result<Self> {
        let pd = self.p / (self.p - S::one());
        let ptd = if self.p_tilde.is_finite() {
            self.p_tilde / (self.p_tilde - S::one())
        } else {
            return Err(CoreError::InvalidExponent(
                "dual of p_tilde = infinity not representable".into(),
            ));
        };
        Self::new(pd, ptd, -self.alpha, self.dim)
    }

    fn check_dim(&self, grid_dim: usize) -> Result<()> {
        if grid_dim != self.dim {
            return Err(CoreError::DimensionMismatch {
                left: grid_dim,
                right: self.dim,
            });
        }
        Ok(())
    }
}

fn check_p_tilde<S: Scalar>(p_tilde: S) -> Result<()> {
    if p_tilde.is_nan() || (p_tilde.is_finite() && p_tilde < S::one()) {
        return Err(CoreError::InvalidExponent(format!(
            "p_tilde = {p_tilde}, need 1 <= p_tilde <= infinity"
        )));
    }
    Ok(())
}

/// Angular norm of one shell: `( sum_j w_j |f(rho theta_j)|^ptilde )^{1/ptilde}`
/// with the grid's angular weights; `ptilde = infinity` returns the max.
pub fn angular_norm<S: Scalar>(f: &PolarField<S>, shell: usize, p_tilde: S) -> Result<S> {
    check_p_tilde(p_tilde)?;
    let values = f.shell_values(shell)?;
    if p_tilde.is_infinite() {
        return Ok(values.iter().fold(S::zero(), |m, v| m.max(v.abs())));
    }
    let weights = f.grid().angular_weights();
    let mut acc = S::zero();
    for (v, w) in values.iter().zip(weights) {
        acc += *w * v.abs().powf(p_tilde);
    }
    Ok(acc.powf(S::one() / p_tilde))
}

/// Angular norm against the renormalized (unit-mass) angular measure. With
/// this normalization the map `ptilde -> norm` is nondecreasing (Jensen),
/// the constant-free form of "increasing in ptilde".
pub fn angular_mean_norm<S: Scalar>(f: &PolarField<S>, shell: usize, p_tilde: S) -> Result<S> {
    check_p_tilde(p_tilde)?;
    let values = f.shell_values(shell)?;
    if p_tilde.is_infinite() {
        return Ok(values.iter().fold(S::zero(), |m, v| m.max(v.abs())));
    }
    let weights = f.grid().angular_weights();
    let total: S = weights.iter().copied().sum();
    let mut acc = S::zero();
    for (v, w) in values.iter().zip(weights) {
        acc += *w * v.abs().powf(p_tilde);
    }
    Ok((acc / total).powf(S::one() / p_tilde))
}

/// Plain `L^p` norm by full-grid quadrature, accumulated shell by shell.
/// This is the exact regrouping the mixed norm reduces to at `ptilde = p`.
pub fn lp_norm<S: Scalar>(f: &PolarField<S>, p: S) -> Result<S> {
    if !(p >= S::one()) || !p.is_finite() {
        return Err(CoreError::InvalidExponent(format!("p = {p}")));
    }
    let grid = f.grid();
    let ang_w = grid.angular_weights();
    let mut acc = S::zero();
    for shell in 0..grid.shell_count() {
        let values = f.shell_values(shell)?;
        let mut s = S::zero();
        for (v, w) in values.iter().zip(ang_w) {
            s += *w * v.abs().powf(p);
        }
        acc += grid.radial_weights()[shell] * s;
    }
    Ok(acc.powf(S::one() / p))
}

/// Mixed radial-angular norm over the grid window. At `ptilde = p` the
/// accumulation is literally the plain `L^p` quadrature sum (no intermediate
/// `1/ptilde` root), so the reduction is bit-exact, not approximate.
pub fn mixed_norm<S: Scalar>(f: &PolarField<S>, params: &NormParams<S>) -> Result<S> {
    weighted_shell_norm(f, params, S::zero())
}

/// Mixed norm of `rho^alpha f`, the weight applied per shell as an exact
/// scalar.
pub fn weighted_mixed_norm<S: Scalar>(f: &PolarField<S>, params: &NormParams<S>) -> Result<S> {
    weighted_shell_norm(f, params, params.alpha)
}

fn weighted_shell_norm<S: Scalar>(
    f: &PolarField<S>,
    params: &NormParams<S>,
    alpha: S,
) -> Result<S> {
    params.check_dim(f.grid().dim())?;
    let grid = f.grid();
    let p = params.p;
    let ang_w = grid.angular_weights();
    let mut acc = S::zero();
    for shell in 0..grid.shell_count() {
        let rho = grid.radii()[shell];
        let weight_pow = rho.powf(alpha * p);
        let shell_term = if params.p_tilde == p {
            let values = f.shell_values(shell)?;
            let mut s = S::zero();
            for (v, w) in values.iter().zip(ang_w) {
                s += *w * v.abs().powf(p);
            }
            s
        } else {
            angular_norm(f, shell, params.p_tilde)?.powf(p)
        };
        acc += grid.radial_weights()[shell] * weight_pow * shell_term;
    }
    Ok(acc.powf(S::one() / p))
}

/// Contributions of the two boundary shells to the p-th power sum of the
/// weighted mixed norm: a cheap truncation-sensitivity diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryShells<S> {
    pub inner: S,
    pub outer: S,
}

pub fn weighted_mixed_norm_with_boundary<S: Scalar>(
    f: &PolarField<S>,
    params: &NormParams<S>,
) -> Result<(S, BoundaryShells<S>)> {
    let norm = weighted_mixed_norm(f, params)?;
    let grid = f.grid();
    let shell_term = |shell: usize| -> Result<S> {
        let rho = grid.radii()[shell];
        let a = angular_norm(f, shell, params.p_tilde)?;
        Ok(grid.radial_weights()[shell] * rho.powf(params.alpha * params.p) * a.powf(params.p))
    };
    let boundary = BoundaryShells {
        inner: shell_term(0)?,
        outer: shell_term(grid.shell_count() - 1)?,
    };
    Ok((norm, boundary))
}

/// Check the homogeneous rescaling law: sample both `f(lambda .)` on the
/// `1/lambda`-scaled window and `f` on the base window, and return
/// `(mixed_norm of f(lambda .), lambda^{-n/p} * mixed_norm of f)`. The two
/// agree up to quadrature error because the change of variables is exact.
pub fn norm_scaling_check<S: Scalar>(
    f: impl Fn(Point<S>) -> S + Sync,
    lambda: S,
    params: &NormParams<S>,
    spec: &PolarGridSpec,
) -> Result<(S, S)> {
    scaling_check_impl(f, lambda, params, spec, false)
}

/// Weighted variant; the predicted factor is `lambda^{-alpha - n/p}`.
pub fn weighted_norm_scaling_check<S: Scalar>(
    f: impl Fn(Point<S>) -> S + Sync,
    lambda: S,
    params: &NormParams<S>,
    spec: &PolarGridSpec,
) -> Result<(S, S)> {
    scaling_check_impl(f, lambda, params, spec, true)
}

fn scaling_check_impl<S: Scalar>(
    f: impl Fn(Point<S>) -> S + Sync,
    lambda: S,
    params: &NormParams<S>,
    spec: &PolarGridSpec,
    weighted: bool,
) -> Result<(S, S)> {
    if !(lambda > S::zero()) || !lambda.is_finite() {
        return Err(CoreError::InvalidParameter(format!("lambda = {lambda}")));
    }
    let base = spec.build::<S>(params.dim)?;
    let scaled = spec
        .scaled(1.0 / lambda.to_f64().unwrap())
        .build::<S>(params.dim)?;

    let sampled_base = GridFunction::sample(&base, &f)?;
    let sampled_scaled = GridFunction::sample(&scaled, |x| f(scale(x, lambda)))?;

    let n_over_p = count::<S>(params.dim) / params.p;
    let (norm_scaled, norm_base, exponent) = if weighted {
        (
            weighted_mixed_norm(&sampled_scaled, params)?,
            weighted_mixed_norm(&sampled_base, params)?,
            -params.alpha - n_over_p,
        )
    } else {
        (
            mixed_norm(&sampled_scaled, params)?,
            mixed_norm(&sampled_base, params)?,
            -n_over_p,
        )
    };
    Ok((norm_scaled, lambda.powf(exponent) * norm_base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use crate::point::{dot, norm as vnorm};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn unit_ball_indicator(p: Point<f64>) -> f64 {
        if vnorm(p) <= 1.0 {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn angular_norm_of_constant_shell() {
        let g = PolarGrid::<f64>::build(2, 0.5, 2.0, 16, 64).unwrap();
        let f = GridFunction::sample(&g, |_| 3.0).unwrap();
        let got = angular_norm(&f, 4, 2.0).unwrap();
        assert_relative_eq!(got, 3.0 * TAU.sqrt(), max_relative = 1e-13);
        let sup = angular_norm(&f, 4, f64::INFINITY).unwrap();
        assert_relative_eq!(sup, 3.0, max_relative = 1e-15);
    }

    #[test]
    fn angular_norm_of_cosine_shell() {
        // f(rho theta) = theta . e1, ptilde = 2: integral of cos^2 is pi
        let g = PolarGrid::<f64>::build(2, 0.5, 2.0, 16, 64).unwrap();
        let f = GridFunction::sample(&g, |p| p[0] / vnorm(p)).unwrap();
        let got = angular_norm(&f, 7, 2.0).unwrap();
        assert_relative_eq!(got, PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn angular_norm_rejects_bad_exponent_and_shell() {
        let g = PolarGrid::<f64>::build(2, 0.5, 2.0, 8, 8).unwrap();
        let f = GridFunction::sample(&g, |_| 1.0).unwrap();
        assert!(angular_norm(&f, 0, 0.5).is_err());
        assert!(angular_norm(&f, 99, 2.0).is_err());
    }

    #[test]
    fn mixed_norm_of_ball_indicator() {
        // closed form |S^1|^{1/ptilde} (rho^n/n)^{1/p} at rho = 1, minus the
        // tiny rho < 0.01 deficit
        let g = PolarGrid::<f64>::build(2, 0.01, 2.0, 512, 64).unwrap();
        let f = GridFunction::sample(&g, unit_ball_indicator).unwrap();
        let params = NormParams::new(2.0, 4.0, 0.0, 2).unwrap();
        let got = mixed_norm(&f, &params).unwrap();
        let expect = TAU.powf(0.25) * 0.5f64.sqrt();
        assert_relative_eq!(got, expect, max_relative = 1e-2);
    }

    #[test]
    fn mixed_norm_of_gaussian_is_l2_norm() {
        let g = PolarGrid::<f64>::build(2, 0.01, 10.0, 512, 64).unwrap();
        let f = GridFunction::sample(&g, |p| (-dot(p, p)).exp()).unwrap();
        let params = NormParams::new(2.0, 2.0, 0.0, 2).unwrap();
        let got = mixed_norm(&f, &params).unwrap();
        assert_relative_eq!(got, (PI / 2.0).sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn reduction_to_lp_is_bitwise() {
        let g = PolarGrid::<f64>::build(2, 0.01, 10.0, 128, 32).unwrap();
        let f = GridFunction::sample(&g, |p| (-dot(p, p)).exp() + 0.3 * p[0]).unwrap();
        for p in [1.5, 2.0, 3.0, 4.7] {
            let params = NormParams::new(p, p, 0.0, 2).unwrap();
            let mixed = mixed_norm(&f, &params).unwrap();
            let plain = lp_norm(&f, p).unwrap();
            assert_eq!(mixed.to_bits(), plain.to_bits(), "p = {p}");
        }
    }

    #[test]
    fn weighted_norm_with_zero_alpha_is_bitwise_unweighted() {
        let g = PolarGrid::<f64>::build(2, 0.01, 10.0, 64, 16).unwrap();
        let f = GridFunction::sample(&g, |p| (-dot(p, p)).exp()).unwrap();
        let params = NormParams::new(2.0, 3.0, 0.0, 2).unwrap();
        let w = weighted_mixed_norm(&f, &params).unwrap();
        let u = mixed_norm(&f, &params).unwrap();
        assert_eq!(w.to_bits(), u.to_bits());
    }

    #[test]
    fn weighted_norm_of_ball_indicator() {
        let g = PolarGrid::<f64>::build(2, 0.01, 2.0, 512, 64).unwrap();
        let f = GridFunction::sample(&g, unit_ball_indicator).unwrap();
        let params = NormParams::new(2.0, 2.0, 0.5, 2).unwrap();
        let got = weighted_mixed_norm(&f, &params).unwrap();
        assert_relative_eq!(got, (TAU / 3.0).sqrt(), max_relative = 1e-2);
    }

    #[test]
    fn weight_bounds_on_annulus_support() {
        // support in 1 < |x| < 2 with alpha > 0: weighted norm between
        // 1^alpha and 2^alpha times the unweighted one
        let g = PolarGrid::<f64>::build(2, 0.5, 3.0, 256, 32).unwrap();
        let f = GridFunction::sample(&g, |p| {
            let r = vnorm(p);
            if r > 1.0 && r < 2.0 {
                (r - 1.0) * (2.0 - r)
            } else {
                0.0
            }
        })
        .unwrap();
        let alpha = 0.7;
        let params = NormParams::new(2.0, 4.0, alpha, 2).unwrap();
        let unweighted = mixed_norm(&f, &params).unwrap();
        let weighted = weighted_mixed_norm(&f, &params).unwrap();
        assert!(weighted >= unweighted);
        assert!(weighted <= 2f64.powf(alpha) * unweighted);
    }

    #[test]
    fn angular_mean_norm_monotone_in_p_tilde() {
        let g = PolarGrid::<f64>::build(2, 0.5, 2.0, 16, 64).unwrap();
        let f = GridFunction::sample(&g, |p| 1.0 + p[0] / vnorm(p)).unwrap();
        for shell in [0usize, 5, 15] {
            let mut prev = 0.0;
            for pt in [1.5, 2.0, 3.0, 6.0] {
                let v = angular_mean_norm(&f, shell, pt).unwrap();
                assert!(
                    v >= prev - 1e-13,
                    "mean angular norm must be nondecreasing in ptilde"
                );
                prev = v;
            }
            let sup = angular_mean_norm(&f, shell, f64::INFINITY).unwrap();
            assert!(sup >= prev - 1e-13);
        }
    }

    #[test]
    fn scaling_identity_at_lambda_one() {
        let spec = PolarGridSpec {
            rho_min: 0.01,
            rho_max: 10.0,
            radial_points: 128,
            angular_resolution: 32,
        };
        let params = NormParams::new(2.0, 3.0, 0.0, 2).unwrap();
        let (a, b) =
            norm_scaling_check(|p: Point<f64>| (-dot(p, p)).exp(), 1.0, &params, &spec).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn scaling_law_for_gaussian() {
        let spec = PolarGridSpec {
            rho_min: 0.01,
            rho_max: 10.0,
            radial_points: 256,
            angular_resolution: 32,
        };
        let params = NormParams::new(2.0, 3.0, 0.0, 2).unwrap();
        let (a, b) =
            norm_scaling_check(|p: Point<f64>| (-dot(p, p)).exp(), 2.0, &params, &spec).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn weighted_scaling_law() {
        let spec = PolarGridSpec {
            rho_min: 0.01,
            rho_max: 10.0,
            radial_points: 256,
            angular_resolution: 32,
        };
        let params = NormParams::new(2.0, 2.0, 0.3, 2).unwrap();
        let (a, b) =
            weighted_norm_scaling_check(|p: Point<f64>| (-dot(p, p)).exp(), 4.0, &params, &spec)
                .unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn admissibility_predicate() {
        let ok = NormParams::new(2.0, 4.0, 0.5, 2).unwrap();
        assert!(ok.admissible());
        assert!(!NormParams::new(2.0, 4.0, -1.0, 2).unwrap().admissible());
        assert!(!NormParams::new(2.0, 4.0, 1.0, 2).unwrap().admissible());
        assert!(NormParams::new(2.0, 4.0, 0.99, 2).unwrap().admissible());
        assert!(NormParams::new(1.0, 2.0, 0.0, 2).is_err());
        assert!(NormParams::new(2.0, f64::INFINITY, 0.0, 2).is_err());
    }

    #[test]
    fn dual_reflects_exponents() {
        let params = NormParams::new(2.0, 4.0, 1.25, 2).unwrap();
        let dual = params.dual().unwrap();
        assert_relative_eq!(dual.p, 2.0);
        assert_relative_eq!(dual.p_tilde, 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(dual.alpha, -1.25);
    }

    #[test]
    fn sup_angular_sentinel() {
        let params = NormParams::with_sup_angular(2.0f64, 0.0, 2).unwrap();
        assert!(params.p_tilde.is_infinite());
        let g = PolarGrid::<f64>::build(2, 0.5, 2.0, 32, 16).unwrap();
        let f = GridFunction::sample(&g, |_| 2.0).unwrap();
        let got = mixed_norm(&f, &params).unwrap();
        // sup over each shell is 2; radial L^2 of the constant 2
        let radial: f64 = g.radial_weights().iter().sum();
        assert_relative_eq!(got, 2.0 * radial.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn boundary_shell_diagnostic() {
        let g = PolarGrid::<f64>::build(2, 0.01, 2.0, 128, 16).unwrap();
        let f = GridFunction::sample(&g, |_| 1.0).unwrap();
        // alpha p + n < 0: the inner boundary shell dominates the outer one
        let params = NormParams::new(2.0, 2.0, -1.2, 2).unwrap();
        let (_, boundary) = weighted_mixed_norm_with_boundary(&f, &params).unwrap();
        assert!(boundary.inner > boundary.outer);
    }

    #[test]
    fn f32_norms_smoke() {
        let g = PolarGrid::<f32>::build(2, 0.01f32, 6.0, 128, 32).unwrap();
        let f = GridFunction::sample(&g, |p: Point<f32>| (-dot(p, p)).exp()).unwrap();
        let params = NormParams::new(2.0f32, 2.0, 0.0, 2).unwrap();
        let got = mixed_norm(&f, &params).unwrap();
        let exact = (std::f32::consts::PI / 2.0).sqrt();
        assert!((got - exact).abs() / exact < 1e-3, "{got} vs {exact}");
    }

    proptest::proptest! {
        #[test]
        fn homogeneity(c in -50.0f64..50.0) {
            proptest::prop_assume!(c.abs() > 1e-6);
            let g = PolarGrid::<f64>::build(2, 0.1, 4.0, 32, 16).unwrap();
            let f = GridFunction::sample(&g, |p| (-dot(p, p)).exp() + 0.2 * p[1]).unwrap();
            let scaled = GridFunction::from_values(
                g.clone(),
                f.values().iter().map(|v| c * v).collect(),
            )
            .unwrap();
            let params = NormParams::new(2.0, 3.0, 0.4, 2).unwrap();
            let a = weighted_mixed_norm(&scaled, &params).unwrap();
            let b = c.abs() * weighted_mixed_norm(&f, &params).unwrap();
            proptest::prop_assert!((a - b).abs() <= 1e-13 * b.abs().max(1e-300));
        }
    }
}
