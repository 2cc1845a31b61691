//! One ratio measurement: `||rho^alpha T phi|| / ||rho^alpha phi||` in the
//! mixed norm, with `T phi` computed on the Cartesian grid by the multiplier
//! path and resampled onto the polar norm grid, and `phi` sampled on the
//! polar grid directly (analytic fields never go through interpolation).

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use siolab_core::grid::{resample, GridFunction, PolarField};
use siolab_core::norms::{weighted_mixed_norm, NormParams};
use siolab_core::operators::{apply_spectral, KernelSpec, SpectralOptions};

use crate::config::{Family, GridSpec, ToleranceKnobs};
use crate::error::{CliError, Result};
use crate::families::make_test_function;

/// The sampled pair (phi, T phi) on a shared polar grid. Building it is the
/// expensive step; every (p, ptilde, alpha) evaluation against it is just a
/// pair of norms.
pub struct FieldPair {
    pub family: Family,
    pub param: f64,
    pub phi: PolarField<f64>,
    pub t_phi: PolarField<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RatioRow {
    pub family: String,
    pub param: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub flags: Vec<String>,
}

/// Grid actually used for a family member: the gaussian dilation couples the
/// window to `1/lambda` so that truncation commutes with the dilation and
/// the ratio is scale-invariant up to pure discretization error.
pub fn effective_grid(family: Family, param: f64, grid: &GridSpec) -> GridSpec {
    match family {
        Family::GaussianDilations => grid.scaled(1.0 / param),
        _ => grid.clone(),
    }
}

pub fn build_field_pair(
    family: Family,
    param: f64,
    dim: usize,
    kernel: &Arc<KernelSpec<f64>>,
    grid: &GridSpec,
    tol: &ToleranceKnobs,
) -> Result<FieldPair> {
    let spec = effective_grid(family, param, grid);
    let phi_fn = make_test_function(family, param, dim)?;

    let cart = spec.cartesian.build::<f64>(dim)?;
    let polar = spec.polar.build::<f64>(dim)?;

    let phi_cart = GridFunction::sample(&cart, |p| phi_fn(p))?;
    let opts = SpectralOptions {
        leakage_error_threshold: tol.leakage_error_threshold,
    };
    let (t_phi_cart, diag) = apply_spectral(kernel, &phi_cart, &opts)?;
    let (t_phi, zero_filled) = resample(&t_phi_cart, &polar)?;
    let phi = GridFunction::sample(&polar, |p| phi_fn(p))?;

    let mut flags = Vec::new();
    if zero_filled > 0 {
        flags.push(format!("resample_zero_filled={zero_filled}"));
    }
    if diag.boundary_leakage > 0.0 {
        flags.push(format!("leakage={:.3e}", diag.boundary_leakage));
    }
    Ok(FieldPair {
        family,
        param,
        phi,
        t_phi,
        flags,
    })
}

pub fn ratio_from_fields(
    pair: &FieldPair,
    params: &NormParams<f64>,
    tol: &ToleranceKnobs,
) -> Result<RatioRow> {
    let denominator = weighted_mixed_norm(&pair.phi, params)?;
    if !(denominator > tol.min_denominator) {
        return Err(CliError::ZeroDenominator);
    }
    let numerator = weighted_mixed_norm(&pair.t_phi, params)?;
    Ok(RatioRow {
        family: pair.family.name().to_string(),
        param: pair.param,
        numerator,
        denominator,
        ratio: numerator / denominator,
        flags: pair.flags.clone(),
    })
}

/// Standalone form: build the fields and take the ratio in one call.
pub fn ratio_point(
    family: Family,
    param: f64,
    params: &NormParams<f64>,
    kernel: &Arc<KernelSpec<f64>>,
    grid: &GridSpec,
    tol: &ToleranceKnobs,
) -> Result<RatioRow> {
    let pair = build_field_pair(family, param, params.dim, kernel, grid, tol)?;
    ratio_from_fields(&pair, params, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GridPreset, OperatorSpec};

    fn small_grid() -> GridSpec {
        let mut g = GridSpec::preset(GridPreset::Default);
        g.polar.radial_points = 128;
        g.polar.angular_resolution = 64;
        g.cartesian.points_per_axis = 128;
        g
    }

    #[test]
    fn plancherel_contraction_at_l2() {
        // alpha = 0, p = ptilde = 2: |m| <= 1 makes the ratio at most 1 up to
        // quadrature and truncation tolerance
        let kernel = OperatorSpec::default().build(2).unwrap();
        let params = NormParams::new(2.0, 2.0, 0.0, 2).unwrap();
        let row = ratio_point(
            Family::GaussianDilations,
            1.0,
            &params,
            &kernel,
            &small_grid(),
            &ToleranceKnobs::default(),
        )
        .unwrap();
        assert!(row.ratio <= 1.0 + 1e-3, "ratio {}", row.ratio);
        assert!(row.ratio > 0.5, "ratio suspiciously small: {}", row.ratio);
    }

    #[test]
    fn dilation_invariance_of_the_ratio() {
        let kernel = OperatorSpec::default().build(2).unwrap();
        let params = NormParams::new(2.0, 4.0, 0.5, 2).unwrap();
        let grid = small_grid();
        let tol = ToleranceKnobs::default();
        let ratios: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&l| {
                ratio_point(Family::GaussianDilations, l, &params, &kernel, &grid, &tol)
                    .unwrap()
                    .ratio
            })
            .collect();
        for r in &ratios[1..] {
            let rel = (r - ratios[0]).abs() / ratios[0];
            assert!(rel < 1e-3, "ratios {ratios:?}");
        }
    }
}
