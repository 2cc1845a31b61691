//! Sharpness probes at the boundary of the admissible weight range.
//!
//! The necessity mechanism: the bump `phi` vanishes near the origin while
//! `T phi` does not, so the weighted norm ratio over the truncated window
//! `[delta, rho_max]` diverges as `delta -> 0` exactly when `alpha <= -n/p`.
//! The upper boundary `alpha >= n - n/p` is probed through the dual
//! exponents `(p', ptilde', -alpha)`, which lands on the lower-boundary
//! machinery.
//!
//! `T phi` is assembled once on a master polar grid: direct far-field
//! quadrature of the kernel against the bump on shells `rho <= 1` (the
//! support is at distance >= 1/2, so no singularity, and accuracy is uniform
//! down to arbitrarily small radii) and the spectral path resampled from the
//! Cartesian grid on shells `rho > 1`. Truncations reuse that one field with
//! exactly rebuilt sub-grid weights, so the increments of `ratio^p` between
//! consecutive truncations are free of shared quadrature error — the
//! divergence-rate fits run on those increments, while the power-vs-log
//! model choice is also cross-checked against the raw dual fit
//! (`ln ratio` vs `ln(1/delta)` against `ln ratio` vs `ln ln(1/delta)`).

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use siolab_core::fit::linear_fit;
use siolab_core::grid::{GridFunction, GridGeometry, PolarGridSpec};
use siolab_core::norms::{weighted_mixed_norm, NormParams};
use siolab_core::operators::{apply_far_field, apply_spectral, KernelSpec, SpectralOptions};
use siolab_core::point::Point;

use crate::config::{Family, GridSpec, ToleranceKnobs};
use crate::error::{CliError, Result};
use crate::families::{make_test_function, NECESSITY_CENTER, NECESSITY_RADIUS};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct BlowupPoint {
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlowupModel {
    Power,
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub dim: usize,
    /// Exponents as requested.
    pub p: f64,
    pub p_tilde: f64,
    pub alpha: f64,
    /// True when the probe ran on the dual side.
    pub reflected: bool,
    /// Exponents actually probed (equal to the requested ones unless
    /// reflected).
    pub probe_p: f64,
    pub probe_p_tilde: f64,
    pub probe_alpha: f64,
    /// Truncation radius (snapped to grid shells) and truncated-norm ratio,
    /// by decreasing delta.
    pub points: Vec<BlowupPoint>,
    pub converged: bool,
    /// Relative ratio change across the last decade of delta.
    pub last_decade_change: f64,
    pub monotone: bool,
    pub winning_model: Option<BlowupModel>,
    /// Growth exponent of the ratio in `1/delta` (power model), fitted on
    /// increments of `ratio^p` so the window's convergent bulk cancels.
    pub fitted_exponent: Option<f64>,
    /// `-(alpha + n/p)` of the probe, when strictly below the boundary.
    pub expected_exponent: Option<f64>,
    pub r_squared: Option<f64>,
    /// Fit quality of the raw dual fit, recorded for reference:
    /// `ln ratio` against `ln(1/delta)` and against `ln ln(1/delta)`.
    pub r_squared_raw_power: Option<f64>,
    pub r_squared_raw_loglog: Option<f64>,
}

pub fn blowup_probe(
    params: &NormParams<f64>,
    kernel: &Arc<KernelSpec<f64>>,
    delta_values: &[f64],
    grid: &GridSpec,
    tol: &ToleranceKnobs,
) -> Result<BlowupReport> {
    if delta_values.len() < 5 {
        return Err(CliError::Config(
            "need at least 5 truncation radii for the blow-up fit".into(),
        ));
    }
    let mut deltas: Vec<f64> = delta_values.to_vec();
    if deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
        return Err(CliError::Config("truncation radii must be positive".into()));
    }
    deltas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = deltas.last().unwrap() / deltas[0];
    if span < 100.0 * (1.0 - 1e-9) {
        return Err(CliError::Config(format!(
            "truncation radii must span at least 2 decades, got {:.3}",
            span.log10()
        )));
    }
    if *deltas.last().unwrap() >= 1.0 {
        return Err(CliError::Config(
            "truncation radii must stay below the bump support".into(),
        ));
    }

    // Upper-boundary probes reflect to the dual exponents.
    let n_over_p = params.dim as f64 / params.p;
    let reflected = params.alpha >= params.dim as f64 - n_over_p - 1e-12;
    let probe = if reflected { params.dual()? } else { *params };

    // Master polar grid: window widened down to the smallest delta, radial
    // resolution kept constant per decade.
    let base = &grid.polar;
    let per_log = base.radial_points as f64 / (base.rho_max / base.rho_min).ln();
    let radial_points = ((base.rho_max / deltas[0]).ln() * per_log).ceil() as usize + 1;
    let master_spec = PolarGridSpec {
        rho_min: deltas[0],
        rho_max: base.rho_max,
        radial_points: radial_points.max(base.radial_points),
        angular_resolution: base.angular_resolution,
    };
    let master = master_spec.build::<f64>(params.dim)?;

    let phi_fn = make_test_function(Family::NecessityBump, deltas[0], params.dim)?;
    let phi = GridFunction::sample(&master, |p| phi_fn(p))?;

    // T phi, stitched: far-field quadrature inside rho <= 1, spectral outside.
    let cart = grid.cartesian.build::<f64>(params.dim)?;
    let phi_cart = GridFunction::sample(&cart, |p| phi_fn(p))?;
    let opts = SpectralOptions {
        leakage_error_threshold: tol.leakage_error_threshold,
    };
    let (t_cart, _) = apply_spectral(kernel, &phi_cart, &opts)?;

    let mut inner_nodes: Vec<Point<f64>> = Vec::new();
    let mut inner_index: Vec<usize> = Vec::new();
    let mut values = vec![0.0f64; master.shell_count() * master.angular_count()];
    for shell in 0..master.shell_count() {
        let rho = master.radii()[shell];
        for a in 0..master.angular_count() {
            let idx = master.node_index(shell, a);
            let x = master.node_at(shell, a);
            if rho <= 1.0 {
                inner_nodes.push(x);
                inner_index.push(idx);
            } else {
                values[idx] = cart.interpolate(t_cart.values(), x).ok_or_else(|| {
                    CliError::Config(
                        "norm window exceeds the Cartesian box; enlarge half_extent".into(),
                    )
                })?;
            }
        }
    }
    let inner_values = apply_far_field(
        kernel,
        &|p| phi_fn(p),
        NECESSITY_CENTER,
        NECESSITY_RADIUS,
        &inner_nodes,
        32,
    )?;
    for (idx, v) in inner_index.into_iter().zip(inner_values) {
        values[idx] = v;
    }
    let t_phi = GridFunction::from_values(master.clone(), values)?;

    // Truncated ratios, one per snapped delta.
    let mut points: Vec<BlowupPoint> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &delta in &deltas {
        let shell = master.nearest_shell(delta);
        if !seen.insert(shell) {
            continue;
        }
        let snapped = master.radii()[shell];
        let (num_field, den_field) = if shell == 0 {
            (t_phi.clone(), phi.clone())
        } else {
            (t_phi.truncate_inner(shell)?, phi.truncate_inner(shell)?)
        };
        let numerator = weighted_mixed_norm(&num_field, &probe)?;
        let denominator = weighted_mixed_norm(&den_field, &probe)?;
        if !(denominator > tol.min_denominator) {
            return Err(CliError::ZeroDenominator);
        }
        points.push(BlowupPoint {
            delta: snapped,
            ratio: numerator / denominator,
        });
    }
    if points.len() < 5 {
        return Err(CliError::Config(
            "truncation radii collapse onto too few grid shells".into(),
        ));
    }

    // points ascending in delta here; y = ratio^p decreasing
    let p = probe.p;
    let y: Vec<f64> = points.iter().map(|pt| pt.ratio.powf(p)).collect();
    let increments: Vec<f64> = y.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();
    let monotone = y.windows(2).all(|w| w[0] >= w[1] - 1e-12 * w[1].abs());

    // Convergence: geometric decay of the increments toward small delta.
    let mut log_sum = 0.0;
    let mut pairs = 0usize;
    for k in 0..increments.len().saturating_sub(1).min(5) {
        if increments[k] > 1e-30 && increments[k + 1] > 1e-30 {
            log_sum += (increments[k] / increments[k + 1]).ln();
            pairs += 1;
        }
    }
    let increment_ratio = if pairs > 0 {
        (log_sum / pairs as f64).exp()
    } else {
        0.0
    };
    let converged = increment_ratio < 0.9;

    // Ratio change across the last decade of delta.
    let d_min = points[0].delta;
    let target = d_min * 10.0;
    let at_decade = points
        .iter()
        .min_by(|a, b| {
            let da = (a.delta.ln() - target.ln()).abs();
            let db = (b.delta.ln() - target.ln()).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let last_decade_change = (points[0].ratio - at_decade.ratio).abs() / points[0].ratio;

    // Rate fits on the increments (offset-free), plus the raw dual fit for
    // the record.
    let mut fitted_exponent = None;
    let mut winning_model = None;
    let mut r_squared = None;
    if !converged {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (k, d) in increments.iter().enumerate() {
            if *d > 0.0 {
                xs.push((1.0 / points[k].delta).ln());
                ys.push(d.ln());
            }
        }
        if let Some(fit) = linear_fit(&xs, &ys) {
            if fit.slope.abs() < 0.1 {
                winning_model = Some(BlowupModel::Log);
                // r^p is asymptotically linear in ln(1/delta) at the boundary
                let lx: Vec<f64> = points.iter().map(|pt| (1.0 / pt.delta).ln()).collect();
                r_squared = linear_fit(&lx, &y).map(|f| f.r_squared);
            } else {
                winning_model = Some(BlowupModel::Power);
                fitted_exponent = Some(fit.slope / p);
                r_squared = Some(fit.r_squared);
            }
        }
    }

    let raw_x_power: Vec<f64> = points.iter().map(|pt| (1.0 / pt.delta).ln()).collect();
    let raw_x_loglog: Vec<f64> = raw_x_power.iter().map(|x| x.ln()).collect();
    let raw_y: Vec<f64> = points.iter().map(|pt| pt.ratio.ln()).collect();
    let r_squared_raw_power = linear_fit(&raw_x_power, &raw_y).map(|f| f.r_squared);
    let r_squared_raw_loglog = linear_fit(&raw_x_loglog, &raw_y).map(|f| f.r_squared);

    let probe_n_over_p = probe.dim as f64 / probe.p;
    let expected_exponent = if probe.alpha < -probe_n_over_p - 1e-12 {
        Some(-(probe.alpha + probe_n_over_p))
    } else {
        None
    };

    // Report with decreasing delta, matching the input convention.
    points.reverse();
    Ok(BlowupReport {
        dim: params.dim,
        p: params.p,
        p_tilde: params.p_tilde,
        alpha: params.alpha,
        reflected,
        probe_p: probe.p,
        probe_p_tilde: probe.p_tilde,
        probe_alpha: probe.alpha,
        points,
        converged,
        last_decade_change,
        monotone,
        winning_model,
        fitted_exponent,
        expected_exponent,
        r_squared,
        r_squared_raw_power,
        r_squared_raw_loglog,
    })
}
