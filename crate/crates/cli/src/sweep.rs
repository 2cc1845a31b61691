//! The sweep driver: ratio rows over the Cartesian product of exponent lists
//! and family parameters, boundary probes at inadmissible points, and the
//! split-bound constant at every (p, alpha). Deterministic given the config
//! (fixed quadrature, no randomness, ordered iteration); per-row failures are
//! recorded and the sweep completes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use siolab_core::grid::{GridFunction, PolarField, PolarGridSpec};
use siolab_core::norms::{mixed_norm, NormParams};
use siolab_core::point::norm as vnorm;
use siolab_core::stein_weiss::{
    apply_stein_weiss, young_bound_constant, SplitReport, SplitResolutions, SteinWeissParams,
};

use crate::blowup::{blowup_probe, BlowupReport};
use crate::config::SweepConfig;
use crate::error::{CliError, Result};
use crate::ratio::{build_field_pair, ratio_from_fields, FieldPair, RatioRow};

/// Headroom of the commutator-operator envelope check: the discretized
/// operator's mixed-norm ratio sits below the analytic bound B, whose window
/// strictly contains the radius ratios the diagnostic grid can form; 5%
/// covers quadrature wiggle on both sides.
pub const F_ENVELOPE_HEADROOM: f64 = 1.05;

/// Fixed diagnostic grid for the commutator-operator rows: the operator
/// application is quadratic in the node count, so it runs on its own modest
/// grid rather than the sweep's norm grid.
fn f_diagnostic_spec() -> PolarGridSpec {
    PolarGridSpec {
        rho_min: 0.05,
        rho_max: 8.0,
        radial_points: 96,
        angular_resolution: 48,
    }
}

/// Empirical check of the Young-bound envelope: the mixed-norm ratio of the
/// Stein–Weiss operator on the annulus indicator against B.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FDiagnostic {
    pub ratio: f64,
    pub bound_b: f64,
    pub envelope_ok: bool,
    pub skipped_pairs: usize,
    pub max_skip_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioReport {
    pub dim: usize,
    pub p: f64,
    pub p_tilde: f64,
    pub alpha: f64,
    pub admissible: bool,
    pub rows: Vec<RatioRow>,
    /// Max ratio over the swept families: a lower bracket of the operator
    /// constant, never the norm itself.
    pub ratio_max_lower: Option<f64>,
    /// Split-bound report at (p, alpha); the matching analytic upper bracket
    /// on the commutator side.
    pub young: Option<SplitReport<f64>>,
    /// Envelope check of the Stein–Weiss operator against B, at admissible
    /// points.
    pub f_diagnostic: Option<FDiagnostic>,
    /// Boundary probe, present at inadmissible points.
    pub blowup: Option<BlowupReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RowFailure {
    pub p: f64,
    pub p_tilde: f64,
    pub alpha: f64,
    pub family: Option<String>,
    pub param: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub reports: Vec<RatioReport>,
    pub failures: Vec<RowFailure>,
}

impl SweepOutcome {
    pub fn failed_rows(&self) -> usize {
        self.failures.len()
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let kernel = config.operator.build(config.dim)?;
    let blocks = config.family_blocks();

    // The field pair per (family, parameter) is shared across every exponent
    // triple; build each once, in config order.
    let mut pairs: Vec<std::result::Result<FieldPair, String>> = Vec::new();
    for block in &blocks {
        for &param in &block.parameters {
            pairs.push(
                build_field_pair(
                    block.family,
                    param,
                    config.dim,
                    &kernel,
                    &config.grid,
                    &config.tolerances,
                )
                .map_err(|e| e.to_string()),
            );
        }
    }

    let mut split_cache: BTreeMap<(u64, u64), SplitReport<f64>> = BTreeMap::new();

    // The diagnostic operator field depends only on alpha; cache it.
    let diag_grid = f_diagnostic_spec().build::<f64>(config.dim)?;
    let diag_phi = GridFunction::sample(&diag_grid, |p| {
        let r = vnorm(p);
        if r > 1.0 && r < 2.0 {
            1.0
        } else {
            0.0
        }
    })?;
    let mut f_cache: BTreeMap<u64, (PolarField<f64>, usize, f64)> = BTreeMap::new();

    let mut reports = Vec::new();
    let mut failures = Vec::new();

    for &p in &config.p_values {
        for &p_tilde in &config.p_tilde_values {
            for &alpha in &config.alpha_values {
                let params = match NormParams::new(p, p_tilde, alpha, config.dim) {
                    Ok(v) => v,
                    Err(e) => {
                        failures.push(RowFailure {
                            p,
                            p_tilde,
                            alpha,
                            family: None,
                            param: None,
                            error: e.to_string(),
                        });
                        continue;
                    }
                };
                let admissible = params.admissible();

                let mut rows = Vec::new();
                if admissible {
                    for pair in &pairs {
                        match pair {
                            Ok(pair) => {
                                match ratio_from_fields(pair, &params, &config.tolerances) {
                                    Ok(row) => rows.push(row),
                                    Err(e) => failures.push(RowFailure {
                                        p,
                                        p_tilde,
                                        alpha,
                                        family: Some(pair.family.name().into()),
                                        param: Some(pair.param),
                                        error: e.to_string(),
                                    }),
                                }
                            }
                            Err(e) => failures.push(RowFailure {
                                p,
                                p_tilde,
                                alpha,
                                family: None,
                                param: None,
                                error: e.clone(),
                            }),
                        }
                    }
                }
                let ratio_max_lower = rows
                    .iter()
                    .map(|r| r.ratio)
                    .fold(None, |acc: Option<f64>, r| {
                        Some(acc.map_or(r, |a| a.max(r)))
                    });

                let young = match split_for(&mut split_cache, config, p, alpha) {
                    Ok(report) => Some(report),
                    Err(e) => {
                        failures.push(RowFailure {
                            p,
                            p_tilde,
                            alpha,
                            family: None,
                            param: None,
                            error: format!("young bound: {e}"),
                        });
                        None
                    }
                };

                let f_diagnostic = if admissible {
                    match f_diagnostic_for(
                        &mut f_cache,
                        &diag_phi,
                        &params,
                        young.as_ref().map(|y| y.total),
                    ) {
                        Ok(d) => d,
                        Err(e) => {
                            failures.push(RowFailure {
                                p,
                                p_tilde,
                                alpha,
                                family: None,
                                param: None,
                                error: format!("F diagnostic: {e}"),
                            });
                            None
                        }
                    }
                } else {
                    None
                };

                let blowup = if !admissible {
                    match blowup_probe(
                        &params,
                        &kernel,
                        &config.blowup_deltas,
                        &config.grid,
                        &config.tolerances,
                    ) {
                        Ok(report) => Some(report),
                        Err(e) => {
                            failures.push(RowFailure {
                                p,
                                p_tilde,
                                alpha,
                                family: Some("necessity_bump".into()),
                                param: None,
                                error: format!("blowup probe: {e}"),
                            });
                            None
                        }
                    }
                } else {
                    None
                };

                reports.push(RatioReport {
                    dim: config.dim,
                    p,
                    p_tilde,
                    alpha,
                    admissible,
                    rows,
                    ratio_max_lower,
                    young,
                    f_diagnostic,
                    blowup,
                });
            }
        }
    }

    Ok(SweepOutcome {
        config: config.clone(),
        reports,
        failures,
    })
}

fn split_for(
    cache: &mut BTreeMap<(u64, u64), SplitReport<f64>>,
    config: &SweepConfig,
    p: f64,
    alpha: f64,
) -> Result<SplitReport<f64>> {
    let key = (p.to_bits(), alpha.to_bits());
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let params = SteinWeissParams::new(config.dim, p, alpha).map_err(CliError::Core)?;
    let report = young_bound_constant(&params, 1e-4, 1e4, &SplitResolutions::default())
        .map_err(CliError::Core)?;
    cache.insert(key, report.clone());
    Ok(report)
}

fn f_diagnostic_for(
    cache: &mut BTreeMap<u64, (PolarField<f64>, usize, f64)>,
    phi: &PolarField<f64>,
    params: &NormParams<f64>,
    bound_b: Option<f64>,
) -> Result<Option<FDiagnostic>> {
    let Some(bound_b) = bound_b else {
        return Ok(None);
    };
    let key = params.alpha.to_bits();
    if let std::collections::btree_map::Entry::Vacant(slot) = cache.entry(key) {
        let (field, diag) = apply_stein_weiss(phi, params.alpha)?;
        slot.insert((field, diag.skipped_pairs, diag.max_skip_bound));
    }
    let (field, skipped_pairs, max_skip_bound) = cache.get(&key).unwrap();
    let denominator = mixed_norm(phi, params)?;
    let numerator = mixed_norm(field, params)?;
    let ratio = numerator / denominator;
    Ok(Some(FDiagnostic {
        ratio,
        bound_b,
        envelope_ok: ratio <= F_ENVELOPE_HEADROOM * bound_b,
        skipped_pairs: *skipped_pairs,
        max_skip_bound: *max_skip_bound,
    }))
}
