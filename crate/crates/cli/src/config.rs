//! Sweep configuration: parameter lists, test-function family, grid
//! resolutions, operator choice, and tolerance knobs. Deserialized from the
//! JSON file given to `sweep --config`; every run is a deterministic function
//! of this structure.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use siolab_core::grid::{CartesianGridSpec, PolarGridSpec};
use siolab_core::operators::KernelSpec;
use siolab_core::point::{axis_x, normalized};

use crate::error::{CliError, Result};

/// Test-function families. `gaussian_dilations` parameterizes the dilation
/// scale lambda, `annulus_bumps` the rotation angle of the angular factor,
/// and `necessity_bump` is a fixed bump supported in `|x - 2 e1| < 1/2`
/// whose parameter is the inner truncation radius of the norm window, not a
/// shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum Family {
    GaussianDilations,
    AnnulusBumps,
    NecessityBump,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GaussianDilations => "gaussian_dilations",
            Family::AnnulusBumps => "annulus_bumps",
            Family::NecessityBump => "necessity_bump",
        }
    }
}

/// Polar norm grid plus Cartesian spectral grid, as one unit so window
/// rescalings stay in sync.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub polar: PolarGridSpec,
    pub cartesian: CartesianGridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GridPreset {
    #[value(name = "default")]
    Default,
    #[value(name = "fine")]
    Fine,
}

impl GridSpec {
    /// Acceptance-grade defaults for n = 2: polar 512 x 256 on [0.01, 10],
    /// Cartesian M = 512 on [-12, 12).
    pub fn preset(preset: GridPreset) -> Self {
        let base = GridSpec {
            polar: PolarGridSpec {
                rho_min: 0.01,
                rho_max: 10.0,
                radial_points: 512,
                angular_resolution: 256,
            },
            cartesian: CartesianGridSpec {
                half_extent: 12.0,
                points_per_axis: 512,
            },
        };
        match preset {
            GridPreset::Default => base,
            GridPreset::Fine => base.doubled(),
        }
    }

    /// Smoke-scale resolutions for n = 3 (the spectral path is cubic in M).
    pub fn preset_3d(preset: GridPreset) -> Self {
        let base = GridSpec {
            polar: PolarGridSpec {
                rho_min: 0.01,
                rho_max: 10.0,
                radial_points: 128,
                angular_resolution: 16,
            },
            cartesian: CartesianGridSpec {
                half_extent: 12.0,
                points_per_axis: 64,
            },
        };
        match preset {
            GridPreset::Default => base,
            GridPreset::Fine => base.doubled(),
        }
    }

    pub fn for_dim(dim: usize, preset: GridPreset) -> Self {
        if dim == 3 {
            Self::preset_3d(preset)
        } else {
            Self::preset(preset)
        }
    }

    /// Both windows rescaled by `factor`, resolutions unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        GridSpec {
            polar: self.polar.scaled(factor),
            cartesian: self.cartesian.scaled(factor),
        }
    }

    /// Resolutions doubled, windows unchanged (grid-stability checks).
    pub fn doubled(&self) -> Self {
        GridSpec {
            polar: PolarGridSpec {
                radial_points: self.polar.radial_points * 2,
                angular_resolution: self.polar.angular_resolution * 2,
                ..self.polar.clone()
            },
            cartesian: CartesianGridSpec {
                half_extent: self.cartesian.half_extent,
                points_per_axis: self.cartesian.points_per_axis * 2,
            },
        }
    }
}

/// Operator selection: the directional Riesz family (label "riesz") or the
/// deliberately non-CZ `1/|y|^{n-1}` (label "inv-power", no multiplier).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub label: String,
    #[serde(default)]
    pub direction: Option<[f64; 3]>,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self {
            label: "riesz".into(),
            direction: None,
        }
    }
}

impl OperatorSpec {
    pub fn build(&self, dim: usize) -> Result<Arc<KernelSpec<f64>>> {
        let direction = match self.direction {
            Some(v) => normalized(v)
                .ok_or_else(|| CliError::Config("operator direction must be nonzero".into()))?,
            None => axis_x(),
        };
        let kernel = match self.label.as_str() {
            "riesz" => KernelSpec::riesz(dim, direction)?,
            "inv-power" => KernelSpec::inverse_power(dim)?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown operator label '{other}' (expected riesz or inv-power)"
                )))
            }
        };
        Ok(Arc::new(kernel))
    }
}

/// Tolerance knobs threaded into the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToleranceKnobs {
    /// Boundary-to-peak ratio above which the spectral path errors out.
    pub leakage_error_threshold: f64,
    /// Smallest admissible denominator norm.
    pub min_denominator: f64,
}

impl Default for ToleranceKnobs {
    fn default() -> Self {
        Self {
            leakage_error_threshold: 1e-3,
            min_denominator: 1e-12,
        }
    }
}

/// An additional family block for sweeps that mix families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyBlock {
    pub family: Family,
    pub parameters: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dim: usize,
    pub p_values: Vec<f64>,
    pub p_tilde_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub family: Family,
    pub family_parameters: Vec<f64>,
    /// Optional further families swept alongside `family`.
    #[serde(default)]
    pub extra_families: Vec<FamilyBlock>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub operator: OperatorSpec,
    /// Truncation radii for the boundary probes at inadmissible points.
    #[serde(default = "default_blowup_deltas")]
    pub blowup_deltas: Vec<f64>,
    #[serde(default)]
    pub tolerances: ToleranceKnobs,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_grid() -> GridSpec {
    GridSpec::preset(GridPreset::Default)
}

fn default_blowup_deltas() -> Vec<f64> {
    log_spaced(1e-4, 1e-2, 9)
}

/// `count` log-uniform values from `lo` to `hi`, ascending.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let l0 = lo.ln();
    let l1 = hi.ln();
    (0..count)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

impl SweepConfig {
    pub fn family_blocks(&self) -> Vec<FamilyBlock> {
        let mut blocks = vec![FamilyBlock {
            family: self.family,
            parameters: self.family_parameters.clone(),
        }];
        blocks.extend(self.extra_families.iter().cloned());
        blocks
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(CliError::Config(format!(
                "dim must be 2 or 3, got {}",
                self.dim
            )));
        }
        for p in self.p_values.iter().chain(&self.p_tilde_values) {
            if !(*p > 1.0) || !p.is_finite() {
                return Err(CliError::Config(format!(
                    "exponents must lie in (1, infinity), got {p}"
                )));
            }
        }
        for a in &self.alpha_values {
            if !a.is_finite() {
                return Err(CliError::Config(format!("alpha must be finite, got {a}")));
            }
        }
        for block in self.family_blocks() {
            if block.parameters.is_empty() && block.family != Family::NecessityBump {
                continue;
            }
            for q in &block.parameters {
                if !(*q > 0.0) || !q.is_finite() {
                    return Err(CliError::Config(format!(
                        "family parameters must be positive, got {q}"
                    )));
                }
            }
        }
        if self.blowup_deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(CliError::Config("blowup deltas must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: SweepConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }
}
