// `!(x < y)` guards reject NaN as well as out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use siolab_cli::blowup::blowup_probe;
use siolab_cli::config::{
    log_spaced, Family, GridPreset, GridSpec, OperatorSpec, SweepConfig, ToleranceKnobs,
};
use siolab_cli::error::{CliError, Result};
use siolab_cli::families::make_test_function;
use siolab_cli::report::{emit_reports, ratios_csv, OutputFormat};
use siolab_cli::sweep::run_sweep;

use siolab_core::grid::{dump_field, GridFunction};
use siolab_core::norms::{mixed_norm, weighted_mixed_norm, NormParams};
use siolab_core::operators::{apply_spectral, check_kernel_conditions, SpectralOptions};
use siolab_core::stein_weiss::{young_bound_constant, SplitResolutions, SteinWeissParams};

#[derive(Parser)]
#[command(
    name = "siolab",
    version,
    about = "Mixed radial-angular norms, Riesz-type operators, and weighted-bound diagnostics"
)]
struct Cli {
    /// Directory for emitted files; single-shot results also print to stdout
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Stdout serialization of single-shot results (sweeps always emit both
    /// the CSV table and the JSON summary)
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: OutputFormat,

    /// Additionally write flat two-column plot data files
    #[arg(long, global = true)]
    plot_data: bool,

    /// Grid resolutions: `default` or `fine` (doubled)
    #[arg(long, global = true, value_enum, default_value = "default")]
    grid_preset: GridPreset,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted and unweighted mixed norms of one family member
    Norm {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        p_tilde: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 1.0)]
        param: f64,
    },
    /// Apply the directional Riesz transform to a family member and report
    /// diagnostics; optionally dump the output field
    Riesz {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 1.0)]
        param: f64,
        /// Direction vector "x,y[,z]" (normalized; default first axis)
        #[arg(long)]
        direction: Option<String>,
        /// Write the transformed field as a coordinate/value table plus a
        /// JSON header sidecar
        #[arg(long, value_name = "PATH")]
        dump_field: Option<PathBuf>,
    },
    /// Split-bound report (pieces I/II/III, their sum B, and the verdict)
    Lemma {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 1e4)]
        m_cut: f64,
    },
    /// Run a parameter sweep from a JSON config file
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Boundary blow-up probe at one exponent triple
    Sharpness {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        p_tilde: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-4)]
        delta_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        delta_max: f64,
        #[arg(long, default_value_t = 9)]
        delta_count: usize,
    },
    /// Calderón–Zygmund condition report for a named kernel
    CheckKernel {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Kernel label: riesz or inv-power
        #[arg(long, default_value = "riesz")]
        kernel: String,
        #[arg(long)]
        direction: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        cap: f64,
    },
}

fn parse_direction(text: &Option<String>) -> Result<Option<[f64; 3]>> {
    match text {
        None => Ok(None),
        Some(s) => {
            let parts: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| CliError::Config(format!("bad direction '{s}': {e}")))?;
            if parts.len() < 2 || parts.len() > 3 {
                return Err(CliError::Config(format!(
                    "direction needs 2 or 3 components, got {}",
                    parts.len()
                )));
            }
            let mut v = [0.0; 3];
            v[..parts.len()].copy_from_slice(&parts);
            Ok(Some(v))
        }
    }
}

/// Print a single-shot result and mirror it into `--out` when given.
fn deliver(
    cli: &Cli,
    name: &str,
    json_value: serde_json::Value,
    csv: Option<String>,
) -> Result<()> {
    let text = match cli.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json_value)?,
        OutputFormat::Csv => csv.unwrap_or_else(|| serde_json::to_string(&json_value).unwrap()),
    };
    println!("{text}");
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let ext = match cli.format {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        };
        std::fs::write(dir.join(format!("{name}.{ext}")), format!("{text}\n"))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Norm {
            n,
            p,
            p_tilde,
            alpha,
            family,
            param,
        } => {
            let params = NormParams::new(*p, *p_tilde, *alpha, *n)?;
            let grid = GridSpec::for_dim(*n, cli.grid_preset);
            let polar = grid.polar.build::<f64>(*n)?;
            let f = make_test_function(*family, *param, *n)?;
            let field = GridFunction::sample(&polar, |x| f(x))?;
            let unweighted = mixed_norm(&field, &params)?;
            let weighted = weighted_mixed_norm(&field, &params)?;
            let value = json!({
                "n": n, "p": p, "p_tilde": p_tilde, "alpha": alpha,
                "family": family.name(), "param": param,
                "admissible": params.admissible(),
                "norm": unweighted,
                "weighted_norm": weighted,
                "grid": grid.polar,
            });
            let csv = format!(
                "n,p,p_tilde,alpha,family,param,norm,weighted_norm\n{},{},{},{},{},{},{},{}",
                n,
                p,
                p_tilde,
                alpha,
                family.name(),
                param,
                unweighted,
                weighted
            );
            deliver(cli, "norm", value, Some(csv))?;
            Ok(0)
        }

        Command::Riesz {
            n,
            family,
            param,
            direction,
            dump_field: dump,
        } => {
            let spec = OperatorSpec {
                label: "riesz".into(),
                direction: parse_direction(direction)?,
            };
            let kernel = spec.build(*n)?;
            let grid = GridSpec::for_dim(*n, cli.grid_preset);
            let cart = grid.cartesian.build::<f64>(*n)?;
            let f = make_test_function(*family, *param, *n)?;
            let field = GridFunction::sample(&cart, |x| f(x))?;
            let (out, diag) = apply_spectral(&kernel, &field, &SpectralOptions::default())?;
            let dumped = match dump {
                Some(path) => {
                    if let Some(parent) = path.parent() {
                        if !parent.as_os_str().is_empty() {
                            std::fs::create_dir_all(parent)?;
                        }
                    }
                    dump_field(&out, path)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let value = json!({
                "n": n, "family": family.name(), "param": param,
                "operator": "riesz",
                "sup_abs": out.max_abs(),
                "boundary_leakage": diag.boundary_leakage,
                "imag_residue_ratio": diag.imag_residue_ratio,
                "dumped_field": dumped,
                "grid": grid.cartesian,
            });
            deliver(cli, "riesz", value, None)?;
            Ok(0)
        }

        Command::Lemma {
            n,
            p,
            alpha,
            delta,
            m_cut,
        } => {
            let params = SteinWeissParams::new(*n, *p, *alpha)?;
            let report =
                young_bound_constant(&params, *delta, *m_cut, &SplitResolutions::default())?;
            let value = serde_json::to_value(&report)?;
            let csv = format!(
                "I,II,III,B,delta,M,verdict\n{},{},{},{},{},{},{:?}",
                report.piece_i,
                report.piece_ii,
                report.piece_iii,
                report.total,
                report.delta,
                report.m_cut,
                report.verdict
            );
            deliver(cli, "lemma", value, Some(csv))?;
            Ok(0)
        }

        Command::Sweep { config } => {
            let mut config = SweepConfig::load(config)?;
            if cli.grid_preset == GridPreset::Fine {
                config.grid = config.grid.doubled();
            }
            let outcome = run_sweep(&config)?;
            let out_dir = cli
                .out
                .clone()
                .or_else(|| config.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            let written = emit_reports(&outcome, cli.plot_data, &out_dir)?;
            if cli.format == OutputFormat::Csv {
                println!("{}", ratios_csv(&outcome));
            } else {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "reports": outcome.reports.len(),
                        "failed_rows": outcome.failed_rows(),
                        "written": written,
                    }))?
                );
            }
            Ok(if outcome.failed_rows() > 0 { 1 } else { 0 })
        }

        Command::Sharpness {
            n,
            p,
            p_tilde,
            alpha,
            delta_min,
            delta_max,
            delta_count,
        } => {
            if !(delta_min < delta_max) || *delta_count < 5 {
                return Err(CliError::Config(
                    "need delta_min < delta_max and at least 5 radii".into(),
                ));
            }
            let params = NormParams::new(*p, *p_tilde, *alpha, *n)?;
            let mut deltas = log_spaced(*delta_min, *delta_max, *delta_count);
            deltas.reverse();
            let grid = GridSpec::for_dim(*n, cli.grid_preset);
            let report = blowup_probe(
                &params,
                &OperatorSpec::default().build(*n)?,
                &deltas,
                &grid,
                &ToleranceKnobs::default(),
            )?;
            if cli.plot_data {
                if let Some(dir) = &cli.out {
                    std::fs::create_dir_all(dir)?;
                    let mut body = String::new();
                    for pt in &report.points {
                        body.push_str(&format!("{} {}\n", pt.delta, pt.ratio));
                    }
                    std::fs::write(dir.join("plot_blowup.dat"), body)?;
                }
            }
            let value = serde_json::to_value(&report)?;
            deliver(cli, "sharpness", value, None)?;
            Ok(0)
        }

        Command::CheckKernel {
            n,
            kernel,
            direction,
            cap,
        } => {
            let spec = OperatorSpec {
                label: kernel.clone(),
                direction: parse_direction(direction)?,
            };
            let k = spec.build(*n)?;
            // 4+ decades of radii around unit scale
            let radii = log_spaced(1e-2, 1e2, 33);
            let report = check_kernel_conditions(&k, &radii, 64, *cap)?;
            let value = serde_json::to_value(&report)?;
            let csv = format!(
                "sup_size,sup_gradient,sup_fourier,cap,size_ok,gradient_ok,fourier_ok\n{},{},{},{},{},{},{}",
                report.sup_size,
                report.sup_gradient,
                report.sup_fourier,
                report.cap,
                report.size_ok,
                report.gradient_ok,
                report.fourier_ok
            );
            deliver(cli, "check-kernel", value, Some(csv))?;
            Ok(if report.all_ok() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
