//! Report emission: the fixed-header CSV, the JSON summary, and optional flat
//! two-column plot files. Floats are printed in Rust's shortest round-trip
//! form, so identical runs produce byte-identical files and JSON reloads
//! reproduce every stored real bit-exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::sweep::SweepOutcome;

pub const CSV_HEADER: &str = "n,p,p_tilde,alpha,family,param,numerator,denominator,ratio,flags";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// CSV body: one row per (p, ptilde, alpha, family, parameter).
pub fn ratios_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for report in &outcome.reports {
        for row in &report.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                report.dim,
                report.p,
                report.p_tilde,
                report.alpha,
                row.family,
                row.param,
                row.numerator,
                row.denominator,
                row.ratio,
                row.flags.join(";")
            )
            .expect("string write");
        }
    }
    out
}

/// Write `ratios.csv` + `summary.json`, and with `plot_data` the flat
/// two-column files (family parameter vs ratio per exponent triple, delta vs
/// truncated ratio for the boundary probes). Returns the paths written.
pub fn emit_reports(
    outcome: &SweepOutcome,
    plot_data: bool,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let csv_path = out_dir.join("ratios.csv");
    std::fs::write(&csv_path, ratios_csv(outcome))?;
    written.push(csv_path);

    let json_path = out_dir.join("summary.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(outcome)?)?;
    written.push(json_path);

    if plot_data {
        for report in &outcome.reports {
            let tag = format!("p{}_pt{}_a{}", report.p, report.p_tilde, report.alpha);
            if !report.rows.is_empty() {
                let mut body = String::new();
                for row in &report.rows {
                    writeln!(body, "{} {}", row.param, row.ratio).expect("string write");
                }
                let path = out_dir.join(format!("plot_ratio_{tag}.dat"));
                std::fs::write(&path, body)?;
                written.push(path);
            }
            if let Some(blowup) = &report.blowup {
                let mut body = String::new();
                for pt in &blowup.points {
                    writeln!(body, "{} {}", pt.delta, pt.ratio).expect("string write");
                }
                let path = out_dir.join(format!("plot_blowup_{tag}.dat"));
                std::fs::write(&path, body)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
