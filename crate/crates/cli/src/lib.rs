//! Experiment runner for the weighted mixed-norm operator laboratory: test
//! function families, ratio sweeps over (p, ptilde, alpha), boundary blow-up
//! probes, split-bound reports, and CSV/JSON emission.

// `!(x > y)` guards reject NaN as well as out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod config;
pub mod error;
pub mod families;
pub mod ratio;
pub mod report;
pub mod sweep;

pub use error::CliError;
