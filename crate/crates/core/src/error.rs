//! Error type shared by the whole crate. Payloads are carried as `f64` so the
//! enum stays non-generic and printable regardless of the scalar in use.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unsupported dimension {0}, expected 2 or 3")]
    UnsupportedDimension(usize),

    #[error("invalid radial range [{rho_min}, {rho_max}]: need 0 < rho_min < rho_max")]
    InvalidRadialRange { rho_min: f64, rho_max: f64 },

    #[error("invalid grid resolution: {0}")]
    InvalidResolution(String),

    #[error("non-finite value at node {index} = ({x}, {y}, {z})")]
    NonFiniteValue {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
    },

    #[error("value count {values} does not match node count {nodes}")]
    ValueCountMismatch { values: usize, nodes: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("shell index {index} out of range ({shells} shells)")]
    ShellIndexOutOfRange { index: usize, shells: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("radial argument rho = {0} is within 1e-6 of the sphere-integral singularity at 1")]
    TooCloseToOne(f64),

    #[error("invalid truncation window: {0}")]
    InvalidWindow(String),

    #[error("kernel sampling radii must span at least {required} decades, got {got:.3}")]
    InsufficientDecades { required: f64, got: f64 },

    #[error("kernel has no Fourier multiplier; the spectral path needs one")]
    MissingMultiplier,

    #[error(
        "field leaks to the box boundary: leakage {leakage:.3e} exceeds threshold {threshold:.3e}"
    )]
    SupportLeakage { leakage: f64, threshold: f64 },

    #[error("unit direction expected, |theta| = {0}")]
    NotUnitDirection(f64),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed field file: {0}")]
    MalformedField(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
