//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("estimating equation has no sign change within search radius {radius}")]
    NoRootInRadius { radius: f64 },

    #[error("centered moment of order {order} diverges for shape {shape}")]
    MomentDiverges { order: f64, shape: f64 },

    #[error("no scale satisfies the moment bound {bound}")]
    InfeasibleMoment { bound: f64 },

    #[error("detector already tripped at sample {0}; reset before stepping again")]
    SteppedAfterTrip(u64),

    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    #[error("cannot parse value at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
