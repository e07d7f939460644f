use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The mode mixing factors do not exist when the field vanishes.
    #[error("quantity undefined in the decoupled (zero-field) regime: {0}")]
    DecoupledRegime(&'static str),

    #[error("t = {time} is a caustic (conjugate point); nearest caustics: {nearby:?}")]
    Caustic { time: f64, nearby: Vec<f64> },

    #[error("t = {time} lies beyond the first caustic at t = {first}; split the evolution into shorter steps")]
    PastFirstCaustic { time: f64, first: f64 },

    #[error("calibration value {0} is not one of the admissible candidates")]
    Uncalibrated(String),

    #[error("ambiguous calibration: {0}")]
    Ambiguous(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("{0} did not converge after {1} iterations")]
    NonConvergence(&'static str, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
