use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("cube {cube} lies outside the index range of a {dim}-d grid with {n} cells per axis")]
    Range { cube: String, dim: usize, n: usize },

    #[error("tripled cube of {cube} does not fit in a grid with {n} cells per axis")]
    TriplingUnavailable { cube: String, n: usize },

    #[error("unsupported cube {cube}: {reason}")]
    UnsupportedCube { cube: String, reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cell set is not contained in cube {cube}")]
    Containment { cube: String },

    #[error("weight has {count} nonpositive entries (first at cell {first}); pass a floor to clamp them")]
    NonPositiveWeight { count: usize, first: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("stale calibration: corpus hash {found} does not match frozen hash {expected}")]
    StaleCalibration { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
