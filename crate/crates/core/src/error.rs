use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("read voltage {v_read} V is outside the leakage table range [{v_min}, {v_max}] V")]
    LeakageRange { v_read: f64, v_min: f64, v_max: f64 },

    #[error("singular network at unknown {index}: pivot {pivot:e} (n_cells={n_cells}, r_segment={r_segment} ohm)")]
    SingularNetwork {
        index: usize,
        pivot: f64,
        n_cells: usize,
        r_segment: f64,
    },

    #[error("margin curve is not unimodal in R_on: {0}")]
    NotUnimodal(String),

    #[error("every point of the sweep failed; first failure: {0}")]
    SweepFailed(String),

    #[error(transparent)]
    Profile(#[from] ProfileError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("plot: {0}")]
    Plot(String),
}

/// Failures while loading a technology profile document.
#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Missing {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed profile document: {0}")]
    Malformed(String),

    #[error("unknown keys in profile: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("profile schema violation: {0}")]
    Schema(String),

    #[error("leakage table is not monotone: {0}")]
    NonMonotone(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
