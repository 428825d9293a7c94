use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One Newton iteration, kept for non-convergence reports.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub log_likelihood: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: header mismatch, expected `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("empty design: all {0} rows were dropped")]
    EmptyDesign(usize),

    #[error("response category {0} is absent from the data")]
    MissingCategory(u8),

    #[error("design is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),

    #[error("separation: covariate `{covariate}` perfectly predicts {detail}")]
    Separation { covariate: String, detail: String },

    #[error("optimizer did not converge after {iterations} iterations (last gradient norm {:.3e})", trace.last().map(|t| t.gradient_norm).unwrap_or(f64::NAN))]
    NonConvergence {
        iterations: usize,
        trace: Vec<IterationTrace>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
