use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = QicasError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum QicasError {
    #[error("format error at line {line}: {message} (offending token: `{token}`)")]
    Format {
        line: usize,
        token: String,
        message: String,
    },

    #[error("index out of range: {0}")]
    Range(String),

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("negative reduced-state eigenvalue {value:.3e} on orbital {orbital}")]
    Positivity { orbital: usize, value: f64 },

    #[error("entropy profile is identically zero")]
    DegenerateProfile,

    #[error("no plateau of at least {min_run} thresholds in the threshold diagram")]
    NoPlateau { min_run: usize },

    #[error(
        "occupancy classification found {found} closed orbitals, expected {expected}; non-active occupancies: {occupancies:?}"
    )]
    Classification {
        expected: usize,
        found: usize,
        occupancies: Vec<(usize, f64)>,
    },

    #[error("CAS projection of the ground state is null (weight {weight:.3e})")]
    DegeneratePartition { weight: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<QicasError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

impl QicasError {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        QicasError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QicasError::Io {
            path: path.into(),
            source,
        }
    }
}
