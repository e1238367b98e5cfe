use std::path::PathBuf;

/// Errors raised anywhere in the preconditioner pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is singular: zero pivot in column {column}")]
    Singular { column: usize },

    #[error("local factorization of subdomain {subdomain} failed: {source}")]
    SubdomainFactorization {
        subdomain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scalar field mismatch: {0}")]
    Field(String),

    #[error("non-positive curvature p^H A p = {curvature:e} at iteration {iteration}; operator or preconditioner is not SPD")]
    NonPositiveCurvature { iteration: usize, curvature: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Pipeline failure, tagged with the experiment point that hit it.
    #[error("run {context}: {source}")]
    Run {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
