use std::path::PathBuf;

/// Errors of the lab layer. Validation errors exit with code 1, numerical
/// failures with code 2.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("campaign has no runs")]
    EmptyCampaign,
    #[error("missing trace file {0}")]
    MissingTrace(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::EmptyCampaign => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }
}

impl From<liouville_core::dynamics::SolverError> for LabError {
    fn from(e: liouville_core::dynamics::SolverError) -> Self {
        use liouville_core::dynamics::SolverError as E;
        match e {
            E::NonFinite { .. } | E::CflViolation { .. } => LabError::Numerical(e.to_string()),
            _ => LabError::Config(e.to_string()),
        }
    }
}

impl From<liouville_core::nonlinearity::FieldError> for LabError {
    fn from(e: liouville_core::nonlinearity::FieldError) -> Self {
        LabError::Config(e.to_string())
    }
}

impl From<liouville_core::selfsimilar::SelfSimilarError> for LabError {
    fn from(e: liouville_core::selfsimilar::SelfSimilarError) -> Self {
        LabError::Numerical(e.to_string())
    }
}

impl From<liouville_core::dynamics::RateError> for LabError {
    fn from(e: liouville_core::dynamics::RateError) -> Self {
        LabError::Numerical(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
