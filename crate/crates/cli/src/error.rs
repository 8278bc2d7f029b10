use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("factor {index} is not unitary (deviation {deviation:.3e})")]
    NonUnitary { index: usize, deviation: f64 },
    #[error("methods disagree: {0}")]
    Disagreement(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::NonUnitary { .. } => 3,
            CliError::Disagreement(_) => 4,
            CliError::Guard(_) => 5,
        }
    }
}

impl From<kron_defect::Error> for CliError {
    fn from(e: kron_defect::Error) -> Self {
        match e {
            kron_defect::Error::NotUnitary { index, deviation } => {
                CliError::NonUnitary { index, deviation }
            }
            kron_defect::Error::GuardExceeded(msg) => CliError::Guard(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
