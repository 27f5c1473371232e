use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario error: {0}")]
    Schema(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("self-test failed: {0}")]
    SelftestFailed(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::SelftestFailed(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<fsmrc::Error> for CliError {
    fn from(e: fsmrc::Error) -> Self {
        match e {
            fsmrc::Error::InvalidParameter { .. } | fsmrc::Error::TooManyBranches { .. } => {
                CliError::Schema(e.to_string())
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
