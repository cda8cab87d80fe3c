use algiso::cfi::CfiError;
use algiso::field::FieldError;
use algiso::graph::GraphError;
use algiso::partition::PartitionError;
use algiso::poly::PolyError;
use algiso::refine::RefineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    /// 2 for bad input, 3 for a resource guard, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Internal(_) => 1,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            PolyError::WitnessInvalid => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::OracleLimit { .. } => CliError::Guard(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error!(PartitionError, RefineError, CfiError, FieldError, serde_json::Error);

pub type CliResult<T> = Result<T, CliError>;
