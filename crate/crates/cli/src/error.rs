use thiserror::Error;
use uav_offload::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Infeasible(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::Io(_)
            | CoreError::Json(_)
            | CoreError::Csv(_)
            | CoreError::ProfileParse { .. } => CliError::Io(msg),
            CoreError::EmptyCoverage
            | CoreError::NoFeasibleAssignment
            | CoreError::InstanceTooLarge { .. }
            | CoreError::InfeasiblePlan(_)
            | CoreError::DisconnectedNode(_) => CliError::Infeasible(msg),
            _ => CliError::Usage(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
