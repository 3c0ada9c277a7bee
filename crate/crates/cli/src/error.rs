use thiserror::Error;

/// Errors surfaced by the command line, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: config, arguments, or referenced files.
    #[error("{0}")]
    Validation(String),

    /// A valid request that failed while running.
    #[error("{0}")]
    Runtime(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<tvdual::Error> for CliError {
    fn from(e: tvdual::Error) -> Self {
        use tvdual::Error as E;
        match e {
            E::InvalidTopology(_)
            | E::InvalidSchedule(_)
            | E::DisconnectedEpoch { .. }
            | E::Disconnected { .. }
            | E::Parse { .. }
            | E::Json(_)
            | E::InvalidArgument(_)
            | E::OutOfRange { .. }
            | E::UnknownBound { .. }
            | E::MissingConstant { .. }
            | E::ShapeMismatch { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
