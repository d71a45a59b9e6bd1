use std::fmt;

/// Failure of a CLI invocation. Configuration problems exit with 2,
/// everything else with 3.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config { path: String, message: String },
    Runtime(String),
    Io(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { path, message } => write!(f, "config error at `{path}`: {message}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<tlsync_core::Error> for CliError {
    fn from(e: tlsync_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
