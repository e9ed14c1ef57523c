use std::fmt;

use tensorinf_core::Error as CoreError;
use tensorinf_simlab::SimError;

/// Failure with its exit status and machine-readable category.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn argument(message: impl Into<String>) -> Self {
        CliError { category: "argument", message: message.into() }
    }

    /// 3 for numeric failures, 2 for everything the caller can fix.
    pub fn exit_code(&self) -> i32 {
        if self.category == "numeric" {
            3
        } else {
            2
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category, self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let category = match &e {
            CoreError::Argument(_) => "argument",
            CoreError::Numeric(_) => "numeric",
            CoreError::Format { .. } => "format",
            CoreError::Io(_) => "io",
        };
        let message = match e {
            CoreError::Argument(m) | CoreError::Numeric(m) => m,
            other => other.to_string(),
        };
        CliError { category, message }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => CliError::argument(m),
            SimError::Core(c) => c.into(),
            other @ SimError::TooManyFailures { .. } => {
                let text = other.to_string();
                CliError { category: "numeric", message: text.trim_start_matches("numeric error: ").to_string() }
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { category: "io", message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError { category: "io", message: e.to_string() }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError { category: "io", message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
