use std::fmt;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad config, flag or argument (exit 2).
    Config,
    /// The generator could not produce a network (exit 3).
    Generation,
    /// Inputs that fail validation or analysis (exit 4).
    Validation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Config, message: message.into() }
    }

    pub fn generation(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Generation, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Validation, message: message.into() }
    }

    /// Prefixes the message, keeping the kind.
    pub fn with_context(self, context: &str) -> Self {
        Self { kind: self.kind, message: format!("{context}: {}", self.message) }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Generation => 3,
            ErrorKind::Validation => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<hglfr::Error> for CliError {
    fn from(e: hglfr::Error) -> Self {
        match e {
            hglfr::Error::Parameter(_) => CliError::config(e.to_string()),
            hglfr::Error::Generation(_) => CliError::generation(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::validation(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::validation(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
