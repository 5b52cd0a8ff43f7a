use std::fmt;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    CheckFailed = 1,
    InputError = 2,
    IoError = 3,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config values or specification; carries one line per
    /// diagnostic.
    Input(Vec<String>),
    Io(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(vec![msg.into()])
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Input(_) => ExitCode::InputError,
            CliError::Io(_) => ExitCode::IoError,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(lines) => f.write_str(&lines.join("\n")),
            CliError::Io(msg) => write!(f, "E_IO: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<spdecrit_numerics::NumericsError> for CliError {
    fn from(e: spdecrit_numerics::NumericsError) -> Self {
        match e {
            spdecrit_numerics::NumericsError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::input(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
