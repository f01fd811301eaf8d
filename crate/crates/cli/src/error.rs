use std::fmt;
use std::process::ExitCode;

/// A failure that ends the process, tagged with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Io,
    Config,
    Numeric,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { kind: FailureKind::Config, message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self.kind {
            FailureKind::Io => 1,
            FailureKind::Config => 2,
            FailureKind::Numeric => 3,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<fadebound_core::Error> for Failure {
    fn from(e: fadebound_core::Error) -> Self {
        let kind = if e.is_config() { FailureKind::Config } else { FailureKind::Numeric };
        Failure { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { kind: FailureKind::Io, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        let kind = if e.is_io_error() { FailureKind::Io } else { FailureKind::Config };
        Failure { kind, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, Failure>;
