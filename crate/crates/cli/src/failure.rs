use std::fmt;
use std::process::ExitCode;

/// Error classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validation,
    Io,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Kind::Validation => 2,
            Kind::Io => 3,
            Kind::Internal => 4,
        })
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn invalid(message: impl fmt::Display) -> Failure {
    Failure { kind: Kind::Validation, error: anyhow::anyhow!("{message}") }
}

pub trait Classify<T> {
    fn or_kind(self, kind: Kind, context: impl fmt::Display) -> CmdResult<T>;

    fn or_invalid(self, context: impl fmt::Display) -> CmdResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Validation, context)
    }

    fn or_io(self, context: impl fmt::Display) -> CmdResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Io, context)
    }

    fn or_internal(self, context: impl fmt::Display) -> CmdResult<T>
    where
        Self: Sized,
    {
        self.or_kind(Kind::Internal, context)
    }
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn or_kind(self, kind: Kind, context: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| Failure { kind, error: anyhow::Error::new(e).context(context.to_string()) })
    }
}
