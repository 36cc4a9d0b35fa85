use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lower}, {upper}]: lower bound must be strictly below upper bound")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("shrink amount {alpha} exceeds half the interval diameter {half}")]
    EmptyShrunkInterval { alpha: f64, half: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("protocol violation: {0}")]
    Protocol(&'static str),

    #[error("invalid round range [{s}, {r}]: {reason}")]
    InvalidRounds { s: u64, r: u64, reason: &'static str },

    #[error("off time {toff} s leaves no WiFi airtime (must exceed c1 = {c1} s)")]
    NoAirtime { toff: f64, c1: f64 },

    #[error("batch too short: measured {what} throughput is zero")]
    BatchTooShort { what: String },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid-interval",
            Error::EmptyShrunkInterval { .. } => "empty-shrunk-interval",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Protocol(_) => "protocol",
            Error::InvalidRounds { .. } => "invalid-rounds",
            Error::NoAirtime { .. } => "no-airtime",
            Error::BatchTooShort { .. } => "batch-too-short",
            Error::Config { .. } => "config",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }

    /// True for errors caused by bad user input rather than a failure while running.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidInterval { .. }
                | Error::EmptyShrunkInterval { .. }
                | Error::InvalidParameter { .. }
        )
    }
}
