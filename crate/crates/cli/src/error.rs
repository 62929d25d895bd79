use std::path::PathBuf;

use sseval_core::audio::AudioError;
use sseval_core::embed::EmbedError;
use sseval_core::ratings::RatingsError;
use sseval_core::{FadError, ProtocolError, StatsError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("report {}: {message}", path.display())]
    Report { path: PathBuf, message: String },
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Fad(#[from] FadError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Ratings(#[from] RatingsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for rejected input data (manifest rules, rating CSV content, budget), 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Protocol(e) if !matches!(e, ProtocolError::Io(_)) => 2,
            Self::Ratings(
                RatingsError::Csv { .. }
                | RatingsError::ScoreOutOfRange { .. }
                | RatingsError::DuplicateRecord { .. }
                | RatingsError::UnknownPrompt(_)
                | RatingsError::NoOtherSystems { .. },
            ) => 2,
            _ => 1,
        }
    }
}
