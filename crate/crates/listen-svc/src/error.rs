use sseval_core::audio::AudioError;
use sseval_core::protocol::ProtocolError;
use sseval_core::ratings::RatingsError;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no such endpoint")]
    NoRoute,
    #[error("unknown session")]
    UnknownSession,
    #[error("trial {0} does not exist")]
    UnknownTrial(usize),
    #[error("rater {0} already has a session")]
    SessionExists(String),
    #[error("no trials: no system provides audio for any manifest prompt")]
    EmptyTrialSet,
    #[error("trial {requested} requested, but the next trial is {cursor}")]
    OutOfOrder { requested: usize, cursor: usize },
    #[error("trial {0} was already rated")]
    Duplicate(usize),
    #[error("session is complete")]
    SessionComplete,
    #[error("{0}")]
    InvalidScores(ScoreProblem),
    #[error("invalid request: {0}")]
    BadRequest(String),
    #[error("missing or wrong bearer token")]
    Unauthorized,
    #[error("configuration: {0}")]
    Config(String),
    #[error("rating log line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error("storage: {0}")]
    Storage(#[from] std::io::Error),
    #[error("audio: {0}")]
    Audio(#[from] AudioError),
    #[error("manifest: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("export: {0}")]
    Export(#[from] RatingsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoreProblem {
    Missing(&'static str),
    Extra(String),
    NotInteger(String),
    OutOfRange(String, i64),
}

impl std::fmt::Display for ScoreProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Missing(k) => write!(f, "score {k} is required for this trial"),
            Self::Extra(k) => write!(f, "score {k} is not accepted for this trial"),
            Self::NotInteger(k) => write!(f, "score {k} must be an integer"),
            Self::OutOfRange(k, v) => write!(f, "score {k} = {v} is outside 0..=10"),
        }
    }
}

impl ServiceError {
    /// Stable machine-readable code for the JSON error body.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NoRoute => "not_found",
            Self::UnknownSession => "unknown_session",
            Self::UnknownTrial(_) => "unknown_trial",
            Self::SessionExists(_) => "session_exists",
            Self::EmptyTrialSet => "empty_trial_set",
            Self::OutOfOrder { .. } => "out_of_order",
            Self::Duplicate(_) => "duplicate_submission",
            Self::SessionComplete => "session_complete",
            Self::InvalidScores(p) => match p {
                ScoreProblem::Missing(_) => "missing_score",
                ScoreProblem::Extra(_) => "extra_score",
                ScoreProblem::NotInteger(_) => "score_not_integer",
                ScoreProblem::OutOfRange(..) => "score_out_of_range",
            },
            Self::BadRequest(_) => "bad_request",
            Self::Unauthorized => "unauthorized",
            Self::Config(_) => "config",
            Self::CorruptLog { .. } => "corrupt_log",
            Self::Storage(_) => "storage",
            Self::Audio(_) => "audio",
            Self::Protocol(_) => "manifest",
            Self::Export(_) => "export",
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            Self::NoRoute | Self::UnknownSession | Self::UnknownTrial(_) => 404,
            Self::SessionExists(_) | Self::OutOfOrder { .. } | Self::Duplicate(_) | Self::SessionComplete => 409,
            Self::InvalidScores(_) => 422,
            Self::BadRequest(_) | Self::EmptyTrialSet => 400,
            Self::Unauthorized => 401,
            _ => 500,
        }
    }
}
