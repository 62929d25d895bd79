//! Two-phase blind listening-test service.
//!
//! Each rater gets a deterministic schedule: a fit phase grouped into
//! foreground-category sections, then a quality phase over the same audio in
//! one shuffle with prompts withheld. Submissions go to an fsynced append-only
//! log that is replayed on startup; the ratings CSV is derived from it.

pub mod config;
pub mod error;
pub mod http;
pub mod plan;
pub mod service;
pub mod store;
pub mod study;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{ServiceConfig, SystemSource};
pub use error::{ScoreProblem, ServiceError};
pub use http::router;
pub use plan::{build_plan, Phase, PlannedTrial, Section, TestPlan};
pub use service::{Ack, RatingRequest, Service, SessionInfo, TrialPayload};
pub use study::{Study, TrialKey};

/// Score kinds a trial can ask for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreName {
    Foreground,
    Background,
    Quality,
}

impl ScoreName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreName::Foreground => "foreground",
            ScoreName::Background => "background",
            ScoreName::Quality => "quality",
        }
    }
}

impl FromStr for ScoreName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "foreground" => Ok(ScoreName::Foreground),
            "background" => Ok(ScoreName::Background),
            "quality" => Ok(ScoreName::Quality),
            _ => Err(()),
        }
    }
}

/// Builds the service from a loaded configuration, replaying its log.
pub fn service_from_config(cfg: &ServiceConfig) -> Result<Service, ServiceError> {
    let manifest = sseval_core::protocol::read_manifest_file(&cfg.manifest)?;
    let study = Study::from_system_dirs(&manifest, &cfg.systems, cfg.seed)?;
    Service::open(study, &cfg.log_path, &cfg.export_token, &cfg.session_secret)
}
