use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::ServiceError;

/// TOML service configuration. Relative paths resolve against the config file's directory.
///
/// ```toml
/// bind = "127.0.0.1:8080"
/// manifest = "manifest.csv"
/// seed = 7
/// export_token = "secret"
/// log_path = "ratings.log"
///
/// [[systems]]
/// id = "baseline"
/// dir = "audio/baseline"
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    pub manifest: PathBuf,
    pub seed: u64,
    pub export_token: String,
    pub log_path: PathBuf,
    /// Mixed into session ids so they cannot be derived from rater ids alone.
    #[serde(default)]
    pub session_secret: String,
    pub systems: Vec<SystemSource>,
}

/// A directory holding one `<prompt_id>.wav` per rated prompt.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSource {
    pub id: String,
    pub dir: PathBuf,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, ServiceError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        if cfg.export_token.is_empty() {
            return Err(ServiceError::Config("export_token must not be empty".into()));
        }
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.manifest);
        resolve(&mut cfg.log_path);
        for s in &mut cfg.systems {
            resolve(&mut s.dir);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
