use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sseval_core::embed::{external_runner_backend, EmbeddingBackend, EmbeddingBackendId, MockBackend, DEFAULT_TIMEOUT};
use sseval_core::OutputContract;

use crate::budget::BudgetLimits;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    External,
}

/// `[backend]` table. `external` needs `command`, `name` and `dim`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    #[serde(default)]
    pub kind: BackendKind,
    /// Runner template with `{in}` and `{out}` placeholders.
    pub command: Option<String>,
    pub name: Option<String>,
    pub dim: Option<usize>,
    /// Rate clips are resampled to before embedding. The mock backend defaults to 32000.
    pub sample_rate: Option<u32>,
    pub timeout_s: Option<u64>,
}

pub const MOCK_DEFAULT_RATE: u32 = 32_000;

impl BackendConfig {
    pub fn build(&self) -> Result<Box<dyn EmbeddingBackend>, CliError> {
        match self.kind {
            BackendKind::Mock => Ok(Box::new(MockBackend::new(Some(self.sample_rate.unwrap_or(MOCK_DEFAULT_RATE))))),
            BackendKind::External => {
                let need = |what: &str| CliError::Usage(format!("external backend needs backend.{what}"));
                let command = self.command.as_deref().ok_or_else(|| need("command"))?;
                let name = self.name.clone().ok_or_else(|| need("name"))?;
                let dim = self.dim.ok_or_else(|| need("dim"))?;
                let id = EmbeddingBackendId::new(name, dim, self.sample_rate)?;
                let timeout = self.timeout_s.map_or(DEFAULT_TIMEOUT, Duration::from_secs);
                Ok(Box::new(external_runner_backend(command, id, timeout)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub duration_s: Option<f64>,
    pub sample_rate: Option<u32>,
    pub tolerance_samples: Option<usize>,
}

/// Keys of the TOML config file. Every key is optional; command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub reference: Option<PathBuf>,
    pub systems: Option<Vec<PathBuf>>,
    pub backend: Option<BackendConfig>,
    pub embeddings_dir: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub subsample_sizes: Option<Vec<usize>>,
    pub repeats: Option<usize>,
    pub contract: Option<ContractConfig>,
    pub budget: Option<BudgetLimits>,
    /// Generation wall-clock seconds per system id.
    pub generation_seconds: Option<BTreeMap<String, f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut cfg.reference,
            &mut cfg.embeddings_dir,
            &mut cfg.ratings,
            &mut cfg.manifest,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        cfg.systems.iter_mut().flatten().for_each(fix);
        Ok(cfg)
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPEATS: usize = 10;

/// Fully resolved run settings.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub reference: Option<PathBuf>,
    pub systems: Vec<PathBuf>,
    pub backend: BackendConfig,
    pub embeddings_dir: Option<PathBuf>,
    pub ratings: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub subsample_sizes: Vec<usize>,
    pub repeats: usize,
    pub contract: OutputContract,
    pub budget: BudgetLimits,
    pub generation_seconds: BTreeMap<String, f64>,
}

impl Settings {
    pub fn from_file(cfg: FileConfig) -> Result<Self, CliError> {
        let defaults = OutputContract::default();
        let contract = match cfg.contract {
            None => defaults,
            Some(c) => OutputContract::new(
                c.duration_s.unwrap_or(defaults.duration_s),
                c.sample_rate.unwrap_or(defaults.sample_rate),
                c.tolerance_samples.unwrap_or(defaults.tolerance_samples),
            )?,
        };
        Ok(Self {
            reference: cfg.reference,
            systems: cfg.systems.unwrap_or_default(),
            backend: cfg.backend.unwrap_or_default(),
            embeddings_dir: cfg.embeddings_dir,
            ratings: cfg.ratings,
            manifest: cfg.manifest,
            out: cfg.out,
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
            subsample_sizes: cfg.subsample_sizes.unwrap_or_default(),
            repeats: cfg.repeats.unwrap_or(DEFAULT_REPEATS),
            contract,
            budget: cfg.budget.unwrap_or_default(),
            generation_seconds: cfg.generation_seconds.unwrap_or_default(),
        })
    }

    pub fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("--{flag} is required (or set it in the config file)")))
    }
}
