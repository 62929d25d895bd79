use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use sseval_core::protocol::DatasetManifest;
use sseval_core::PromptSpec;

use crate::config::SystemSource;
use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub system_id: String,
    pub prompt_id: String,
}

/// The fixed set of (system, prompt) audio every rater hears, plus the schedule seed.
#[derive(Debug, Clone)]
pub struct Study {
    prompts: BTreeMap<String, PromptSpec>,
    audio: BTreeMap<TrialKey, PathBuf>,
    seed: u64,
}

impl Study {
    pub fn new(manifest: &DatasetManifest, audio: BTreeMap<TrialKey, PathBuf>, seed: u64) -> Result<Self, ServiceError> {
        let prompts: BTreeMap<String, PromptSpec> = manifest
            .entries
            .iter()
            .map(|e| (e.prompt.prompt_id.clone(), e.prompt.clone()))
            .collect();
        for key in audio.keys() {
            let spec = prompts
                .get(&key.prompt_id)
                .ok_or_else(|| ServiceError::Config(format!("prompt {} is not in the manifest", key.prompt_id)))?;
            spec.validate()?;
        }
        if audio.is_empty() {
            return Err(ServiceError::EmptyTrialSet);
        }
        Ok(Self { prompts, audio, seed })
    }

    /// Collects `<dir>/<prompt_id>.wav` for every manifest prompt present in each system's directory.
    pub fn from_system_dirs(manifest: &DatasetManifest, systems: &[SystemSource], seed: u64) -> Result<Self, ServiceError> {
        let mut ids = BTreeSet::new();
        let mut audio = BTreeMap::new();
        for s in systems {
            if !ids.insert(s.id.as_str()) {
                return Err(ServiceError::Config(format!("duplicate system id {}", s.id)));
            }
            if !s.dir.is_dir() {
                return Err(ServiceError::Config(format!("{} is not a directory", s.dir.display())));
            }
            for e in &manifest.entries {
                let path = s.dir.join(format!("{}.wav", e.prompt.prompt_id));
                if path.is_file() {
                    audio.insert(
                        TrialKey {
                            system_id: s.id.clone(),
                            prompt_id: e.prompt.prompt_id.clone(),
                        },
                        path,
                    );
                }
            }
        }
        Self::new(manifest, audio, seed)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trials(&self) -> impl Iterator<Item = &TrialKey> {
        self.audio.keys()
    }

    pub fn n_trials(&self) -> usize {
        self.audio.len()
    }

    pub fn prompt(&self, prompt_id: &str) -> Option<&PromptSpec> {
        self.prompts.get(prompt_id)
    }

    pub fn audio_path(&self, key: &TrialKey) -> Option<&PathBuf> {
        self.audio.get(key)
    }
}
