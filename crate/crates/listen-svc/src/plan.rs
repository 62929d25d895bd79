use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sseval_core::ForegroundCategory;

use crate::study::{Study, TrialKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Fit,
    Quality,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Fit => "fit",
            Phase::Quality => "quality",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedTrial {
    pub index: usize,
    pub key: TrialKey,
    pub phase: Phase,
}

/// Contiguous run of fit-phase trials sharing a foreground category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub category: ForegroundCategory,
    pub start: usize,
    pub end: usize,
}

/// Fit phase (sectioned by foreground category) followed by the quality phase
/// (one global shuffle of the same audio).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPlan {
    pub rater_id: String,
    pub trials: Vec<PlannedTrial>,
    pub sections: Vec<Section>,
}

impl TestPlan {
    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn fit_len(&self) -> usize {
        self.trials.iter().filter(|t| t.phase == Phase::Fit).count()
    }

    pub fn section_of(&self, index: usize) -> Option<usize> {
        self.sections.iter().position(|s| (s.start..s.end).contains(&index))
    }

    /// Index of the other-phase trial with the same audio.
    pub fn counterpart(&self, index: usize) -> Option<usize> {
        let t = self.trials.get(index)?;
        self.trials.iter().position(|o| o.key == t.key && o.phase != t.phase)
    }

    /// Hex SHA-256 over the trial sequence; detects schedule drift after a config change.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.trials {
            for part in [t.key.system_id.as_str(), t.key.prompt_id.as_str(), t.phase.as_str()] {
                h.update((part.len() as u64).to_le_bytes());
                h.update(part.as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Generator seeded by SHA-256 of the seed and length-prefixed key parts.
pub fn keyed_rng(seed: u64, parts: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub fn build_plan(study: &Study, rater_id: &str) -> TestPlan {
    let seed = study.seed();
    let mut by_category: BTreeMap<ForegroundCategory, Vec<TrialKey>> = BTreeMap::new();
    for key in study.trials() {
        let cat = study
            .prompt(&key.prompt_id)
            .map(|p| p.foreground_category)
            .expect("study trials reference manifest prompts");
        by_category.entry(cat).or_default().push(key.clone());
    }

    let mut order: Vec<ForegroundCategory> = by_category.keys().copied().collect();
    order.shuffle(&mut keyed_rng(seed, &[rater_id, "fit", "sections"]));

    let mut trials = Vec::with_capacity(2 * study.n_trials());
    let mut sections = Vec::with_capacity(order.len());
    for cat in order {
        let mut keys = by_category.remove(&cat).unwrap_or_default();
        keys.shuffle(&mut keyed_rng(seed, &[rater_id, "fit", cat.as_str()]));
        let start = trials.len();
        trials.extend(keys.into_iter().map(|key| PlannedTrial {
            index: 0,
            key,
            phase: Phase::Fit,
        }));
        sections.push(Section {
            category: cat,
            start,
            end: trials.len(),
        });
    }

    let mut quality: Vec<TrialKey> = study.trials().cloned().collect();
    quality.shuffle(&mut keyed_rng(seed, &[rater_id, "quality", "all"]));
    trials.extend(quality.into_iter().map(|key| PlannedTrial {
        index: 0,
        key,
        phase: Phase::Quality,
    }));
    for (i, t) in trials.iter_mut().enumerate() {
        t.index = i;
    }
    TestPlan {
        rater_id: rater_id.to_owned(),
        trials,
        sections,
    }
}
