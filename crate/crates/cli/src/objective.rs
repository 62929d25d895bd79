use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sseval_core::audio::{decode_wav_file, validate_contract};
use sseval_core::embed::{embed_clips, read_embeddings_file, EmbeddingBackend};
use sseval_core::fad::{fad, fad_bias_curve};
use sseval_core::{AudioClip, DatasetManifest, EmbeddingSet, Split};

use crate::budget::check_generation_budget;
use crate::config::Settings;
use crate::error::CliError;
use crate::report::{
    dense_rank, BiasEntry, FadEntry, FileViolations, ObjectiveReport, ReferenceInfo, SplitLabel, SystemReport,
    SCHEMA_VERSION,
};

/// File name of a cached reference embedding set inside the embeddings directory.
pub const REFERENCE_EMBEDDINGS: &str = "reference.aemb";

/// Fewest clips on each side for a per-split FAD.
pub const MIN_SPLIT_CLIPS: usize = 2;

/// System id of a directory: its final path component.
pub fn system_id(dir: &Path) -> String {
    dir.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

/// `.wav` files directly inside `dir`, sorted by path.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let is_wav = path
            .extension()
            .is_some_and(|x| x.eq_ignore_ascii_case("wav"));
        if is_wav && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn decode_dir(dir: &Path) -> Result<Vec<AudioClip>, CliError> {
    let files = list_wavs(dir)?;
    if files.is_empty() {
        return Err(CliError::Validation(format!("{} contains no .wav files", dir.display())));
    }
    files
        .iter()
        .map(|f| decode_wav_file(f).map_err(CliError::from))
        .collect()
}

fn cached_embeddings(settings: &Settings, name: &str) -> Option<PathBuf> {
    let path = settings.embeddings_dir.as_ref()?.join(name);
    path.is_file().then_some(path)
}

/// Reference embeddings from the cache, an `.aemb` file or a directory of WAVs.
pub fn load_reference(settings: &Settings, backend: &dyn EmbeddingBackend) -> Result<(EmbeddingSet, ReferenceInfo), CliError> {
    let from_file = |path: &Path| -> Result<_, CliError> {
        let set = read_embeddings_file(path)?;
        let info = ReferenceInfo {
            n_clips: set.len(),
            source: "embeddings".into(),
        };
        Ok((set, info))
    };
    if let Some(path) = cached_embeddings(settings, REFERENCE_EMBEDDINGS) {
        return from_file(&path);
    }
    let reference = Settings::require(&settings.reference, "reference")?;
    if reference.is_file() {
        return from_file(reference);
    }
    if !reference.is_dir() {
        return Err(CliError::Usage(format!("reference {} does not exist", reference.display())));
    }
    let clips = decode_dir(reference)?;
    let set = embed_clips(&clips, backend)?;
    let info = ReferenceInfo {
        n_clips: set.len(),
        source: "audio".into(),
    };
    Ok((set, info))
}

fn split_of(manifest: Option<&DatasetManifest>, split: Split) -> impl Fn(&str) -> bool + '_ {
    move |id| manifest.and_then(|m| m.get(id)).is_some_and(|e| e.split == split)
}

fn score_system(
    dir: &Path,
    settings: &Settings,
    backend: &dyn EmbeddingBackend,
    reference: &EmbeddingSet,
    manifest: Option<&DatasetManifest>,
    report: &mut SystemReport,
) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("system directory {} does not exist", dir.display())));
    }
    let files = list_wavs(dir)?;
    report.n_files = files.len();
    if let Some(&secs) = settings.generation_seconds.get(&report.system_id) {
        report.generation_seconds = Some(secs);
        report.budget = Some(check_generation_budget(files.len(), secs, &settings.budget));
    }
    if files.is_empty() {
        return Err(CliError::Validation(format!("{} contains no .wav files", dir.display())));
    }

    let cache = cached_embeddings(settings, &format!("{}.aemb", report.system_id));
    let mut clips = Vec::with_capacity(files.len());
    for f in &files {
        let clip = decode_wav_file(f)?;
        let check = validate_contract(&clip, &settings.contract);
        if !check.passed() {
            report.contract_violations.push(FileViolations {
                file: f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                violations: check.violations,
            });
        }
        if cache.is_none() {
            clips.push(clip);
        }
    }
    let set = match &cache {
        Some(path) => {
            report.notes.push("embeddings loaded from cache".into());
            read_embeddings_file(path)?
        }
        None => embed_clips(&clips, backend)?,
    };

    let mut push = |split: SplitLabel, eval: &EmbeddingSet, refr: &EmbeddingSet| -> Result<(), CliError> {
        let s = fad::<f64>(eval, refr)?;
        report.fad.push(FadEntry {
            backend: s.backend.name.clone(),
            dim: s.backend.dim,
            split,
            value: s.value,
            n_eval: s.n_eval,
            n_ref: s.n_ref,
        });
        Ok(())
    };
    push(SplitLabel::All, &set, reference)?;
    if manifest.is_some() {
        for (label, split) in [(SplitLabel::Dev, Split::Dev), (SplitLabel::Eval, Split::Eval)] {
            let keep = split_of(manifest, split);
            match (set.filter_ids(&keep), reference.filter_ids(&keep)) {
                (Some(e), Some(r)) if e.len() >= MIN_SPLIT_CLIPS && r.len() >= MIN_SPLIT_CLIPS => push(label, &e, &r)?,
                _ => report
                    .notes
                    .push(format!("{} split skipped: fewer than {MIN_SPLIT_CLIPS} clips on a side", label.as_str())),
            }
        }
    }

    if !settings.subsample_sizes.is_empty() {
        match fad_bias_curve::<f64>(&set, reference, &settings.subsample_sizes, settings.repeats, settings.seed) {
            Ok(points) => {
                report.bias_curve = Some(
                    points
                        .into_iter()
                        .map(|p| BiasEntry {
                            size: p.size,
                            mean: p.mean,
                            std: p.std,
                            values: p.values,
                        })
                        .collect(),
                )
            }
            Err(e) => report.notes.push(format!("bias curve skipped: {e}")),
        }
    }
    Ok(())
}

/// Split used for `rank_by_fad`: `eval` when every scored system has it, else `all`.
pub fn ranking_split(systems: &[SystemReport]) -> SplitLabel {
    let scored: Vec<_> = systems.iter().filter(|s| s.error.is_none()).collect();
    if !scored.is_empty() && scored.iter().all(|s| s.fad_value(SplitLabel::Eval).is_some()) {
        SplitLabel::Eval
    } else {
        SplitLabel::All
    }
}

/// Fills `rank_by_fad` over systems that have a value on `split`.
pub fn rank_by_fad(systems: &mut [SystemReport], split: SplitLabel) {
    let scored: Vec<(usize, f64)> = systems
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.fad_value(split).map(|v| (i, v)))
        .collect();
    let values: Vec<f64> = scored.iter().map(|&(_, v)| v).collect();
    for (&(i, _), rank) in scored.iter().zip(dense_rank(&values, true)) {
        systems[i].rank_by_fad = Some(rank);
    }
}

/// Decode, contract-check, embed and score every system against the reference.
///
/// Per-system failures land in that system's `error` field; only a missing or
/// unreadable reference aborts the run. Systems are reported in input order.
pub fn run_objective(settings: &Settings) -> Result<ObjectiveReport, CliError> {
    if settings.systems.is_empty() {
        return Err(CliError::Usage("no system directories given".into()));
    }
    let backend = settings.backend.build()?;
    let manifest = match &settings.manifest {
        Some(p) => Some(sseval_core::protocol::read_manifest_file(p)?),
        None => None,
    };
    let (reference, info) = load_reference(settings, backend.as_ref())?;

    let mut systems: Vec<SystemReport> = settings
        .systems
        .par_iter()
        .map(|dir| {
            let mut report = SystemReport::new(system_id(dir));
            if let Err(e) = score_system(dir, settings, backend.as_ref(), &reference, manifest.as_ref(), &mut report) {
                report.fad.clear();
                report.error = Some(e.to_string());
            }
            report
        })
        .collect();

    let split = ranking_split(&systems);
    rank_by_fad(&mut systems, split);
    Ok(ObjectiveReport {
        schema_version: SCHEMA_VERSION,
        seed: settings.seed,
        backend: backend.id().name.clone(),
        contract: settings.contract,
        reference: info,
        ranking_split: split,
        systems,
    })
}
