use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{pairing_allowed, BackgroundCategory, ForegroundCategory, PromptSpec, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Dev,
    Eval,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Dev => "dev",
            Split::Eval => "eval",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dev" => Ok(Split::Dev),
            "eval" => Ok(Split::Eval),
            other => Err(ProtocolError::UnknownSplit(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub prompt: PromptSpec,
    pub audio_path: String,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Self {
        Self { entries }
    }

    pub fn get(&self, prompt_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.prompt.prompt_id == prompt_id)
    }

    pub fn prompt_index(&self) -> BTreeMap<&str, &ManifestEntry> {
        self.entries.iter().map(|e| (e.prompt.prompt_id.as_str(), e)).collect()
    }
}

const HEADER: [&str; 7] = [
    "prompt_id",
    "foreground_text",
    "foreground_category",
    "background_category",
    "background_text",
    "split",
    "audio_path",
];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    prompt_id: String,
    foreground_text: String,
    foreground_category: String,
    background_category: String,
    background_text: String,
    split: String,
    audio_path: String,
}

/// Parses the manifest CSV. Category values are parsed but not validated
/// against the pairing rules; that is `validate_manifest`'s job.
pub fn read_manifest<R: Read>(source: R) -> Result<DatasetManifest, ProtocolError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| ProtocolError::Csv { row: 1, message: e.to_string() })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(ProtocolError::Csv {
            row: 1,
            message: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut entries = Vec::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let row = i as u64 + 2;
        let wrap = |e: ProtocolError| ProtocolError::Csv { row, message: e.to_string() };
        let r = rec.map_err(|e| ProtocolError::Csv { row, message: e.to_string() })?;
        entries.push(ManifestEntry {
            prompt: PromptSpec {
                prompt_id: r.prompt_id,
                foreground_text: r.foreground_text,
                foreground_category: r.foreground_category.parse().map_err(wrap)?,
                background_category: r.background_category.parse().map_err(wrap)?,
                background_text: r.background_text,
            },
            audio_path: r.audio_path,
            split: r.split.parse().map_err(wrap)?,
        });
    }
    Ok(DatasetManifest { entries })
}

pub fn read_manifest_file(path: &Path) -> Result<DatasetManifest, ProtocolError> {
    let f = std::fs::File::open(path).map_err(|e| ProtocolError::Io(format!("{}: {e}", path.display())))?;
    read_manifest(f)
}

pub fn write_manifest<W: Write>(manifest: &DatasetManifest, sink: W) -> Result<(), ProtocolError> {
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| ProtocolError::Io(e.to_string());
    for e in &manifest.entries {
        w.serialize(Row {
            prompt_id: e.prompt.prompt_id.clone(),
            foreground_text: e.prompt.foreground_text.clone(),
            foreground_category: e.prompt.foreground_category.to_string(),
            background_category: e.prompt.background_category.to_string(),
            background_text: e.prompt.background_text.clone(),
            split: e.split.to_string(),
            audio_path: e.audio_path.clone(),
        })
        .map_err(io)?;
    }
    if manifest.entries.is_empty() {
        w.write_record(HEADER).map_err(io)?;
    }
    w.flush().map_err(|e| ProtocolError::Io(e.to_string()))
}

/// Count targets; per-category targets are soft (warnings only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifestTargets {
    pub dev: usize,
    pub eval: usize,
    pub per_foreground: usize,
    pub per_background: usize,
    /// Relative deviation from a soft target that triggers a warning.
    pub soft_tolerance: f64,
}

impl Default for ManifestTargets {
    fn default() -> Self {
        Self {
            dev: 60,
            eval: 250,
            per_foreground: 50,
            per_background: 60,
            soft_tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifestFailure {
    SplitSize { split: Split, expected: usize, actual: usize },
    DevExcludedBackground { prompt_id: String, background: BackgroundCategory },
    ForbiddenPairing { prompt_id: String },
    BackgroundTextMismatch { prompt_id: String },
    EmptyForeground { prompt_id: String },
    DuplicatePromptId { prompt_id: String },
}

impl fmt::Display for ManifestFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SplitSize { split, expected, actual } => {
                write!(f, "{split} split has {actual} entries, expected {expected}")
            }
            Self::DevExcludedBackground { prompt_id, background } => {
                write!(f, "{prompt_id}: background {background} is not allowed in the dev split")
            }
            Self::ForbiddenPairing { prompt_id } => write!(f, "{prompt_id}: vehicle paired with traffic"),
            Self::BackgroundTextMismatch { prompt_id } => {
                write!(f, "{prompt_id}: background text inconsistent with background category")
            }
            Self::EmptyForeground { prompt_id } => write!(f, "{prompt_id}: empty foreground text"),
            Self::DuplicatePromptId { prompt_id } => write!(f, "duplicate prompt id {prompt_id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestWarning {
    pub category: String,
    pub target: usize,
    pub actual: usize,
}

impl fmt::Display for ManifestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "category {} has {} entries, target about {}", self.category, self.actual, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestReport {
    pub failures: Vec<ManifestFailure>,
    pub warnings: Vec<ManifestWarning>,
    pub dev_count: usize,
    pub eval_count: usize,
    pub foreground_counts: BTreeMap<ForegroundCategory, usize>,
    pub background_counts: BTreeMap<BackgroundCategory, usize>,
}

impl ManifestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const DEV_EXCLUDED: [BackgroundCategory; 2] = [BackgroundCategory::None, BackgroundCategory::Birds];

pub fn validate_manifest(manifest: &DatasetManifest, targets: &ManifestTargets) -> ManifestReport {
    let mut failures = Vec::new();
    let mut seen = HashSet::new();
    let mut fg_counts: BTreeMap<ForegroundCategory, usize> = ForegroundCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let mut bg_counts: BTreeMap<BackgroundCategory, usize> = BackgroundCategory::ALL.iter().map(|&c| (c, 0)).collect();
    let (mut dev, mut eval) = (0, 0);

    for e in &manifest.entries {
        let p = &e.prompt;
        let id = || p.prompt_id.clone();
        if !seen.insert(p.prompt_id.as_str()) {
            failures.push(ManifestFailure::DuplicatePromptId { prompt_id: id() });
        }
        if p.foreground_text.trim().is_empty() {
            failures.push(ManifestFailure::EmptyForeground { prompt_id: id() });
        }
        if !pairing_allowed(p.foreground_category, p.background_category) {
            failures.push(ManifestFailure::ForbiddenPairing { prompt_id: id() });
        }
        if (p.background_category == BackgroundCategory::None) != p.background_text.trim().is_empty() {
            failures.push(ManifestFailure::BackgroundTextMismatch { prompt_id: id() });
        }
        match e.split {
            Split::Dev => {
                dev += 1;
                if DEV_EXCLUDED.contains(&p.background_category) {
                    failures.push(ManifestFailure::DevExcludedBackground {
                        prompt_id: id(),
                        background: p.background_category,
                    });
                }
            }
            Split::Eval => eval += 1,
        }
        *fg_counts.entry(p.foreground_category).or_default() += 1;
        *bg_counts.entry(p.background_category).or_default() += 1;
    }

    for (split, expected, actual) in [(Split::Dev, targets.dev, dev), (Split::Eval, targets.eval, eval)] {
        if expected != actual {
            failures.push(ManifestFailure::SplitSize { split, expected, actual });
        }
    }

    let off_target = |target: usize, actual: usize| {
        (actual as f64 - target as f64).abs() > targets.soft_tolerance * target as f64
    };
    let mut warnings = Vec::new();
    for (&c, &n) in &fg_counts {
        if off_target(targets.per_foreground, n) {
            warnings.push(ManifestWarning {
                category: c.to_string(),
                target: targets.per_foreground,
                actual: n,
            });
        }
    }
    for (&c, &n) in &bg_counts {
        if off_target(targets.per_background, n) {
            warnings.push(ManifestWarning {
                category: c.to_string(),
                target: targets.per_background,
                actual: n,
            });
        }
    }

    ManifestReport {
        failures,
        warnings,
        dev_count: dev,
        eval_count: eval,
        foreground_counts: fg_counts,
        background_counts: bg_counts,
    }
}
