//! Report documents and their flat CSV companions.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sseval_core::audio::ContractViolation;
use sseval_core::ratings::ScoreKind;
use sseval_core::{OutputContract, SystemScores};

use crate::budget::BudgetCheck;
use crate::error::CliError;

/// Bumped whenever a field of a report document changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Which slice of the prompts a FAD value covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    All,
    Dev,
    Eval,
}

impl SplitLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::All => "all",
            Self::Dev => "dev",
            Self::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadEntry {
    pub backend: String,
    pub dim: usize,
    pub split: SplitLabel,
    pub value: f64,
    pub n_eval: usize,
    pub n_ref: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileViolations {
    pub file: String,
    pub violations: Vec<ContractViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEntry {
    pub size: usize,
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system_id: String,
    pub n_files: usize,
    pub fad: Vec<FadEntry>,
    /// Dense rank by ascending FAD on the report's `ranking_split`; absent when scoring failed.
    pub rank_by_fad: Option<usize>,
    pub subjective: Option<SystemScores>,
    /// Dense rank by descending Final Rating.
    pub rank_by_final_rating: Option<usize>,
    pub contract_violations: Vec<FileViolations>,
    pub generation_seconds: Option<f64>,
    pub budget: Option<BudgetCheck>,
    pub bias_curve: Option<Vec<BiasEntry>>,
    pub notes: Vec<String>,
    /// Hard failure for this system; the others are still scored.
    pub error: Option<String>,
}

impl SystemReport {
    pub fn new(system_id: impl Into<String>) -> Self {
        Self {
            system_id: system_id.into(),
            n_files: 0,
            fad: Vec::new(),
            rank_by_fad: None,
            subjective: None,
            rank_by_final_rating: None,
            contract_violations: Vec::new(),
            generation_seconds: None,
            budget: None,
            bias_curve: None,
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn fad_value(&self, split: SplitLabel) -> Option<f64> {
        self.fad.iter().find(|f| f.split == split).map(|f| f.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub n_clips: usize,
    /// `"embeddings"` when read from an embedding file, `"audio"` when embedded here.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub schema_version: u32,
    pub seed: u64,
    pub backend: String,
    pub contract: OutputContract,
    pub reference: ReferenceInfo,
    pub ranking_split: SplitLabel,
    pub systems: Vec<SystemReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    pub value: Option<f64>,
    pub raters: usize,
    pub items: usize,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedScores {
    pub rank_by_final_rating: usize,
    pub scores: SystemScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectiveReport {
    pub schema_version: u32,
    pub n_records: usize,
    pub n_self_ratings_replaced: usize,
    pub systems: Vec<RankedScores>,
    pub alpha: BTreeMap<ScoreKind, AlphaEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub coefficient: f64,
    pub p_value: f64,
    pub n: usize,
    /// `p_value < 0.05`.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCorrelation {
    pub label: String,
    pub result: Option<Correlation>,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub schema_version: u32,
    pub ranking_split: SplitLabel,
    /// Systems present in both inputs, sorted by id.
    pub systems: Vec<String>,
    pub fad_rank_ascending: Vec<usize>,
    pub rating_rank_descending: Vec<usize>,
    /// FAD and Final Rating correlations; see the labels.
    pub fad_vs_rating: Vec<NamedCorrelation>,
    /// Pearson correlations among per-system fg, bg and quality means.
    pub score_dimensions: Vec<NamedCorrelation>,
    pub alpha: BTreeMap<ScoreKind, AlphaEntry>,
}

/// 1-based dense ranks. `ascending` puts the smallest value first; equal values share a rank.
pub fn dense_rank(values: &[f64], ascending: bool) -> Vec<usize> {
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| if ascending { a.total_cmp(b) } else { b.total_cmp(a) });
    distinct.dedup_by(|a, b| a == b);
    values
        .iter()
        .map(|v| distinct.iter().position(|d| d == v).map_or(0, |p| p + 1))
        .collect()
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report values serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(doc: &T, path: &Path) -> Result<(), CliError> {
    fs::write(path, to_json(doc)).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Report {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    match v.get("schema_version").and_then(|s| s.as_u64()) {
        Some(n) if n == u64::from(SCHEMA_VERSION) => {}
        other => {
            return Err(CliError::Report {
                path: path.to_owned(),
                message: format!("schema_version {other:?}, expected {SCHEMA_VERSION}"),
            })
        }
    }
    serde_json::from_value(v).map_err(|e| CliError::Report {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let report = |e: csv::Error| CliError::Report {
        path: path.to_owned(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(report)?;
    w.write_record(header).map_err(report)?;
    for row in rows {
        w.write_record(&row).map_err(report)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `fad.csv`, `contract_violations.csv` and, when any curve exists, `bias_curves.csv`.
pub fn write_objective_csvs(report: &ObjectiveReport, dir: &Path) -> Result<(), CliError> {
    write_csv(
        &dir.join("fad.csv"),
        &["system_id", "backend", "split", "fad", "n_eval", "n_ref", "rank_by_fad"],
        report.systems.iter().flat_map(|s| {
            s.fad.iter().map(|f| {
                vec![
                    s.system_id.clone(),
                    f.backend.clone(),
                    f.split.as_str().to_owned(),
                    f.value.to_string(),
                    f.n_eval.to_string(),
                    f.n_ref.to_string(),
                    opt(s.rank_by_fad),
                ]
            })
        }),
    )?;
    write_csv(
        &dir.join("contract_violations.csv"),
        &["system_id", "file", "violation"],
        report.systems.iter().flat_map(|s| {
            s.contract_violations.iter().flat_map(move |fv| {
                fv.violations
                    .iter()
                    .map(move |v| vec![s.system_id.clone(), fv.file.clone(), v.to_string()])
            })
        }),
    )?;
    if report.systems.iter().any(|s| s.bias_curve.is_some()) {
        write_bias_csv(report, &dir.join("bias_curves.csv"))?;
    }
    Ok(())
}

pub fn write_bias_csv(report: &ObjectiveReport, path: &Path) -> Result<(), CliError> {
    write_csv(
        path,
        &["system_id", "size", "mean", "std", "repeats"],
        report.systems.iter().flat_map(|s| {
            s.bias_curve.iter().flatten().map(|p| {
                vec![
                    s.system_id.clone(),
                    p.size.to_string(),
                    p.mean.to_string(),
                    p.std.to_string(),
                    p.values.len().to_string(),
                ]
            })
        }),
    )
}

/// `final_ratings.csv` and `per_category.csv`.
pub fn write_subjective_csvs(report: &SubjectiveReport, dir: &Path) -> Result<(), CliError> {
    write_csv(
        &dir.join("final_ratings.csv"),
        &[
            "system_id",
            "rank_by_final_rating",
            "final_rating",
            "foreground_mean",
            "foreground_std_err",
            "background_mean",
            "background_std_err",
            "quality_mean",
            "quality_std_err",
        ],
        report.systems.iter().map(|r| {
            let s = &r.scores;
            vec![
                s.system_id.clone(),
                r.rank_by_final_rating.to_string(),
                s.final_rating.to_string(),
                s.foreground.mean.to_string(),
                s.foreground.std_err.to_string(),
                opt(s.background.map(|b| b.mean)),
                opt(s.background.map(|b| b.std_err)),
                s.quality.mean.to_string(),
                s.quality.std_err.to_string(),
            ]
        }),
    )?;

    let mut rows = Vec::new();
    for r in &report.systems {
        let s = &r.scores;
        let groups = s
            .per_foreground
            .iter()
            .map(|(c, v)| ("foreground", c.as_str(), v))
            .chain(s.per_background.iter().map(|(c, v)| ("background", c.as_str(), v)));
        for (axis, cat, v) in groups {
            rows.push(vec![
                s.system_id.clone(),
                axis.to_owned(),
                cat.to_owned(),
                v.foreground.mean.to_string(),
                v.foreground.std_err.to_string(),
                opt(v.background.map(|b| b.mean)),
                opt(v.background.map(|b| b.std_err)),
                v.quality.mean.to_string(),
                v.quality.std_err.to_string(),
                v.quality.n.to_string(),
            ]);
        }
    }
    write_csv(
        &dir.join("per_category.csv"),
        &[
            "system_id",
            "axis",
            "category",
            "foreground_mean",
            "foreground_std_err",
            "background_mean",
            "background_std_err",
            "quality_mean",
            "quality_std_err",
            "n",
        ],
        rows,
    )
}
