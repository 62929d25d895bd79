use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{final_rating, final_rating_without_background, validate_records, RatingRecord, RatingsError};
use crate::protocol::{BackgroundCategory, DatasetManifest, ForegroundCategory};

/// Mean with standard error `s / √n` (sample std, `n − 1` divisor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
    /// Set when `n == 1`; `std_err` is then reported as 0.
    pub std_err_undefined: bool,
}

impl ScoreSummary {
    /// Values are sorted before summation so the result does not depend on input order.
    pub fn from_values(mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Self {
                mean,
                std_err: 0.0,
                n,
                std_err_undefined: true,
            });
        }
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let std = (ss / (n - 1) as f64).sqrt();
        Some(Self {
            mean,
            std_err: std / (n as f64).sqrt(),
            n,
            std_err_undefined: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScores {
    pub foreground: ScoreSummary,
    pub background: Option<ScoreSummary>,
    pub quality: ScoreSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemScores {
    pub system_id: String,
    pub foreground: ScoreSummary,
    /// `None` when the system was only rated on prompts without a background.
    pub background: Option<ScoreSummary>,
    pub quality: ScoreSummary,
    pub final_rating: f64,
    pub per_foreground: BTreeMap<ForegroundCategory, CategoryScores>,
    pub per_background: BTreeMap<BackgroundCategory, CategoryScores>,
}

impl SystemScores {
    pub fn mean_fg(&self) -> f64 {
        self.foreground.mean
    }

    pub fn mean_bg(&self) -> Option<f64> {
        self.background.map(|b| b.mean)
    }

    pub fn mean_quality(&self) -> f64 {
        self.quality.mean
    }
}

#[derive(Default)]
struct Bucket {
    fg: Vec<f64>,
    bg: Vec<f64>,
    q: Vec<f64>,
}

impl Bucket {
    fn push(&mut self, r: &RatingRecord, has_background: bool) {
        self.fg.push(r.foreground_fit);
        self.q.push(r.quality);
        if has_background {
            if let Some(b) = r.background_fit {
                self.bg.push(b);
            }
        }
    }

    fn summarize(self) -> Option<CategoryScores> {
        Some(CategoryScores {
            foreground: ScoreSummary::from_values(self.fg)?,
            background: ScoreSummary::from_values(self.bg),
            quality: ScoreSummary::from_values(self.q)?,
        })
    }
}

/// Per-system grand means, Final Rating and per-category summaries.
///
/// Background fit only counts on prompts whose manifest entry has a background.
/// Output is sorted by system id.
pub fn aggregate(records: &[RatingRecord], manifest: &DatasetManifest) -> Result<Vec<SystemScores>, RatingsError> {
    if records.is_empty() {
        return Err(RatingsError::NoRecords);
    }
    validate_records(records)?;
    let prompts = manifest.prompt_index();

    struct SystemBuckets {
        all: Bucket,
        fg: BTreeMap<ForegroundCategory, Bucket>,
        bg: BTreeMap<BackgroundCategory, Bucket>,
    }
    let mut systems: BTreeMap<&str, SystemBuckets> = BTreeMap::new();
    for r in records {
        let entry = prompts
            .get(r.prompt_id.as_str())
            .ok_or_else(|| RatingsError::UnknownPrompt(r.prompt_id.clone()))?;
        let p = &entry.prompt;
        let has_bg = p.has_background();
        let s = systems.entry(r.system_id.as_str()).or_insert_with(|| SystemBuckets {
            all: Bucket::default(),
            fg: BTreeMap::new(),
            bg: BTreeMap::new(),
        });
        s.all.push(r, has_bg);
        s.fg.entry(p.foreground_category).or_default().push(r, has_bg);
        s.bg.entry(p.background_category).or_default().push(r, has_bg);
    }

    systems
        .into_iter()
        .map(|(id, s)| {
            let overall = s.all.summarize().expect("system has at least one record");
            let final_rating = match overall.background {
                Some(bg) => final_rating(overall.foreground.mean, bg.mean, overall.quality.mean)?,
                None => final_rating_without_background(overall.foreground.mean, overall.quality.mean)?,
            };
            Ok(SystemScores {
                system_id: id.to_owned(),
                foreground: overall.foreground,
                background: overall.background,
                quality: overall.quality,
                final_rating,
                per_foreground: s.fg.into_iter().filter_map(|(k, b)| Some((k, b.summarize()?))).collect(),
                per_background: s.bg.into_iter().filter_map(|(k, b)| Some((k, b.summarize()?))).collect(),
            })
        })
        .collect()
}
