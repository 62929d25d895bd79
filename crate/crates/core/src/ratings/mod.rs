//! Subjective ratings: storage format, self-rating replacement, the weighted
//! Final Rating, per-category aggregation and Cronbach's α.

mod aggregate;
mod alpha;
mod io;

pub use aggregate::{aggregate, CategoryScores, ScoreSummary, SystemScores};
pub use alpha::{cronbach_alpha, rater_item_matrix, RaterItemMatrix};
pub use io::{read_ratings, read_ratings_file, write_ratings};

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

/// Inclusive score range of every rating scale.
pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 10.0;

/// Final Rating weights for foreground fit, background fit and quality.
pub const FINAL_WEIGHTS: (f64, f64, f64) = (2.0, 1.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatingsError {
    #[error("ratings row {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("{field} score {value} outside [0, 10]")]
    ScoreOutOfRange { field: &'static str, value: f64 },
    #[error("duplicate rating by {rater_id} of {system_id}/{prompt_id}")]
    DuplicateRecord {
        rater_id: String,
        system_id: String,
        prompt_id: String,
    },
    #[error("rater {rater_id} rated their own system on {prompt_id} but no other system's {kind}")]
    NoOtherSystems {
        rater_id: String,
        prompt_id: String,
        kind: ScoreKind,
    },
    #[error("prompt {0} is not in the manifest")]
    UnknownPrompt(String),
    #[error("no rating records")]
    NoRecords,
    #[error("need at least 2 raters and 2 items, got {raters}x{items}")]
    MatrixTooSmall { raters: usize, items: usize },
    #[error("rating matrix has a missing cell at rater {rater}, item {item}")]
    MissingCell { rater: usize, item: usize },
    #[error("summed scores have zero variance")]
    ZeroTotalVariance,
    #[error("ratings I/O: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Foreground,
    Background,
    Quality,
}

impl std::fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScoreKind::Foreground => "foreground_fit",
            ScoreKind::Background => "background_fit",
            ScoreKind::Quality => "quality",
        })
    }
}

/// One rater's scores of one system's audio for one prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater_id: String,
    /// Team or system id of the rater, or `"organizer"`.
    pub rater_affiliation: String,
    pub system_id: String,
    pub prompt_id: String,
    pub foreground_fit: f64,
    /// Absent for prompts without a background.
    pub background_fit: Option<f64>,
    pub quality: f64,
}

impl RatingRecord {
    pub fn is_self_rating(&self) -> bool {
        self.rater_affiliation == self.system_id
    }

    pub fn score(&self, kind: ScoreKind) -> Option<f64> {
        match kind {
            ScoreKind::Foreground => Some(self.foreground_fit),
            ScoreKind::Background => self.background_fit,
            ScoreKind::Quality => Some(self.quality),
        }
    }

    fn set_score(&mut self, kind: ScoreKind, v: f64) {
        match kind {
            ScoreKind::Foreground => self.foreground_fit = v,
            ScoreKind::Background => self.background_fit = Some(v),
            ScoreKind::Quality => self.quality = v,
        }
    }

    pub fn validate(&self) -> Result<(), RatingsError> {
        check_score("foreground_fit", self.foreground_fit)?;
        if let Some(bg) = self.background_fit {
            check_score("background_fit", bg)?;
        }
        check_score("quality", self.quality)
    }
}

fn check_score(field: &'static str, value: f64) -> Result<(), RatingsError> {
    if (SCORE_MIN..=SCORE_MAX).contains(&value) {
        Ok(())
    } else {
        Err(RatingsError::ScoreOutOfRange { field, value })
    }
}

/// Ranges and `(rater, system, prompt)` uniqueness.
pub fn validate_records(records: &[RatingRecord]) -> Result<(), RatingsError> {
    let mut seen = HashSet::with_capacity(records.len());
    for r in records {
        r.validate()?;
        if !seen.insert((&r.rater_id, &r.system_id, &r.prompt_id)) {
            return Err(RatingsError::DuplicateRecord {
                rater_id: r.rater_id.clone(),
                system_id: r.system_id.clone(),
                prompt_id: r.prompt_id.clone(),
            });
        }
    }
    Ok(())
}

/// Replaces each score of a self-rating with the mean of the same rater's
/// same-kind scores of every other system on that prompt. Other records pass
/// through unchanged; order and length are preserved.
pub fn replace_self_ratings(records: &[RatingRecord]) -> Result<Vec<RatingRecord>, RatingsError> {
    validate_records(records)?;
    // (rater, prompt) -> indices of that rater's records on the prompt
    let mut by_rater_prompt: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_rater_prompt
            .entry((r.rater_id.as_str(), r.prompt_id.as_str()))
            .or_default()
            .push(i);
    }

    let mut out = records.to_vec();
    for (i, rec) in records.iter().enumerate() {
        if !rec.is_self_rating() {
            continue;
        }
        let peers = &by_rater_prompt[&(rec.rater_id.as_str(), rec.prompt_id.as_str())];
        for kind in [ScoreKind::Foreground, ScoreKind::Background, ScoreKind::Quality] {
            if rec.score(kind).is_none() {
                continue;
            }
            let mut others: Vec<f64> = peers
                .iter()
                .filter(|&&j| records[j].system_id != rec.system_id)
                .filter_map(|&j| records[j].score(kind))
                .collect();
            if others.is_empty() {
                return Err(RatingsError::NoOtherSystems {
                    rater_id: rec.rater_id.clone(),
                    prompt_id: rec.prompt_id.clone(),
                    kind,
                });
            }
            others.sort_by(f64::total_cmp);
            let mean = others.iter().sum::<f64>() / others.len() as f64;
            out[i].set_score(kind, mean);
        }
    }
    Ok(out)
}

/// `(2·fg + bg + quality) / 4`.
pub fn final_rating(mean_fg: f64, mean_bg: f64, mean_quality: f64) -> Result<f64, RatingsError> {
    check_score("foreground_fit", mean_fg)?;
    check_score("background_fit", mean_bg)?;
    check_score("quality", mean_quality)?;
    let (wf, wb, wq) = FINAL_WEIGHTS;
    Ok((wf * mean_fg + wb * mean_bg + wq * mean_quality) / (wf + wb + wq))
}

/// Final Rating for a system rated only on prompts without a background:
/// the background weight is dropped, `(2·fg + quality) / 3`.
pub fn final_rating_without_background(mean_fg: f64, mean_quality: f64) -> Result<f64, RatingsError> {
    check_score("foreground_fit", mean_fg)?;
    check_score("quality", mean_quality)?;
    let (wf, _, wq) = FINAL_WEIGHTS;
    Ok((wf * mean_fg + wq * mean_quality) / (wf + wq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    pub(crate) fn rec(rater: &str, aff: &str, sys: &str, prompt: &str, fg: f64, bg: Option<f64>, q: f64) -> RatingRecord {
        RatingRecord {
            rater_id: rater.into(),
            rater_affiliation: aff.into(),
            system_id: sys.into(),
            prompt_id: prompt.into(),
            foreground_fit: fg,
            background_fit: bg,
            quality: q,
        }
    }

    #[test]
    fn self_rating_becomes_mean_of_other_systems() {
        let records = vec![
            rec("T1", "sysA", "sysA", "p", 9.0, Some(9.0), 9.0),
            rec("T1", "sysA", "sysB", "p", 4.0, Some(2.0), 7.0),
            rec("T1", "sysA", "sysC", "p", 6.0, Some(3.0), 8.0),
            rec("O1", "organizer", "sysA", "p", 9.0, Some(9.0), 9.0),
        ];
        let out = replace_self_ratings(&records).unwrap();
        assert_eq!(out[0].foreground_fit, 5.0);
        assert_eq!(out[0].background_fit, Some(2.5));
        assert_eq!(out[0].quality, 7.5);
        assert_eq!(&out[1..], &records[1..]);
    }

    #[test]
    fn other_prompts_do_not_leak_into_the_mean() {
        let records = vec![
            rec("T1", "sysA", "sysA", "p", 9.0, None, 9.0),
            rec("T1", "sysA", "sysB", "p", 4.0, None, 4.0),
            rec("T1", "sysA", "sysB", "q", 0.0, None, 0.0),
            rec("T1", "sysA", "sysA", "q", 10.0, None, 10.0),
        ];
        let out = replace_self_ratings(&records).unwrap();
        assert_eq!(out[0].foreground_fit, 4.0);
        assert_eq!(out[3].foreground_fit, 0.0);
    }

    #[test]
    fn lone_self_rating_is_an_error() {
        let records = vec![rec("T1", "sysA", "sysA", "p", 9.0, None, 9.0)];
        assert!(matches!(
            replace_self_ratings(&records),
            Err(RatingsError::NoOtherSystems { kind: ScoreKind::Foreground, .. })
        ));
    }

    #[test]
    fn duplicates_and_ranges_rejected() {
        let a = rec("r", "organizer", "s", "p", 5.0, None, 5.0);
        assert!(matches!(
            replace_self_ratings(&[a.clone(), a.clone()]),
            Err(RatingsError::DuplicateRecord { .. })
        ));
        let mut b = a;
        b.quality = 10.5;
        assert!(matches!(
            replace_self_ratings(&[b]),
            Err(RatingsError::ScoreOutOfRange { field: "quality", .. })
        ));
    }

    #[test]
    fn final_rating_values() {
        assert_eq!(final_rating(10.0, 10.0, 10.0).unwrap(), 10.0);
        assert_eq!(final_rating(8.0, 4.0, 4.0).unwrap(), 6.0);
        assert_abs_diff_eq!(final_rating(3.3, 2.8, 3.8).unwrap(), 3.3, epsilon = 1e-12);
        assert!(final_rating(11.0, 0.0, 0.0).is_err());
        assert!(final_rating(5.0, -0.1, 0.0).is_err());
        assert_eq!(final_rating_without_background(6.0, 9.0).unwrap(), 7.0);
    }

    proptest! {
        #[test]
        fn final_rating_is_monotone_and_idempotent(
            x in 0.0f64..=10.0, fg in 0.0f64..=10.0, bg in 0.0f64..=10.0, q in 0.0f64..=10.0, bump in 0.0f64..=1.0,
        ) {
            prop_assert!((final_rating(x, x, x).unwrap() - x).abs() < 1e-12);
            let base = final_rating(fg, bg, q).unwrap();
            prop_assert!(final_rating((fg + bump).min(10.0), bg, q).unwrap() >= base);
            prop_assert!(final_rating(fg, (bg + bump).min(10.0), q).unwrap() >= base);
            prop_assert!(final_rating(fg, bg, (q + bump).min(10.0)).unwrap() >= base);
        }

        #[test]
        fn replacement_touches_only_self_ratings(
            scores in prop::collection::vec((0u8..=10, 0u8..=10, 0u8..=10), 12),
        ) {
            // two contestants and one organizer, 3 systems × 4 prompts each
            let systems = ["sysA", "sysB", "sysC"];
            let mut records = Vec::new();
            for (rater, aff) in [("T1", "sysA"), ("T2", "sysB"), ("O1", "organizer")] {
                for (k, &(f, b, q)) in scores.iter().enumerate() {
                    records.push(rec(rater, aff, systems[k % 3], &format!("p{}", k / 3),
                        f64::from(f), Some(f64::from(b)), f64::from(q)));
                }
            }
            let out = replace_self_ratings(&records).unwrap();
            prop_assert_eq!(out.len(), records.len());
            for (before, after) in records.iter().zip(&out) {
                prop_assert_eq!(&before.rater_id, &after.rater_id);
                prop_assert_eq!(&before.prompt_id, &after.prompt_id);
                if !before.is_self_rating() {
                    prop_assert_eq!(before, after);
                    continue;
                }
                let others: Vec<&RatingRecord> = records.iter()
                    .filter(|r| r.rater_id == before.rater_id && r.prompt_id == before.prompt_id && r.system_id != before.system_id)
                    .collect();
                let mut fg: Vec<f64> = others.iter().map(|r| r.foreground_fit).collect();
                fg.sort_by(f64::total_cmp);
                prop_assert_eq!(after.foreground_fit, fg.iter().sum::<f64>() / fg.len() as f64);
            }
        }
    }
}
