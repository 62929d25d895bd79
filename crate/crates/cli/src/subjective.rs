use std::collections::BTreeMap;
use std::path::Path;

use sseval_core::protocol::read_manifest_file;
use sseval_core::ratings::{aggregate, cronbach_alpha, read_ratings_file, rater_item_matrix, replace_self_ratings, ScoreKind};
use sseval_core::{DatasetManifest, RatingRecord};

use crate::error::CliError;
use crate::report::{dense_rank, AlphaEntry, RankedScores, SubjectiveReport, SCHEMA_VERSION};

/// Cronbach's α per score kind, raters as items, over trials every rater scored.
pub fn alpha_by_kind(records: &[RatingRecord]) -> BTreeMap<ScoreKind, AlphaEntry> {
    [ScoreKind::Foreground, ScoreKind::Background, ScoreKind::Quality]
        .into_iter()
        .map(|kind| {
            let m = rater_item_matrix(records, kind);
            let entry = match cronbach_alpha::<f64>(&m.scores) {
                Ok(v) => AlphaEntry {
                    value: Some(v),
                    raters: m.raters.len(),
                    items: m.items.len(),
                    diagnostic: None,
                },
                Err(e) => AlphaEntry {
                    value: None,
                    raters: m.raters.len(),
                    items: m.items.len(),
                    diagnostic: Some(e.to_string()),
                },
            };
            (kind, entry)
        })
        .collect()
}

/// Self-rating replacement, aggregation and Final Rating ranking.
///
/// α is computed on the records as submitted, before replacement.
pub fn run_subjective_records(records: &[RatingRecord], manifest: &DatasetManifest) -> Result<SubjectiveReport, CliError> {
    let replaced = replace_self_ratings(records)?;
    let scores = aggregate(&replaced, manifest)?;
    let finals: Vec<f64> = scores.iter().map(|s| s.final_rating).collect();
    let systems = scores
        .into_iter()
        .zip(dense_rank(&finals, false))
        .map(|(scores, rank_by_final_rating)| RankedScores {
            rank_by_final_rating,
            scores,
        })
        .collect();
    Ok(SubjectiveReport {
        schema_version: SCHEMA_VERSION,
        n_records: records.len(),
        n_self_ratings_replaced: records.iter().filter(|r| r.is_self_rating()).count(),
        systems,
        alpha: alpha_by_kind(records),
    })
}

pub fn run_subjective(ratings: &Path, manifest: &Path) -> Result<SubjectiveReport, CliError> {
    let records = read_ratings_file(ratings)?;
    let manifest = read_manifest_file(manifest)?;
    run_subjective_records(&records, &manifest)
}
