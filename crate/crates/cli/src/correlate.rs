use sseval_core::stats::{pearson, spearman};
use sseval_core::CorrelationResult;

use crate::report::{
    dense_rank, Correlation, CorrelationReport, NamedCorrelation, ObjectiveReport, SubjectiveReport, SCHEMA_VERSION,
};

pub const SIGNIFICANCE: f64 = 0.05;

pub const RANK_ALIGNED: &str = "spearman(fad rank ascending, final rating rank descending)";
pub const RAW_SPEARMAN: &str = "spearman(fad, final rating) on raw values";
pub const RAW_PEARSON: &str = "pearson(fad, final rating) on raw values";

fn named(label: &str, result: Result<CorrelationResult, sseval_core::StatsError>) -> NamedCorrelation {
    match result {
        Ok(r) => NamedCorrelation {
            label: label.to_owned(),
            result: Some(Correlation {
                coefficient: r.coefficient,
                p_value: r.p_value,
                n: r.n,
                significant: r.p_value < SIGNIFICANCE,
            }),
            diagnostic: None,
        },
        Err(e) => NamedCorrelation {
            label: label.to_owned(),
            result: None,
            diagnostic: Some(e.to_string()),
        },
    }
}

/// Copies subjective scores and Final Rating ranks into the matching system reports.
pub fn attach_subjective(objective: &mut ObjectiveReport, subjective: &SubjectiveReport) {
    for s in &mut objective.systems {
        if let Some(r) = subjective.systems.iter().find(|r| r.scores.system_id == s.system_id) {
            s.subjective = Some(r.scores.clone());
            s.rank_by_final_rating = Some(r.rank_by_final_rating);
        }
    }
}

/// FAD/rating agreement over systems present in both reports, plus
/// correlations among the subjective score dimensions.
///
/// Ranks are recomputed over the common systems. Too few systems or constant
/// inputs yield a diagnostic instead of a value.
pub fn run_correlation(objective: &ObjectiveReport, subjective: &SubjectiveReport) -> CorrelationReport {
    let split = objective.ranking_split;
    let mut pairs: Vec<(String, f64, f64)> = objective
        .systems
        .iter()
        .filter_map(|s| {
            let fad = s.fad_value(split)?;
            let rated = subjective.systems.iter().find(|r| r.scores.system_id == s.system_id)?;
            Some((s.system_id.clone(), fad, rated.scores.final_rating))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));

    let fad: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let finals: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let fad_rank = dense_rank(&fad, true);
    let rating_rank = dense_rank(&finals, false);
    let as_f64 = |v: &[usize]| v.iter().map(|&r| r as f64).collect::<Vec<_>>();

    let fad_vs_rating = vec![
        named(RANK_ALIGNED, spearman(&as_f64(&fad_rank), &as_f64(&rating_rank))),
        named(RAW_SPEARMAN, spearman(&fad, &finals)),
        named(RAW_PEARSON, pearson(&fad, &finals)),
    ];

    let scores: Vec<_> = subjective.systems.iter().map(|r| &r.scores).collect();
    let fg: Vec<f64> = scores.iter().map(|s| s.mean_fg()).collect();
    let q: Vec<f64> = scores.iter().map(|s| s.mean_quality()).collect();
    let with_bg: Vec<_> = scores.iter().filter_map(|s| Some((s.mean_fg(), s.mean_bg()?, s.mean_quality()))).collect();
    let bg_fg: Vec<f64> = with_bg.iter().map(|t| t.0).collect();
    let bg: Vec<f64> = with_bg.iter().map(|t| t.1).collect();
    let bg_q: Vec<f64> = with_bg.iter().map(|t| t.2).collect();
    let score_dimensions = vec![
        named("pearson(foreground_fit, background_fit)", pearson(&bg_fg, &bg)),
        named("pearson(foreground_fit, quality)", pearson(&fg, &q)),
        named("pearson(background_fit, quality)", pearson(&bg, &bg_q)),
    ];

    CorrelationReport {
        schema_version: SCHEMA_VERSION,
        ranking_split: split,
        systems: pairs.into_iter().map(|p| p.0).collect(),
        fad_rank_ascending: fad_rank,
        rating_rank_descending: rating_rank,
        fad_vs_rating,
        score_dimensions,
        alpha: subjective.alpha.clone(),
    }
}
