use std::collections::{BTreeMap, BTreeSet};

use super::{RatingRecord, RatingsError, ScoreKind};
use crate::scalar::Scalar;

/// Cronbach's α with raters as instrument items and rated trials as observations:
///
/// ```text
/// α = k / (k − 1) · (1 − Σᵢ var(rater i) / var(Σᵢ rater i))
/// ```
///
/// `scores[i][j]` is rater `i`'s score of trial `j`; variances use `n − 1`.
/// Non-finite cells count as missing.
pub fn cronbach_alpha<T: Scalar>(scores: &[Vec<T>]) -> Result<T, RatingsError> {
    let k = scores.len();
    let n = scores.first().map_or(0, Vec::len);
    if k < 2 || n < 2 {
        return Err(RatingsError::MatrixTooSmall { raters: k, items: n });
    }
    for (i, row) in scores.iter().enumerate() {
        if row.len() != n {
            return Err(RatingsError::MissingCell {
                rater: i,
                item: row.len().min(n),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(RatingsError::MissingCell { rater: i, item: j });
        }
    }
    let rater_var_sum: T = scores.iter().map(|r| sample_variance(r)).sum();
    let totals: Vec<T> = (0..n).map(|j| scores.iter().map(|r| r[j]).sum()).collect();
    let total_var = sample_variance(&totals);
    if total_var == T::zero() {
        return Err(RatingsError::ZeroTotalVariance);
    }
    let kt = T::from_usize_lossy(k);
    Ok(kt / (kt - T::one()) * (T::one() - rater_var_sum / total_var))
}

fn sample_variance<T: Scalar>(xs: &[T]) -> T {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (n - T::one())
}

/// Raters × trials matrix of one score kind, restricted to trials every
/// included rater scored.
#[derive(Debug, Clone, PartialEq)]
pub struct RaterItemMatrix {
    pub raters: Vec<String>,
    /// `(system_id, prompt_id)` per column.
    pub items: Vec<(String, String)>,
    pub scores: Vec<Vec<f64>>,
}

pub fn rater_item_matrix(records: &[RatingRecord], kind: ScoreKind) -> RaterItemMatrix {
    let mut cells: BTreeMap<&str, BTreeMap<(&str, &str), f64>> = BTreeMap::new();
    for r in records {
        if let Some(v) = r.score(kind) {
            cells
                .entry(r.rater_id.as_str())
                .or_default()
                .insert((r.system_id.as_str(), r.prompt_id.as_str()), v);
        }
    }
    let mut common: Option<BTreeSet<(&str, &str)>> = None;
    for row in cells.values() {
        let keys: BTreeSet<_> = row.keys().copied().collect();
        common = Some(match common {
            None => keys,
            Some(c) => c.intersection(&keys).copied().collect(),
        });
    }
    let items: Vec<(&str, &str)> = common.unwrap_or_default().into_iter().collect();
    RaterItemMatrix {
        raters: cells.keys().map(|r| (*r).to_owned()).collect(),
        items: items.iter().map(|(s, p)| ((*s).to_owned(), (*p).to_owned())).collect(),
        scores: cells
            .values()
            .map(|row| items.iter().map(|k| row[k]).collect())
            .collect(),
    }
}
