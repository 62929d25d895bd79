//! Rank and product-moment correlation with Student-t significance.

mod special;

pub use special::{ln_gamma, regularized_incomplete_beta, BETA_CF_MAX_ITER};

use serde::Serialize;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("non-finite input value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Spearman,
    Pearson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult<T> {
    pub coefficient: T,
    pub p_value: T,
    pub n: usize,
    pub method: CorrelationMethod,
}

/// Ascending ranks from 1; tied values share the mean of their rank block.
pub fn rank<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let avg = T::from_usize_lossy(start + 1 + end) / T::lit(2.0);
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Two-sided p-value of Student's t with `df` degrees of freedom,
/// `2 · (1 − F(|t|))`, evaluated as `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn t_two_sided<T: Scalar>(t: T, df: u32) -> T {
    assert!(df >= 1, "degrees of freedom must be positive");
    if t.is_nan() {
        return T::nan();
    }
    if t.is_infinite() {
        return T::zero();
    }
    let d = T::lit(f64::from(df));
    let x = d / (d + t * t);
    regularized_incomplete_beta(d / T::lit(2.0), T::lit(0.5), x)
        .max(T::zero())
        .min(T::one())
}

/// p-value of a correlation coefficient `r` over `n` pairs via
/// `t = r · √((n − 2) / (1 − r²))`.
pub fn correlation_p_value<T: Scalar>(r: T, n: usize) -> Result<T, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: n });
    }
    let df = (n - 2) as u32;
    let denom = T::one() - r * r;
    if denom <= T::zero() {
        return Ok(T::zero());
    }
    let t = r * (T::lit(f64::from(df)) / denom).sqrt();
    Ok(t_two_sided(t, df))
}

pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>, StatsError> {
    let r = pearson_coefficient(x, y)?;
    Ok(CorrelationResult {
        coefficient: r,
        p_value: correlation_p_value(r, x.len())?,
        n: x.len(),
        method: CorrelationMethod::Pearson,
    })
}

pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>, StatsError> {
    check_pair(x, y)?;
    let rho = pearson_coefficient(&rank(x), &rank(y)).map_err(|e| match e {
        StatsError::ZeroVariance(which) => StatsError::ZeroVariance(if which == "x" { "rank(x)" } else { "rank(y)" }),
        other => other,
    })?;
    Ok(CorrelationResult {
        coefficient: rho,
        p_value: correlation_p_value(rho, x.len())?,
        n: x.len(),
        method: CorrelationMethod::Spearman,
    })
}

fn check_pair<T: Scalar>(x: &[T], y: &[T]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn pearson_coefficient<T: Scalar>(x: &[T], y: &[T]) -> Result<T, StatsError> {
    check_pair(x, y)?;
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() {
        return Err(StatsError::ZeroVariance("x"));
    }
    if syy == T::zero() {
        return Err(StatsError::ZeroVariance("y"));
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// Arithmetic mean and `(n − 1)` sample standard deviation; std is zero when `n < 2`.
pub fn mean_and_sample_std<T: Scalar>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::nan(), T::zero());
    }
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ranks() {
        assert_eq!(rank(&[10.0, 20.0, 30.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank(&[5.0, 5.0, 7.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank(&[3.0, 1.0, 4.0, 1.0]), vec![3.0, 1.5, 4.0, 1.5]);
        assert_eq!(rank(&[2.0f32; 4]), vec![2.5; 4]);
    }

    #[test]
    fn monotone_and_affine() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0];
        let s = spearman(&x, &y).unwrap();
        assert_eq!(s.coefficient, 1.0);
        assert_eq!(s.p_value, 0.0);
        let lin: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_abs_diff_eq!(pearson(&x, &lin).unwrap().coefficient, 1.0, epsilon = 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &neg).unwrap().coefficient, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn hand_pearson() {
        // x=[1..5], y=[2,1,4,3,5]: Σdxdy = 8, Σdx² = Σdy² = 10
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(r.coefficient, 0.8, epsilon = 1e-15);
    }

    #[test]
    fn t_at_zero_is_one() {
        for df in [1, 2, 3, 10, 100] {
            assert_abs_diff_eq!(t_two_sided(0.0, df), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn t_closed_forms() {
        // df=1 is Cauchy: p = 1 − 2·atan(|t|)/π; df=2: p = 1 − |t|/√(2+t²)
        for t in [0.3f64, 1.0, 2.5, 12.0] {
            let cauchy = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert_abs_diff_eq!(t_two_sided(t, 1), cauchy, epsilon = 1e-12);
            let df2 = 1.0 - t / (2.0 + t * t).sqrt();
            assert_abs_diff_eq!(t_two_sided(t, 2), df2, epsilon = 1e-12);
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::TooFewSamples { needed: 3, got: 2 }
        );
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::LengthMismatch(3, 2)
        );
        assert_eq!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::ZeroVariance("rank(x)")
        );
        assert_eq!(
            pearson(&[1.0, f64::NAN, 3.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::NonFinite
        );
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_and_sample_std(&[6.0, 8.0]);
        assert_eq!(m, 7.0);
        assert_abs_diff_eq!(s, 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(mean_and_sample_std(&[3.0]), (3.0, 0.0));
    }
}
