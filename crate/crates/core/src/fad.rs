//! Fréchet Audio Distance between Gaussian fits of two embedding sets.
//!
//! For fits `(μa, Σa)` and `(μb, Σb)`:
//!
//! ```text
//! FAD = ‖μa − μb‖² + Tr(Σa) + Tr(Σb) − 2 · Tr((Σa Σb)^½)
//! ```
//!
//! The trace of the product square root is evaluated as `Σ √λ` over the
//! eigenvalues of the symmetric matrix `Σa^½ Σb Σa^½`, which is similar to
//! `Σa Σb`, so only symmetric eigendecompositions are needed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{EmbeddingBackendId, EmbeddingSet};
use crate::linalg::{symmetric_eigen, EigenError, Matrix, SymmetricEigen};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FadError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least 2 samples for a covariance, got {0}")]
    TooFewSamples(usize),
    #[error("{which} is not positive semi-definite: eigenvalue {eigenvalue:e} (largest {largest:e})")]
    NotPositiveSemidefinite {
        which: &'static str,
        eigenvalue: f64,
        largest: f64,
    },
    #[error("distance evaluated to {0:e}, below the rounding tolerance")]
    NegativeDistance(f64),
    #[error("embedding sets come from different backends: {0:?} vs {1:?}")]
    BackendMismatch(String, String),
    #[error("invalid Gaussian statistics: {0}")]
    InvalidStats(String),
    #[error("subsample size {size} outside [2, {available}]")]
    SubsampleSize { size: usize, available: usize },
    #[error("repeat count must be at least 1")]
    ZeroRepeats,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Mean and unbiased covariance of a set of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats<T> {
    mean: Vec<T>,
    cov: Matrix<T>,
    n: usize,
}

impl<T: Scalar> GaussianStats<T> {
    /// Validates shapes and finiteness, then symmetrizes `cov`.
    pub fn new(mean: Vec<T>, mut cov: Matrix<T>, n: usize) -> Result<Self, FadError> {
        if n < 2 {
            return Err(FadError::TooFewSamples(n));
        }
        if mean.is_empty() {
            return Err(FadError::InvalidStats("empty mean vector".into()));
        }
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(FadError::InvalidStats(format!(
                "covariance is {}x{} for a {}-vector mean",
                cov.rows(),
                cov.cols(),
                mean.len()
            )));
        }
        if !cov.is_finite() || mean.iter().any(|v| !v.is_finite()) {
            return Err(FadError::InvalidStats("non-finite entries".into()));
        }
        cov.symmetrize();
        Ok(Self { mean, cov, n })
    }

    /// Column means and `(n − 1)`-normalized covariance of row vectors.
    pub fn from_rows<'a, I>(rows: I, dim: usize) -> Result<Self, FadError>
    where
        I: IntoIterator<Item = &'a [f32]>,
        I::IntoIter: Clone,
    {
        let rows = rows.into_iter();
        let mut mean = vec![T::zero(); dim];
        let mut n = 0usize;
        for r in rows.clone() {
            if r.len() != dim {
                return Err(FadError::DimensionMismatch(dim, r.len()));
            }
            for (m, &x) in mean.iter_mut().zip(r) {
                *m += T::lit(f64::from(x));
            }
            n += 1;
        }
        if n < 2 {
            return Err(FadError::TooFewSamples(n));
        }
        let nt = T::from_usize_lossy(n);
        mean.iter_mut().for_each(|m| *m /= nt);

        let mut cov = Matrix::zeros(dim, dim);
        let mut centered = vec![T::zero(); dim];
        for r in rows {
            for ((c, &x), &m) in centered.iter_mut().zip(r).zip(&mean) {
                *c = T::lit(f64::from(x)) - m;
            }
            for i in 0..dim {
                let ci = centered[i];
                for j in i..dim {
                    cov[(i, j)] += ci * centered[j];
                }
            }
        }
        let denom = T::from_usize_lossy(n - 1);
        for i in 0..dim {
            for j in i..dim {
                let v = cov[(i, j)] / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        Self::new(mean, cov, n)
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix<T> {
        &self.cov
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

pub fn fit_gaussian<T: Scalar>(set: &EmbeddingSet) -> Result<GaussianStats<T>, FadError> {
    GaussianStats::from_rows(set.rows(), set.dim())
}

/// Relative eigenvalue / distance tolerance: `1e-8` in double precision,
/// widened to a few hundred ulps for `f32`.
pub fn psd_tolerance<T: Scalar>() -> T {
    T::lit(1e-8).max(T::epsilon() * T::lit(100.0))
}

// Eigendecomposition with tiny negative eigenvalues clamped to zero.
fn psd_eigen<T: Scalar>(m: &Matrix<T>, which: &'static str) -> Result<SymmetricEigen<T>, FadError> {
    let mut e = symmetric_eigen(m)?;
    let largest = e.eigenvalues.iter().fold(T::zero(), |acc, &l| acc.max(l.abs()));
    let floor = -psd_tolerance::<T>() * largest;
    for l in e.eigenvalues.iter_mut() {
        if *l < T::zero() {
            if *l < floor {
                return Err(FadError::NotPositiveSemidefinite {
                    which,
                    eigenvalue: l.to_f64_lossy(),
                    largest: largest.to_f64_lossy(),
                });
            }
            *l = T::zero();
        }
    }
    Ok(e)
}

/// Principal square root of a symmetric PSD matrix.
pub fn psd_sqrt<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, FadError> {
    Ok(psd_eigen(m, "matrix")?.reconstruct_with(|l| l.sqrt()))
}

/// `Tr((Σa Σb)^½)` via the eigenvalues of `Σa^½ Σb Σa^½`.
pub fn trace_sqrt_product<T: Scalar>(cov_a: &Matrix<T>, cov_b: &Matrix<T>) -> Result<T, FadError> {
    if cov_a.rows() != cov_b.rows() {
        return Err(FadError::DimensionMismatch(cov_a.rows(), cov_b.rows()));
    }
    let root_a = psd_eigen(cov_a, "first covariance")?.reconstruct_with(|l| l.sqrt());
    psd_eigen(cov_b, "second covariance")?;
    let mut product = root_a.matmul(cov_b).matmul(&root_a);
    product.symmetrize();
    let e = psd_eigen(&product, "covariance product")?;
    Ok(e.eigenvalues.iter().map(|l| l.sqrt()).sum())
}

/// Fréchet distance between two Gaussians. Symmetric, zero on identical input.
pub fn frechet_distance<T: Scalar>(a: &GaussianStats<T>, b: &GaussianStats<T>) -> Result<T, FadError> {
    if a.dim() != b.dim() {
        return Err(FadError::DimensionMismatch(a.dim(), b.dim()));
    }
    let mean_term: T = a.mean.iter().zip(&b.mean).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let (tr_a, tr_b) = (a.cov.trace(), b.cov.trace());
    let cross = trace_sqrt_product(&a.cov, &b.cov)?;
    let value = mean_term + tr_a + tr_b - T::lit(2.0) * cross;
    if value >= T::zero() {
        return Ok(value);
    }
    let scale = T::one().max(mean_term + tr_a + tr_b);
    if value >= -psd_tolerance::<T>() * scale {
        Ok(T::zero())
    } else {
        Err(FadError::NegativeDistance(value.to_f64_lossy()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FadScore<T> {
    pub value: T,
    pub backend: EmbeddingBackendId,
    pub n_eval: usize,
    pub n_ref: usize,
}

pub fn fad<T: Scalar>(eval_set: &EmbeddingSet, ref_set: &EmbeddingSet) -> Result<FadScore<T>, FadError> {
    check_backends(eval_set, ref_set)?;
    let value = frechet_distance(&fit_gaussian::<T>(eval_set)?, &fit_gaussian::<T>(ref_set)?)?;
    Ok(FadScore {
        value,
        backend: eval_set.backend().clone(),
        n_eval: eval_set.len(),
        n_ref: ref_set.len(),
    })
}

fn check_backends(a: &EmbeddingSet, b: &EmbeddingSet) -> Result<(), FadError> {
    if a.backend().same_space(b.backend()) {
        Ok(())
    } else {
        Err(FadError::BackendMismatch(
            format!("{}/{}", a.backend().name, a.dim()),
            format!("{}/{}", b.backend().name, b.dim()),
        ))
    }
}

/// FAD at one evaluation-subsample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasPoint<T> {
    pub size: usize,
    pub mean: T,
    /// Sample standard deviation across repeats; zero for a single repeat.
    pub std: T,
    pub values: Vec<T>,
}

/// FAD of random evaluation subsamples (without replacement) against the
/// full reference set. Repeat `r` draws from a generator seeded with `seed + r`.
pub fn fad_bias_curve<T: Scalar>(
    eval_set: &EmbeddingSet,
    ref_set: &EmbeddingSet,
    sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<Vec<BiasPoint<T>>, FadError> {
    check_backends(eval_set, ref_set)?;
    if repeats == 0 {
        return Err(FadError::ZeroRepeats);
    }
    let available = eval_set.len();
    if let Some(&size) = sizes.iter().find(|&&s| s < 2 || s > available) {
        return Err(FadError::SubsampleSize { size, available });
    }
    let reference = fit_gaussian::<T>(ref_set)?;

    sizes
        .iter()
        .map(|&size| {
            let values = (0..repeats as u64)
                .into_par_iter()
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
                    let idx = rand::seq::index::sample(&mut rng, available, size).into_vec();
                    let stats = GaussianStats::<T>::from_rows(idx.iter().map(|&i| eval_set.row(i)), eval_set.dim())?;
                    frechet_distance(&stats, &reference)
                })
                .collect::<Result<Vec<T>, FadError>>()?;
            let (mean, std) = mean_std(&values);
            Ok(BiasPoint {
                size,
                mean,
                std,
                values,
            })
        })
        .collect()
}

fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let ss: T = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - T::one())).sqrt())
}
