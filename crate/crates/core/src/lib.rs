//! Evaluation toolkit for text-to-audio sound scene synthesis.
//!
//! - [`audio`]: WAV decoding, band-limited resampling, max-energy segment
//!   selection and the submission output contract.
//! - [`embed`]: embedding backends and the `AEMB` embedding file format.
//! - [`fad`]: Gaussian fits, Fréchet Audio Distance and subsample bias curves.
//! - [`protocol`]: the structured prompt grammar, category grid, dataset
//!   manifest rules and caption co-occurrence counts.
//! - [`ratings`]: listening-test rating aggregation and Cronbach's α.
//! - [`stats`]: Spearman / Pearson correlation with Student-t p-values.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what the pipeline uses.

pub mod audio;
pub mod embed;
pub mod fad;
pub mod linalg;
pub mod protocol;
pub mod ratings;
pub mod scalar;
pub mod stats;

pub use audio::{AudioClip, AudioError, OutputContract};
pub use embed::{EmbedError, EmbeddingBackend, EmbeddingBackendId, EmbeddingSet};
pub use fad::FadError;
pub use protocol::{BackgroundCategory, DatasetManifest, ForegroundCategory, PromptSpec, ProtocolError, Split};
pub use ratings::{RatingRecord, RatingsError, SystemScores};
pub use scalar::Scalar;
pub use stats::{CorrelationMethod, StatsError};

/// Double-precision Gaussian fit.
pub type GaussianStats = fad::GaussianStats<f64>;
/// Single-precision Gaussian fit.
pub type GaussianStats32 = fad::GaussianStats<f32>;
pub type FadScore = fad::FadScore<f64>;
pub type BiasPoint = fad::BiasPoint<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type CorrelationResult = stats::CorrelationResult<f64>;
