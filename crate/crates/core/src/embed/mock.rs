use super::{EmbedError, EmbeddingBackend, EmbeddingBackendId};
use crate::audio::AudioClip;

pub const MOCK_NAME: &str = "mock-stats";
pub const MOCK_DIM: usize = 8;

/// Deterministic 8-dimensional waveform statistics, standing in for a neural
/// model in tests and dry runs.
#[derive(Debug, Clone)]
pub struct MockBackend {
    id: EmbeddingBackendId,
}

impl MockBackend {
    pub fn new(expected_sample_rate: Option<u32>) -> Self {
        Self {
            id: EmbeddingBackendId {
                name: MOCK_NAME.to_owned(),
                dim: MOCK_DIM,
                expected_sample_rate,
            },
        }
    }
}

impl EmbeddingBackend for MockBackend {
    fn id(&self) -> &EmbeddingBackendId {
        &self.id
    }

    fn is_reentrant(&self) -> bool {
        true
    }

    fn embed_batch(&self, clips: &[AudioClip]) -> Result<Vec<Vec<f32>>, EmbedError> {
        Ok(clips
            .iter()
            .map(|c| mock_features(c.samples(), c.sample_rate()).to_vec())
            .collect())
    }
}

/// `[mean, rms, max, min, zero-crossing rate, energy of first half,
/// energy of second half, duration in seconds]`.
///
/// Zero-crossing rate is sign changes per adjacent sample pair; the first half
/// holds `len / 2` samples.
pub fn mock_features(samples: &[f32], sample_rate: u32) -> [f32; MOCK_DIM] {
    if samples.is_empty() {
        return [0.0; MOCK_DIM];
    }
    let n = samples.len() as f64;
    let mut sum = 0.0f64;
    let mut max = f32::NEG_INFINITY;
    let mut min = f32::INFINITY;
    for &s in samples {
        sum += f64::from(s);
        max = max.max(s);
        min = min.min(s);
    }
    let sq = |xs: &[f32]| xs.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>();
    let half = samples.len() / 2;
    let e1 = sq(&samples[..half]);
    let e2 = sq(&samples[half..]);
    let crossings = samples
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count();
    let zcr = if samples.len() > 1 {
        crossings as f64 / (n - 1.0)
    } else {
        0.0
    };
    [
        (sum / n) as f32,
        ((e1 + e2) / n).sqrt() as f32,
        max,
        min,
        zcr as f32,
        e1 as f32,
        e2 as f32,
        (n / f64::from(sample_rate)) as f32,
    ]
}
