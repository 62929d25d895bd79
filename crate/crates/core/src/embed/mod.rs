//! Per-clip embeddings: backend abstraction, the `AEMB` file format, a
//! deterministic statistics backend for tests, and an external-process runner
//! for neural models that live outside this toolkit.

mod external;
mod format;
mod mock;

pub use external::{external_runner_backend, ExternalRunner, DEFAULT_TIMEOUT};
pub use format::{read_embeddings, read_embeddings_file, write_embeddings, write_embeddings_file, MAGIC, VERSION};
pub use mock::{mock_features, MockBackend, MOCK_DIM, MOCK_NAME};

use std::collections::HashSet;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{resample, AudioClip, AudioError};

/// Clips handed to a backend per call.
pub const BATCH_SIZE: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("no clips to embed")]
    EmptyInput,
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend returned {actual}-dimensional rows, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("backend returned {actual} rows for a batch of {expected}")]
    RowCountMismatch { expected: usize, actual: usize },
    #[error("bad magic: not an AEMB file")]
    BadMagic,
    #[error("unsupported AEMB version {0}")]
    UnsupportedVersion(u32),
    #[error("payload length mismatch: {0}")]
    PayloadLength(String),
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("embedding set must contain at least one row")]
    ZeroCount,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("invalid UTF-8 in {0}")]
    InvalidUtf8(&'static str),
    #[error("backend name must be non-empty")]
    EmptyName,
    #[error("duplicate clip id {0:?}")]
    DuplicateClipId(String),
    #[error("{what} too long for a u16 length prefix ({len} bytes)")]
    StringTooLong { what: &'static str, len: usize },
    #[error("command template must contain {{in}} and {{out}} placeholders")]
    BadTemplate,
    #[error("external runner exited with {status}: {stderr}")]
    ProcessFailed { status: String, stderr: String },
    #[error("external runner timed out after {0:?}")]
    Timeout(std::time::Duration),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

/// Identity of an embedding model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingBackendId {
    pub name: String,
    pub dim: usize,
    /// Rate clips are resampled to before inference. Unknown for sets read from disk.
    pub expected_sample_rate: Option<u32>,
}

impl EmbeddingBackendId {
    pub fn new(name: impl Into<String>, dim: usize, expected_sample_rate: Option<u32>) -> Result<Self, EmbedError> {
        let name = name.into();
        if name.is_empty() {
            return Err(EmbedError::EmptyName);
        }
        if dim == 0 {
            return Err(EmbedError::ZeroDim);
        }
        Ok(Self {
            name,
            dim,
            expected_sample_rate,
        })
    }

    /// Two ids describe the same embedding space when name and dimension agree.
    pub fn same_space(&self, other: &Self) -> bool {
        self.name == other.name && self.dim == other.dim
    }
}

/// N×D matrix of clip embeddings from one backend, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    backend: EmbeddingBackendId,
    data: Vec<f32>,
    clip_ids: Vec<String>,
}

impl EmbeddingSet {
    pub fn new(backend: EmbeddingBackendId, data: Vec<f32>, clip_ids: Vec<String>) -> Result<Self, EmbedError> {
        let dim = backend.dim;
        if dim == 0 {
            return Err(EmbedError::ZeroDim);
        }
        if clip_ids.is_empty() {
            return Err(EmbedError::ZeroCount);
        }
        if data.len() != dim * clip_ids.len() {
            return Err(EmbedError::PayloadLength(format!(
                "{} values for {} rows of dimension {dim}",
                data.len(),
                clip_ids.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite {
                row: i / dim,
                col: i % dim,
            });
        }
        let mut seen = HashSet::with_capacity(clip_ids.len());
        for id in &clip_ids {
            if !seen.insert(id.as_str()) {
                return Err(EmbedError::DuplicateClipId(id.clone()));
            }
        }
        Ok(Self {
            backend,
            data,
            clip_ids,
        })
    }

    pub fn from_rows(backend: EmbeddingBackendId, rows: Vec<Vec<f32>>, clip_ids: Vec<String>) -> Result<Self, EmbedError> {
        let dim = backend.dim;
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(EmbedError::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::new(backend, rows.concat(), clip_ids)
    }

    pub fn backend(&self) -> &EmbeddingBackendId {
        &self.backend
    }

    pub fn dim(&self) -> usize {
        self.backend.dim
    }

    pub fn len(&self) -> usize {
        self.clip_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clip_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + Clone {
        self.data.chunks_exact(self.dim())
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn clip_ids(&self) -> &[String] {
        &self.clip_ids
    }

    /// New set with the given rows, in the given order. Panics on out-of-range indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self, EmbedError> {
        let mut data = Vec::with_capacity(indices.len() * self.dim());
        let mut ids = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
            ids.push(self.clip_ids[i].clone());
        }
        Self::new(self.backend.clone(), data, ids)
    }

    /// Rows whose clip id satisfies `keep`, or `None` if nothing matches.
    pub fn filter_ids(&self, mut keep: impl FnMut(&str) -> bool) -> Option<Self> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(&self.clip_ids[i])).collect();
        if idx.is_empty() {
            None
        } else {
            self.select(&idx).ok()
        }
    }
}

/// A model that maps audio clips to fixed-length vectors.
pub trait EmbeddingBackend: Send + Sync {
    fn id(&self) -> &EmbeddingBackendId;

    /// Whether concurrent `embed_batch` calls are allowed.
    fn is_reentrant(&self) -> bool {
        false
    }

    /// One row per clip, in input order. Clips arrive at the expected sample rate.
    fn embed_batch(&self, clips: &[AudioClip]) -> Result<Vec<Vec<f32>>, EmbedError>;
}

/// Embeds clips in order, resampling each to the backend's expected rate first.
pub fn embed_clips(clips: &[AudioClip], backend: &dyn EmbeddingBackend) -> Result<EmbeddingSet, EmbedError> {
    if clips.is_empty() {
        return Err(EmbedError::EmptyInput);
    }
    let id = backend.id().clone();
    let prepared: Vec<AudioClip> = match id.expected_sample_rate {
        Some(rate) => clips.iter().map(|c| resample(c, rate)).collect::<Result<_, _>>()?,
        None => clips.to_vec(),
    };

    let run = |batch: &[AudioClip]| -> Result<Vec<Vec<f32>>, EmbedError> {
        let rows = backend.embed_batch(batch)?;
        if rows.len() != batch.len() {
            return Err(EmbedError::RowCountMismatch {
                expected: batch.len(),
                actual: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != id.dim) {
            return Err(EmbedError::DimensionMismatch {
                expected: id.dim,
                actual: bad.len(),
            });
        }
        Ok(rows)
    };

    let batches: Vec<Vec<Vec<f32>>> = if backend.is_reentrant() {
        prepared.par_chunks(BATCH_SIZE).map(run).collect::<Result<_, _>>()?
    } else {
        prepared.chunks(BATCH_SIZE).map(run).collect::<Result<_, _>>()?
    };
    let ids = clips.iter().map(|c| c.source_id().to_owned()).collect();
    EmbeddingSet::from_rows(id, batches.into_iter().flatten().collect(), ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(id: &str, rate: u32, f: impl Fn(usize) -> f32, n: usize) -> AudioClip {
        AudioClip::new((0..n).map(f).collect(), rate, id).unwrap()
    }

    #[test]
    fn mock_rows_follow_input_order() {
        let backend = MockBackend::new(Some(16000));
        let clips = vec![
            clip("a", 16000, |i| (i as f32 * 0.01).sin(), 1600),
            clip("b", 16000, |_| 0.5, 800),
            clip("c", 16000, |i| if i % 2 == 0 { 0.2 } else { -0.2 }, 400),
        ];
        let set = embed_clips(&clips, &backend).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.dim(), MOCK_DIM);
        for (i, c) in clips.iter().enumerate() {
            assert_eq!(set.row(i), &mock_features(c.samples(), c.sample_rate())[..]);
        }
        assert_eq!(set.clip_ids(), &["a", "b", "c"]);

        let reversed: Vec<AudioClip> = clips.iter().rev().cloned().collect();
        let rset = embed_clips(&reversed, &backend).unwrap();
        for i in 0..3 {
            assert_eq!(rset.row(i), set.row(2 - i));
        }
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            embed_clips(&[], &MockBackend::new(None)),
            Err(EmbedError::EmptyInput)
        ));
    }

    #[test]
    fn clips_are_resampled_to_backend_rate() {
        let c = clip("s", 32000, |i| (i as f32 * 0.003).sin() * 0.5, 32000);
        let set = embed_clips(std::slice::from_ref(&c), &MockBackend::new(Some(16000))).unwrap();
        let down = resample(&c, 16000).unwrap();
        assert_eq!(set.row(0), &mock_features(down.samples(), 16000)[..]);
        assert_eq!(set.row(0)[7], 1.0);
    }

    #[test]
    fn many_clips_span_batches_deterministically() {
        let clips: Vec<AudioClip> = (0..70)
            .map(|k| clip(&format!("c{k}"), 8000, move |i| ((i * (k + 1)) as f32 * 0.001).cos(), 200))
            .collect();
        let backend = MockBackend::new(None);
        let a = embed_clips(&clips, &backend).unwrap();
        let b = embed_clips(&clips, &backend).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 70);
    }

    struct WrongDim(EmbeddingBackendId);

    impl EmbeddingBackend for WrongDim {
        fn id(&self) -> &EmbeddingBackendId {
            &self.0
        }
        fn embed_batch(&self, clips: &[AudioClip]) -> Result<Vec<Vec<f32>>, EmbedError> {
            Ok(clips.iter().map(|_| vec![0.0; 3]).collect())
        }
    }

    #[test]
    fn wrong_dimension_is_a_protocol_violation() {
        let b = WrongDim(EmbeddingBackendId::new("bad", 4, None).unwrap());
        let err = embed_clips(&[clip("x", 8000, |_| 0.0, 10)], &b).unwrap_err();
        assert!(matches!(err, EmbedError::DimensionMismatch { expected: 4, actual: 3 }));
    }

    #[test]
    fn set_invariants() {
        let id = EmbeddingBackendId::new("m", 2, None).unwrap();
        assert!(EmbeddingSet::new(id.clone(), vec![0.0, 1.0], vec!["a".into()]).is_ok());
        assert!(matches!(
            EmbeddingSet::new(id.clone(), vec![0.0, f32::NAN], vec!["a".into()]),
            Err(EmbedError::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            EmbeddingSet::new(id.clone(), vec![0.0; 4], vec!["a".into(), "a".into()]),
            Err(EmbedError::DuplicateClipId(_))
        ));
        assert!(matches!(
            EmbeddingSet::new(id, vec![], vec![]),
            Err(EmbedError::ZeroCount)
        ));
        assert!(EmbeddingBackendId::new("", 2, None).is_err());
        assert!(EmbeddingBackendId::new("x", 0, None).is_err());
    }
}
