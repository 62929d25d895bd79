//! Waveform decoding, resampling, segmentation and output-contract checks.

mod contract;
mod resample;
mod segment;
mod wav;

pub use contract::{validate_contract, ContractReport, ContractViolation, OutputContract};
pub use resample::{resample, Resampler, KAISER_BETA, ZERO_CROSSINGS};
pub use segment::{select_max_energy_segment, SelectedSegment};
pub use wav::{decode_wav, decode_wav_file, encode_wav, write_wav_file};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("malformed WAV: {0}")]
    Malformed(String),
    #[error("unsupported WAV encoding: {0}")]
    Unsupported(String),
    #[error("WAV data chunk is empty")]
    EmptyData,
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("clip is {clip_s:.3} s long, shorter than the {segment_s:.3} s segment")]
    ClipTooShort { clip_s: f64, segment_s: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Mono waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
    source_id: String,
}

impl AudioClip {
    /// Builds a clip, rejecting empty or non-finite sample data and a zero rate.
    pub fn new(
        samples: Vec<f32>,
        sample_rate: u32,
        source_id: impl Into<String>,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::InvalidClip("no samples".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(AudioError::InvalidClip(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = source_id.into();
        self
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }
}

/// Hop between candidate windows in [`postprocess_to_contract`].
pub const SEGMENT_HOP_S: f64 = 2.0;

/// Cuts the highest-energy `contract.duration_s` window (hop [`SEGMENT_HOP_S`])
/// and resamples it to `contract.sample_rate`. `start_sample` is expressed at
/// the output rate.
pub fn postprocess_to_contract(clip: &AudioClip, contract: &OutputContract) -> Result<SelectedSegment, AudioError> {
    let mut seg = select_max_energy_segment(clip, contract.duration_s, SEGMENT_HOP_S)?;
    let ratio = f64::from(contract.sample_rate) / f64::from(clip.sample_rate());
    seg.start_sample = (seg.start_sample as f64 * ratio).round() as usize;
    seg.clip = resample(&seg.clip, contract.sample_rate)?;
    Ok(seg)
}
