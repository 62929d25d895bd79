use serde::{Deserialize, Serialize};

use super::{AudioClip, AudioError};

/// Required shape of a submitted audio file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputContract {
    pub duration_s: f64,
    pub sample_rate: u32,
    pub tolerance_samples: usize,
}

impl Default for OutputContract {
    fn default() -> Self {
        Self {
            duration_s: 4.0,
            sample_rate: 32000,
            tolerance_samples: 0,
        }
    }
}

impl OutputContract {
    pub fn new(duration_s: f64, sample_rate: u32, tolerance_samples: usize) -> Result<Self, AudioError> {
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return Err(AudioError::InvalidArgument("contract duration must be positive".into()));
        }
        if sample_rate == 0 {
            return Err(AudioError::InvalidArgument("contract sample rate must be positive".into()));
        }
        Ok(Self {
            duration_s,
            sample_rate,
            tolerance_samples,
        })
    }

    pub fn expected_len(&self) -> usize {
        (self.duration_s * f64::from(self.sample_rate)).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContractViolation {
    SampleRate { expected: u32, actual: u32 },
    Length { expected: usize, actual: usize, tolerance: usize },
}

impl std::fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SampleRate { expected, actual } => {
                write!(f, "sample rate {actual} Hz, expected {expected} Hz")
            }
            Self::Length {
                expected,
                actual,
                tolerance,
            } => write!(f, "{actual} samples, expected {expected} ± {tolerance}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractReport {
    pub source_id: String,
    pub violations: Vec<ContractViolation>,
}

impl ContractReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_contract(clip: &AudioClip, contract: &OutputContract) -> ContractReport {
    let mut violations = Vec::new();
    if clip.sample_rate() != contract.sample_rate {
        violations.push(ContractViolation::SampleRate {
            expected: contract.sample_rate,
            actual: clip.sample_rate(),
        });
    }
    let expected = contract.expected_len();
    if clip.len().abs_diff(expected) > contract.tolerance_samples {
        violations.push(ContractViolation::Length {
            expected,
            actual: clip.len(),
            tolerance: contract.tolerance_samples,
        });
    }
    ContractReport {
        source_id: clip.source_id().to_owned(),
        violations,
    }
}
