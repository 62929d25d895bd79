use super::{AudioClip, AudioError};

/// A fixed-length window cut from a longer clip.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedSegment {
    pub clip: AudioClip,
    pub start_sample: usize,
    pub energy: f64,
}

impl SelectedSegment {
    pub fn start_s(&self) -> f64 {
        self.start_sample as f64 / f64::from(self.clip.sample_rate())
    }
}

/// Picks the `segment_s` window with the largest sum of squared samples among
/// starts `0, hop, 2·hop, …` that fit inside the clip. Ties go to the earliest start.
pub fn select_max_energy_segment(
    clip: &AudioClip,
    segment_s: f64,
    hop_s: f64,
) -> Result<SelectedSegment, AudioError> {
    if !(segment_s > 0.0 && segment_s.is_finite()) {
        return Err(AudioError::InvalidArgument("segment length must be positive".into()));
    }
    if !(hop_s > 0.0 && hop_s.is_finite()) {
        return Err(AudioError::InvalidArgument("hop must be positive".into()));
    }
    let rate = f64::from(clip.sample_rate());
    let seg_len = (segment_s * rate).round() as usize;
    let hop = ((hop_s * rate).round() as usize).max(1);
    if seg_len == 0 {
        return Err(AudioError::InvalidArgument("segment shorter than one sample".into()));
    }
    if clip.len() < seg_len {
        return Err(AudioError::ClipTooShort {
            clip_s: clip.duration_s(),
            segment_s,
        });
    }

    let samples = clip.samples();
    let mut best_start = 0;
    let mut best_energy = f64::NEG_INFINITY;
    let mut start = 0;
    while start + seg_len <= samples.len() {
        let e = energy(&samples[start..start + seg_len]);
        if e > best_energy {
            best_energy = e;
            best_start = start;
        }
        start += hop;
    }
    let window = samples[best_start..best_start + seg_len].to_vec();
    Ok(SelectedSegment {
        clip: AudioClip::new(window, clip.sample_rate(), clip.source_id())?,
        start_sample: best_start,
        energy: best_energy,
    })
}

pub(crate) fn energy(samples: &[f32]) -> f64 {
    samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum()
}
