use super::{AudioClip, AudioError};

/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 8.6;
/// Sinc zero crossings on each side of the kernel centre, at the cutoff rate.
pub const ZERO_CROSSINGS: usize = 64;

// Beyond this many phases the kernel is evaluated per output sample instead of tabulated.
const MAX_TABLE_PHASES: u64 = 4096;

/// Windowed-sinc polyphase resampler for a fixed rate pair.
#[derive(Debug, Clone)]
pub struct Resampler {
    in_rate: u32,
    out_rate: u32,
    up: u64,
    down: u64,
    cutoff: f64,
    half_taps: usize,
    table: Option<Vec<Vec<f64>>>,
}

impl Resampler {
    pub fn new(in_rate: u32, out_rate: u32) -> Result<Self, AudioError> {
        if in_rate == 0 || out_rate == 0 {
            return Err(AudioError::InvalidArgument("sample rates must be positive".into()));
        }
        let g = gcd(u64::from(in_rate), u64::from(out_rate));
        let up = u64::from(out_rate) / g;
        let down = u64::from(in_rate) / g;
        let cutoff = (f64::from(out_rate) / f64::from(in_rate)).min(1.0);
        let half_taps = (ZERO_CROSSINGS as f64 / cutoff).ceil() as usize;
        let mut r = Self {
            in_rate,
            out_rate,
            up,
            down,
            cutoff,
            half_taps,
            table: None,
        };
        if up <= MAX_TABLE_PHASES {
            let table = (0..up).map(|p| r.weights(p as f64 / up as f64)).collect();
            r.table = Some(table);
        }
        Ok(r)
    }

    pub fn in_rate(&self) -> u32 {
        self.in_rate
    }

    pub fn out_rate(&self) -> u32 {
        self.out_rate
    }

    /// `round(input_len · out_rate / in_rate)`.
    pub fn output_len(&self, input_len: usize) -> usize {
        let num = input_len as u128 * u128::from(self.out_rate);
        let den = u128::from(self.in_rate);
        ((num + den / 2) / den) as usize
    }

    // Taps for an output instant `frac` input samples past the anchor sample.
    // Tap i multiplies input sample anchor + i + 1 - half_taps.
    fn weights(&self, frac: f64) -> Vec<f64> {
        let n = 2 * self.half_taps;
        let span = self.half_taps as f64;
        let mut w: Vec<f64> = (0..n)
            .map(|i| {
                let d = frac + (self.half_taps as f64 - 1.0) - i as f64;
                self.cutoff * sinc(self.cutoff * d) * kaiser(d / span)
            })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum != 0.0 {
            w.iter_mut().for_each(|v| *v /= sum);
        }
        w
    }

    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        if self.in_rate == self.out_rate {
            return input.to_vec();
        }
        let out_len = self.output_len(input.len());
        let mut out = Vec::with_capacity(out_len);
        let len = input.len() as i64;
        let mut scratch;
        for j in 0..out_len as u64 {
            let pos = j * self.down;
            let anchor = (pos / self.up) as i64;
            let phase = pos % self.up;
            let taps: &[f64] = match &self.table {
                Some(t) => &t[phase as usize],
                None => {
                    scratch = self.weights(phase as f64 / self.up as f64);
                    &scratch
                }
            };
            let first = anchor + 1 - self.half_taps as i64;
            let mut acc = 0.0f64;
            for (i, &w) in taps.iter().enumerate() {
                let k = first + i as i64;
                if k >= 0 && k < len {
                    acc += w * f64::from(input[k as usize]);
                }
            }
            out.push(acc as f32);
        }
        out
    }
}

/// Band-limited resampling to `target_rate`. Equal rates return an identical copy.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, AudioError> {
    if target_rate == 0 {
        return Err(AudioError::InvalidArgument("target rate must be positive".into()));
    }
    if clip.sample_rate() == target_rate {
        return Ok(clip.clone());
    }
    let r = Resampler::new(clip.sample_rate(), target_rate)?;
    let samples = r.process(clip.samples());
    if samples.is_empty() {
        return Err(AudioError::InvalidArgument(format!(
            "{} samples at {} Hz resample to nothing at {target_rate} Hz",
            clip.len(),
            clip.sample_rate()
        )));
    }
    AudioClip::new(samples, target_rate, clip.source_id())
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn kaiser(t: f64) -> f64 {
    if t.abs() > 1.0 {
        return 0.0;
    }
    bessel_i0(KAISER_BETA * (1.0 - t * t).sqrt()) / bessel_i0(KAISER_BETA)
}

// Power series for the zeroth-order modified Bessel function.
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
