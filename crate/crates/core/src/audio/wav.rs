use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, AudioError};

const I16_SCALE: f32 = 32768.0;

/// Decodes a RIFF/WAVE byte stream (PCM int16 or float32, any channel count)
/// into a mono clip. Channels are averaged; int16 is divided by 32768.
pub fn decode_wav(bytes: &[u8], source_id: &str) -> Result<AudioClip, AudioError> {
    let reader = WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if channels == 0 {
        return Err(AudioError::Malformed("zero channels".into()));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f32::from(v) / I16_SCALE))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(AudioError::Unsupported(format!("{bits}-bit {fmt:?} PCM")));
        }
    };
    if interleaved.is_empty() {
        return Err(AudioError::EmptyData);
    }
    if !interleaved.len().is_multiple_of(channels) {
        return Err(AudioError::Malformed(format!(
            "{} samples do not divide into {channels} channels",
            interleaved.len()
        )));
    }
    let samples = if channels == 1 {
        interleaved
    } else {
        let inv = 1.0 / channels as f32;
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f32>() * inv)
            .collect()
    };
    AudioClip::new(samples, spec.sample_rate, source_id)
}

pub fn decode_wav_file(path: &Path) -> Result<AudioClip, AudioError> {
    let bytes = std::fs::read(path).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_wav(&bytes, &id)
}

/// Encodes a clip as mono 32-bit float WAV.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut buf = Cursor::new(Vec::with_capacity(44 + clip.len() * 4));
    {
        let mut writer = WavWriter::new(&mut buf, spec).expect("in-memory WAV writer");
        for &s in clip.samples() {
            writer.write_sample(s).expect("in-memory WAV write");
        }
        writer.finalize().expect("in-memory WAV finalize");
    }
    buf.into_inner()
}

pub fn write_wav_file(clip: &AudioClip, path: &Path) -> Result<(), AudioError> {
    std::fs::write(path, encode_wav(clip)).map_err(|source| AudioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn map_hound(err: hound::Error) -> AudioError {
    match err {
        hound::Error::Unsupported => AudioError::Unsupported("codec not supported".into()),
        hound::Error::FormatError(msg) => AudioError::Malformed(msg.to_string()),
        hound::Error::IoError(e) => AudioError::Malformed(e.to_string()),
        other => AudioError::Malformed(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int16_wav(channels: u16, rate: u32, interleaved: &[i16]) -> Vec<u8> {
        let spec = WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut buf = Cursor::new(Vec::new());
        {
            let mut w = WavWriter::new(&mut buf, spec).unwrap();
            for &s in interleaved {
                w.write_sample(s).unwrap();
            }
            w.finalize().unwrap();
        }
        buf.into_inner()
    }

    #[test]
    fn float_mono_decodes_verbatim() {
        let clip = AudioClip::new(vec![0.0, 0.5, -0.5, 1.0], 32000, "x").unwrap();
        let back = decode_wav(&encode_wav(&clip), "x").unwrap();
        assert_eq!(back.samples(), &[0.0, 0.5, -0.5, 1.0]);
        assert_eq!(back.sample_rate(), 32000);
    }

    #[test]
    fn symmetric_stereo_averages_to_silence() {
        let frames: Vec<i16> = (0..8).flat_map(|_| [16384, -16384]).collect();
        let clip = decode_wav(&int16_wav(2, 16000, &frames), "st").unwrap();
        assert_eq!(clip.len(), 8);
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn int16_scaling_divides_by_32768() {
        let clip = decode_wav(&int16_wav(1, 16000, &[32767, -32768, 16384]), "s").unwrap();
        assert_eq!(clip.samples()[0], 32767.0 / 32768.0);
        assert_eq!(clip.samples()[1], -1.0);
        assert_eq!(clip.samples()[2], 0.5);
    }

    #[test]
    fn rejects_garbage_and_empty_data() {
        assert!(matches!(
            decode_wav(b"not a wav file at all", "g"),
            Err(AudioError::Malformed(_))
        ));
        assert!(matches!(
            decode_wav(&int16_wav(1, 16000, &[]), "e"),
            Err(AudioError::EmptyData)
        ));
    }

    #[test]
    fn rejects_24_bit() {
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut buf = Cursor::new(Vec::new());
        {
            let mut w = WavWriter::new(&mut buf, spec).unwrap();
            w.write_sample(100i32).unwrap();
            w.finalize().unwrap();
        }
        assert!(matches!(
            decode_wav(&buf.into_inner(), "x"),
            Err(AudioError::Unsupported(_))
        ));
    }

    proptest! {
        #[test]
        fn float_roundtrip_is_bit_identical(samples in prop::collection::vec(-1.0f32..=1.0, 1..512)) {
            let clip = AudioClip::new(samples.clone(), 32000, "p").unwrap();
            let back = decode_wav(&encode_wav(&clip), "p").unwrap();
            let a: Vec<u32> = samples.iter().map(|s| s.to_bits()).collect();
            let b: Vec<u32> = back.samples().iter().map(|s| s.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }
}
