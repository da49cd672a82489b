//! Minimal RIFF/WAVE reader: PCM 16-bit and IEEE float 32-bit, any channel
//! count, averaged to mono on ingest.

use thiserror::Error;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Mono audio normalized to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
    /// Channel count before the mono mixdown.
    pub source_channels: u16,
}

impl AudioBuffer {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WavError {
    #[error("not a RIFF/WAVE file")]
    NotRiff,
    #[error("chunk `{0}` is truncated")]
    TruncatedChunk(String),
    #[error("missing {0} chunk")]
    MissingChunk(&'static str),
    #[error("unsupported codec: format {format}, {bits} bits (only PCM16 and float32)")]
    UnsupportedCodec { format: u16, bits: u16 },
    #[error("zero channels declared")]
    NoChannels,
}

/// Decode WAV bytes. Multi-channel audio is averaged to mono; 16-bit
/// samples are scaled by 1/32768.
pub fn read_wav(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(WavError::NotRiff);
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;

    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        if body_start + size > bytes.len() {
            return Err(WavError::TruncatedChunk(
                String::from_utf8_lossy(id).into_owned(),
            ));
        }
        let body = &bytes[body_start..body_start + size];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(WavError::TruncatedChunk("fmt ".into()));
                }
                let format = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // chunks are word-aligned
        pos = body_start + size + (size & 1);
    }

    let (format, channels, sample_rate, bits) = fmt.ok_or(WavError::MissingChunk("fmt"))?;
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    if channels == 0 {
        return Err(WavError::NoChannels);
    }

    let frames: Vec<f64> = match (format, bits) {
        (FORMAT_PCM, 16) => {
            let per_frame = 2 * channels as usize;
            let n = data.len() / per_frame;
            (0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for c in 0..channels as usize {
                        let off = i * per_frame + 2 * c;
                        let s = i16::from_le_bytes(data[off..off + 2].try_into().unwrap());
                        acc += s as f64 / 32768.0;
                    }
                    acc / channels as f64
                })
                .collect()
        }
        (FORMAT_IEEE_FLOAT, 32) => {
            let per_frame = 4 * channels as usize;
            let n = data.len() / per_frame;
            (0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for c in 0..channels as usize {
                        let off = i * per_frame + 4 * c;
                        let s = f32::from_le_bytes(data[off..off + 4].try_into().unwrap());
                        acc += s as f64;
                    }
                    (acc / channels as f64).clamp(-1.0, 1.0)
                })
                .collect()
        }
        _ => return Err(WavError::UnsupportedCodec { format, bits }),
    };

    Ok(AudioBuffer {
        sample_rate,
        samples: frames,
        source_channels: channels,
    })
}

/// Assemble a PCM16 WAV byte stream. Test and fixture helper; `samples`
/// are interleaved if `channels > 1`.
pub fn encode_wav_pcm16(sample_rate: u32, channels: u16, samples: &[f64]) -> Vec<u8> {
    let data_len = samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let byte_rate = sample_rate * channels as u32 * 2;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&(channels * 2).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_second_of_silence() {
        let bytes = encode_wav_pcm16(16_000, 1, &vec![0.0; 16_000]);
        let buf = read_wav(&bytes).unwrap();
        assert_eq!(buf.sample_rate, 16_000);
        assert_eq!(buf.samples.len(), 16_000);
        assert!(buf.samples.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn stereo_opposites_average_to_zero() {
        let mut interleaved = Vec::new();
        for _ in 0..100 {
            interleaved.push(0.5);
            interleaved.push(-0.5);
        }
        let bytes = encode_wav_pcm16(8_000, 2, &interleaved);
        let buf = read_wav(&bytes).unwrap();
        assert_eq!(buf.source_channels, 2);
        for s in &buf.samples {
            // +-0.5 quantizes to 16384 and -16384, so the mean is not exactly 0
            assert!(s.abs() < 1.0 / 32768.0, "{s}");
        }
    }

    #[test]
    fn sine_fixture_matches_formula() {
        let sr = 16_000u32;
        let samples: Vec<f64> = (0..sr)
            .map(|k| 0.9 * (2.0 * std::f64::consts::PI * 440.0 * k as f64 / sr as f64).sin())
            .collect();
        let bytes = encode_wav_pcm16(sr, 1, &samples);
        let buf = read_wav(&bytes).unwrap();
        for (k, s) in buf.samples.iter().enumerate().step_by(7) {
            let expected =
                0.9 * (2.0 * std::f64::consts::PI * 440.0 * k as f64 / sr as f64).sin();
            assert!((s - expected).abs() < 1e-4, "sample {k}: {s} vs {expected}");
        }
    }

    #[test]
    fn float32_path_reads_back() {
        let samples = [0.25f32, -0.75, 1.0, -1.0];
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + 16u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&FORMAT_IEEE_FLOAT.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&44_100u32.to_le_bytes());
        out.extend_from_slice(&(44_100u32 * 4).to_le_bytes());
        out.extend_from_slice(&4u16.to_le_bytes());
        out.extend_from_slice(&32u16.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&16u32.to_le_bytes());
        for s in samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        let buf = read_wav(&out).unwrap();
        assert_eq!(buf.samples, vec![0.25, -0.75, 1.0, -1.0]);
    }

    #[test]
    fn rejects_unsupported_codec() {
        let mut bytes = encode_wav_pcm16(8_000, 1, &[0.0; 4]);
        // format code 2 = ADPCM
        bytes[20] = 2;
        assert_eq!(
            read_wav(&bytes),
            Err(WavError::UnsupportedCodec { format: 2, bits: 16 })
        );
    }

    #[test]
    fn rejects_truncated_data_chunk() {
        let mut bytes = encode_wav_pcm16(8_000, 1, &[0.0; 4]);
        bytes.truncate(bytes.len() - 2);
        assert!(matches!(read_wav(&bytes), Err(WavError::TruncatedChunk(_))));
    }

    #[test]
    fn output_always_in_unit_range() {
        let samples: Vec<f64> = (0..1000).map(|i| ((i * 37) % 200) as f64 / 99.5 - 1.0).collect();
        let bytes = encode_wav_pcm16(8_000, 1, &samples);
        let buf = read_wav(&bytes).unwrap();
        assert!(buf.samples.iter().all(|s| (-1.0..=1.0).contains(s)));
    }
}
