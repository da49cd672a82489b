//! Audio conditioning features, frame-aligned to the motion rate: MFCC,
//! delta, chromagram, onset strength, and tempogram, stacked column-wise
//! into one matrix per clip, plus k-means discretization into audio tokens.

mod mfcc;
mod rhythm;
mod spectrogram;

use thiserror::Error;

pub use mfcc::{delta, mel_filterbank, mfcc};
pub use rhythm::{chromagram, onset_strength, tempogram};
pub use spectrogram::{naive_dft_power, power_spectrogram};

use crate::motion_io::AudioBuffer;
use crate::rvq::kmeans;

#[derive(Debug, Error, PartialEq)]
pub enum AudioError {
    #[error("fft_size must be a power of two, got {0}")]
    BadFftSize(usize),
    #[error("hop must be positive and at most fft_size ({fft}), got {hop}")]
    BadHop { hop: usize, fft: usize },
    #[error("mfcc_count ({mfcc}) cannot exceed mel_bands ({mel})")]
    TooManyCoefficients { mfcc: usize, mel: usize },
    #[error("audio has {samples} samples, shorter than one {fft_size}-sample frame")]
    AudioTooShort { samples: usize, fft_size: usize },
    #[error("need at least {needed} frames, got {frames}")]
    TooFewFrames { frames: usize, needed: usize },
    #[error("sample rate {found} does not match the configured {expected}")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("feature text line {line}: {message}")]
    FeatureParse { line: usize, message: String },
    #[error(transparent)]
    Quantizer(#[from] crate::rvq::RvqError),
}

/// Extraction parameters. `hop / sample_rate` sets the feature frame
/// period; configure it to match the motion frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub sample_rate: u32,
    pub fft_size: usize,
    pub hop: usize,
    pub mel_bands: usize,
    pub mfcc_count: usize,
    pub tempogram_window: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        // 24 kHz / hop 800 = exactly 30 feature frames per second
        FeatureConfig {
            sample_rate: 24_000,
            fft_size: 1024,
            hop: 800,
            mel_bands: 26,
            mfcc_count: 13,
            tempogram_window: 30,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), AudioError> {
        if self.fft_size == 0 || !self.fft_size.is_power_of_two() {
            return Err(AudioError::BadFftSize(self.fft_size));
        }
        if self.hop == 0 || self.hop > self.fft_size {
            return Err(AudioError::BadHop {
                hop: self.hop,
                fft: self.fft_size,
            });
        }
        if self.mfcc_count > self.mel_bands {
            return Err(AudioError::TooManyCoefficients {
                mfcc: self.mfcc_count,
                mel: self.mel_bands,
            });
        }
        Ok(())
    }

    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.hop as f64
    }

    /// Total stacked width: mfcc + delta + 12 chroma + onset + tempogram.
    pub fn feature_width(&self) -> usize {
        2 * self.mfcc_count + 12 + 1 + self.tempogram_window
    }
}

/// Frame-aligned feature rows with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub frame_rate: f64,
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn frame_count(&self) -> usize {
        self.rows.len()
    }

    /// Header line with the frame rate and column names, one row per frame.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}", self.frame_rate));
        for name in &self.column_names {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
        for row in &self.rows {
            let text: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&text.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<FeatureMatrix, AudioError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(AudioError::FeatureParse {
            line: 1,
            message: "empty file".into(),
        })?;
        let mut toks = header.split_whitespace();
        let rate: f64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(AudioError::FeatureParse {
                line: 1,
                message: "bad frame rate".into(),
            })?;
        let column_names: Vec<String> = toks.map(str::to_string).collect();
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let row: Result<Vec<f64>, _> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| AudioError::FeatureParse {
                        line: idx + 1,
                        message: format!("`{t}` is not a number"),
                    })
                })
                .collect();
            let row = row?;
            if row.len() != column_names.len() {
                return Err(AudioError::FeatureParse {
                    line: idx + 1,
                    message: format!(
                        "row width {} does not match header {}",
                        row.len(),
                        column_names.len()
                    ),
                });
            }
            rows.push(row);
        }
        Ok(FeatureMatrix {
            frame_rate: rate,
            column_names,
            rows,
        })
    }
}

/// Run the full extraction stack. Columns are concatenated in fixed order:
/// mfcc, delta, chroma, onset, tempogram.
pub fn stack_features(
    audio: &AudioBuffer,
    config: &FeatureConfig,
) -> Result<FeatureMatrix, AudioError> {
    config.validate()?;
    if audio.sample_rate != config.sample_rate {
        return Err(AudioError::SampleRateMismatch {
            expected: config.sample_rate,
            found: audio.sample_rate,
        });
    }
    let spec = power_spectrogram(&audio.samples, config)?;
    let coeffs = mfcc(&spec, config);
    let deltas = delta(&coeffs)?;
    let chroma = chromagram(&spec, config);
    let onset = onset_strength(&spec)?;
    let tempo = tempogram(&onset, config)?;

    let mut column_names = Vec::with_capacity(config.feature_width());
    for i in 0..config.mfcc_count {
        column_names.push(format!("mfcc_{i}"));
    }
    for i in 0..config.mfcc_count {
        column_names.push(format!("delta_{i}"));
    }
    for i in 0..12 {
        column_names.push(format!("chroma_{i}"));
    }
    column_names.push("onset".into());
    for lag in 1..=config.tempogram_window {
        column_names.push(format!("tempo_{lag}"));
    }

    let rows: Vec<Vec<f64>> = (0..spec.len())
        .map(|t| {
            let mut row = Vec::with_capacity(config.feature_width());
            row.extend_from_slice(&coeffs[t]);
            row.extend_from_slice(&deltas[t]);
            row.extend_from_slice(&chroma[t]);
            row.push(onset[t]);
            row.extend_from_slice(&tempo[t]);
            row
        })
        .collect();

    Ok(FeatureMatrix {
        frame_rate: config.frame_rate(),
        column_names,
        rows,
    })
}

/// A flat audio codebook (k-means, L = 1) for discretizing feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioCodebook {
    pub codes: Vec<Vec<f64>>,
}

impl AudioCodebook {
    /// Nearest-code index per row.
    pub fn assign(&self, features: &FeatureMatrix) -> Vec<usize> {
        features
            .rows
            .iter()
            .map(|row| {
                let mut best = 0;
                let mut best_d = f64::MAX;
                for (i, c) in self.codes.iter().enumerate() {
                    let d: f64 = c.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                best
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let d = self.codes.first().map(|c| c.len()).unwrap_or(0);
        out.push_str(&format!("audio_codebook {} {}\n", self.codes.len(), d));
        for code in &self.codes {
            let text: Vec<String> = code.iter().map(|v| format!("{v}")).collect();
            out.push_str(&text.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<AudioCodebook, AudioError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(AudioError::FeatureParse {
            line: 1,
            message: "empty codebook".into(),
        })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "audio_codebook" {
            return Err(AudioError::FeatureParse {
                line: 1,
                message: "expected `audio_codebook K D` header".into(),
            });
        }
        let mut codes = Vec::new();
        for (idx, line) in lines {
            let row: Result<Vec<f64>, _> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| AudioError::FeatureParse {
                        line: idx + 1,
                        message: format!("`{t}` is not a number"),
                    })
                })
                .collect();
            codes.push(row?);
        }
        Ok(AudioCodebook { codes })
    }
}

/// Cluster feature rows into `k_audio` discrete audio tokens (the same
/// k-means engine the motion quantizer uses, single layer).
pub fn quantize_audio(
    features: &FeatureMatrix,
    k_audio: usize,
    seed: u64,
) -> Result<(Vec<usize>, AudioCodebook), AudioError> {
    let result = kmeans(&features.rows, k_audio, seed, 50, 1e-8)?;
    Ok((
        result.assignments,
        AudioCodebook {
            codes: result.centroids,
        },
    ))
}

/// Token text: one integer per line.
pub fn write_audio_tokens(tokens: &[usize]) -> String {
    let mut out = String::new();
    for t in tokens {
        out.push_str(&format!("{t}\n"));
    }
    out
}

pub fn parse_audio_tokens(text: &str) -> Result<Vec<usize>, AudioError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| {
            l.trim().parse::<usize>().map_err(|_| AudioError::FeatureParse {
                line: idx + 1,
                message: format!("`{}` is not a token", l.trim()),
            })
        })
        .collect()
}
