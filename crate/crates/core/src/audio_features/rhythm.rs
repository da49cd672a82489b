//! Pitch-class, onset, and periodicity features: chromagram, spectral-flux
//! onset strength, and the autocorrelation tempogram.

use super::{AudioError, FeatureConfig};

/// Chromagram: each FFT bin's energy lands in pitch class
/// `(round(12*log2(f/440)) + 69) mod 12`; rows are L2-normalized, silent
/// rows stay zero.
pub fn chromagram(spectrogram: &[Vec<f64>], config: &FeatureConfig) -> Vec<Vec<f64>> {
    let n_bins = config.fft_size / 2 + 1;
    let bin_class: Vec<Option<usize>> = (0..n_bins)
        .map(|k| {
            if k == 0 {
                return None;
            }
            let f = k as f64 * config.sample_rate as f64 / config.fft_size as f64;
            let midi = (12.0 * (f / 440.0).log2()).round() as i64 + 69;
            Some(midi.rem_euclid(12) as usize)
        })
        .collect();
    spectrogram
        .iter()
        .map(|row| {
            let mut chroma = vec![0.0f64; 12];
            for (k, v) in row.iter().enumerate() {
                if let Some(c) = bin_class[k] {
                    chroma[c] += v;
                }
            }
            let norm: f64 = chroma.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                chroma.iter_mut().for_each(|v| *v /= norm);
            }
            chroma
        })
        .collect()
}

/// Spectral flux on log-compressed magnitudes:
/// `sum_k max(0, log(1+S[t][k]) - log(1+S[t-1][k]))`, frame 0 is 0.
pub fn onset_strength(spectrogram: &[Vec<f64>]) -> Result<Vec<f64>, AudioError> {
    if spectrogram.len() < 2 {
        return Err(AudioError::TooFewFrames {
            frames: spectrogram.len(),
            needed: 2,
        });
    }
    let mut out = vec![0.0];
    for t in 1..spectrogram.len() {
        let flux: f64 = spectrogram[t]
            .iter()
            .zip(&spectrogram[t - 1])
            .map(|(a, b)| ((1.0 + a).ln() - (1.0 + b).ln()).max(0.0))
            .sum();
        out.push(flux);
    }
    Ok(out)
}

/// Autocorrelation tempogram: for each frame, the onset envelope in a
/// centered window (zero-padded at the edges) is correlated with itself at
/// lags `1..=tempogram_window`, each lag normalized by the geometric mean
/// of the two segment energies so a constant envelope gives flat rows of
/// 1 and every value stays within [-1, 1].
pub fn tempogram(onset: &[f64], config: &FeatureConfig) -> Result<Vec<Vec<f64>>, AudioError> {
    let w = config.tempogram_window;
    if onset.len() < w {
        return Err(AudioError::TooFewFrames {
            frames: onset.len(),
            needed: w,
        });
    }
    let n = onset.len() as isize;
    let get = |i: isize| -> f64 {
        if i < 0 || i >= n {
            0.0
        } else {
            onset[i as usize]
        }
    };
    let half = w as isize;
    let mut out = Vec::with_capacity(onset.len());
    for t in 0..n {
        let mut row = Vec::with_capacity(w);
        for lag in 1..=w as isize {
            let mut num = 0.0;
            let mut e1 = 0.0;
            let mut e2 = 0.0;
            for i in (t - half)..=(t + half - lag) {
                let a = get(i);
                let b = get(i + lag);
                num += a * b;
                e1 += a * a;
                e2 += b * b;
            }
            let denom = (e1 * e2).sqrt();
            row.push(if denom > 0.0 { num / denom } else { 0.0 });
        }
        out.push(row);
    }
    Ok(out)
}
