//! Mel-frequency cepstral coefficients and their time deltas.

use super::{AudioError, FeatureConfig};

const LOG_FLOOR: f64 = 1e-10;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank `[mel_bands x (fft_size/2 + 1)]` on the HTK
/// mel scale, spanning 0 Hz to Nyquist.
pub fn mel_filterbank(config: &FeatureConfig) -> Vec<Vec<f64>> {
    let n_bins = config.fft_size / 2 + 1;
    let nyquist = config.sample_rate as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..config.mel_bands + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (config.mel_bands + 1) as f64))
        .collect();
    let bin_freq =
        |k: usize| -> f64 { k as f64 * config.sample_rate as f64 / config.fft_size as f64 };

    let mut bank = vec![vec![0.0; n_bins]; config.mel_bands];
    for m in 0..config.mel_bands {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        for k in 0..n_bins {
            let f = bin_freq(k);
            let w = if f <= left || f >= right {
                0.0
            } else if f <= center {
                (f - left) / (center - left)
            } else {
                (right - f) / (right - center)
            };
            bank[m][k] = w;
        }
    }
    bank
}

/// MFCCs: log mel filterbank energies (floored at 1e-10) followed by a
/// type-II DCT, keeping the first `mfcc_count` coefficients.
pub fn mfcc(spectrogram: &[Vec<f64>], config: &FeatureConfig) -> Vec<Vec<f64>> {
    let bank = mel_filterbank(config);
    let m_bands = config.mel_bands;
    spectrogram
        .iter()
        .map(|row| {
            let log_e: Vec<f64> = bank
                .iter()
                .map(|filt| {
                    let e: f64 = filt.iter().zip(row).map(|(w, s)| w * s).sum();
                    e.max(LOG_FLOOR).ln()
                })
                .collect();
            (0..config.mfcc_count)
                .map(|i| {
                    log_e
                        .iter()
                        .enumerate()
                        .map(|(m, e)| {
                            e * (std::f64::consts::PI * i as f64 * (m as f64 + 0.5)
                                / m_bands as f64)
                                .cos()
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Five-point regression slope per coefficient (the standard N=2 delta
/// window), with replicated edge frames.
pub fn delta(features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, AudioError> {
    let n = features.len();
    if n < 3 {
        return Err(AudioError::TooFewFrames { frames: n, needed: 3 });
    }
    let width = features[0].len();
    let clamp = |t: isize| -> &Vec<f64> { &features[t.clamp(0, n as isize - 1) as usize] };
    let denom = 2.0 * (1.0 + 4.0); // 2 * sum n^2 for n = 1..2
    Ok((0..n)
        .map(|t| {
            (0..width)
                .map(|c| {
                    let mut acc = 0.0;
                    for k in 1..=2isize {
                        acc += k as f64
                            * (clamp(t as isize + k)[c] - clamp(t as isize - k)[c]);
                    }
                    acc / denom
                })
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_features::power_spectrogram;

    fn config() -> FeatureConfig {
        FeatureConfig {
            fft_size: 512,
            hop: 256,
            mel_bands: 20,
            mfcc_count: 8,
            ..FeatureConfig::default()
        }
    }

    #[test]
    fn silence_yields_constant_mfcc_rows() {
        let cfg = config();
        let spec = power_spectrogram(&vec![0.0; 4096], &cfg).unwrap();
        let coeffs = mfcc(&spec, &cfg);
        for row in &coeffs {
            assert_eq!(row, &coeffs[0]);
        }
        // all mel energies floor to the same value, so only c0 is nonzero
        for c in &coeffs[0][1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn doubling_amplitude_shifts_only_the_first_coefficient() {
        // broadband signal so every mel band sits above the log floor
        // (floored bands would not shift with gain and would leak the
        // change into higher coefficients)
        let cfg = config();
        let noise: Vec<f64> = (0..4096)
            .map(|i| 0.3 * (((i as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5))
            .collect();
        let doubled: Vec<f64> = noise.iter().map(|s| 2.0 * s).collect();
        let a = mfcc(&power_spectrogram(&noise, &cfg).unwrap(), &cfg);
        let b = mfcc(&power_spectrogram(&doubled, &cfg).unwrap(), &cfg);
        for (ra, rb) in a.iter().zip(&b) {
            assert!((rb[0] - ra[0]).abs() > 1e-6, "c0 must move with gain");
            for (ca, cb) in ra[1..].iter().zip(&rb[1..]) {
                assert!((ca - cb).abs() < 1e-6, "{ca} vs {cb}");
            }
        }
    }

    #[test]
    fn filterbank_rows_are_positive_and_band_limited() {
        let cfg = config();
        let bank = mel_filterbank(&cfg);
        let bin_freq = |k: usize| k as f64 * cfg.sample_rate as f64 / cfg.fft_size as f64;
        let nyquist = cfg.sample_rate as f64 / 2.0;
        for (m, row) in bank.iter().enumerate() {
            let total: f64 = row.iter().sum();
            assert!(total > 0.0, "filter {m} sums to {total}");
            // support inside (0, nyquist]; the top edge can round to
            // exactly nyquist
            for (k, w) in row.iter().enumerate() {
                if *w > 0.0 {
                    assert!(bin_freq(k) > 0.0 && bin_freq(k) <= nyquist);
                }
            }
        }
    }

    #[test]
    fn delta_of_constants_is_zero_and_ramps_are_exact() {
        let constant = vec![vec![3.0, -1.0]; 10];
        for row in delta(&constant).unwrap() {
            assert_eq!(row, vec![0.0, 0.0]);
        }
        let ramp: Vec<Vec<f64>> = (0..10).map(|t| vec![0.25 * t as f64]).collect();
        let d = delta(&ramp).unwrap();
        for row in &d[2..8] {
            assert!((row[0] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_matches_least_squares_slope_oracle() {
        // slope of the best-fit line through (k, x_{t+k}) for k in -2..=2
        let values: Vec<Vec<f64>> = (0..30)
            .map(|t| vec![((t * 37 % 11) as f64).sin() + 0.1 * t as f64])
            .collect();
        let d = delta(&values).unwrap();
        for t in 2..28 {
            let pts: Vec<(f64, f64)> = (-2..=2)
                .map(|k| (k as f64, values[(t as isize + k) as usize][0]))
                .collect();
            let mean_x = 0.0;
            let mean_y: f64 = pts.iter().map(|(_, y)| y).sum::<f64>() / 5.0;
            let num: f64 = pts.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
            let den: f64 = pts.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
            let slope = num / den;
            assert!((d[t][0] - slope).abs() < 1e-9, "{} vs {slope}", d[t][0]);
        }
    }

    #[test]
    fn too_few_frames_error() {
        assert!(matches!(
            delta(&[vec![0.0], vec![0.0]]),
            Err(AudioError::TooFewFrames { frames: 2, needed: 3 })
        ));
    }
}
