//! Shared spectral front end: Hann-windowed power spectrogram.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{AudioError, FeatureConfig};

/// Power spectrogram: frame `t` covers samples `[t*hop, t*hop + fft_size)`,
/// Hann-windowed, magnitude-squared DFT, bins `0..=fft_size/2`.
pub fn power_spectrogram(
    samples: &[f64],
    config: &FeatureConfig,
) -> Result<Vec<Vec<f64>>, AudioError> {
    config.validate()?;
    let n = config.fft_size;
    if samples.len() < n {
        return Err(AudioError::AudioTooShort {
            samples: samples.len(),
            fft_size: n,
        });
    }
    let frames = (samples.len() - n) / config.hop + 1;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut out = Vec::with_capacity(frames);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for t in 0..frames {
        let start = t * config.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..=n / 2].iter().map(|c| c.norm_sqr()).collect());
    }
    Ok(out)
}

/// Quadratic-time DFT power spectrum of one frame. Test oracle: kept free
/// of any FFT machinery.
pub fn naive_dft_power(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    let mut out = Vec::with_capacity(n / 2 + 1);
    for k in 0..=n / 2 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, x) in frame.iter().enumerate() {
            let phase = -std::f64::consts::TAU * k as f64 * i as f64 / n as f64;
            re += x * phase.cos();
            im += x * phase.sin();
        }
        out.push(re * re + im * im);
    }
    out
}
