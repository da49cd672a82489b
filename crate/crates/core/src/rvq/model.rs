//! Residual codebook stack: training, greedy encode, additive decode, and
//! the binary model format.

use super::features::{frame_features, select_channels, unframe_windows, Part};
use super::kmeans::{kmeans, nearest, squared_distance};
use super::{RvqError, TokenStack};
use crate::motion_io::MotionClip;
use crate::retarget::RobotMotion;

/// One quantization layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// `[K x D]` code vectors.
    pub codes: Vec<Vec<f64>>,
    /// Training-set assignment counts per code.
    pub usage_counts: Vec<u64>,
}

/// A trained residual quantizer for one body part: `layers.len()` stacked
/// codebooks over z-normalized windowed motion features.
#[derive(Debug, Clone, PartialEq)]
pub struct RvqModel {
    pub part: Part,
    pub layers: Vec<Codebook>,
    /// Per-dimension normalization: `z = (x - mean) / scale`.
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub frame_window: usize,
}

impl RvqModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn codes_per_layer(&self) -> usize {
        self.layers.first().map(|c| c.codes.len()).unwrap_or(0)
    }

    pub fn channels(&self) -> usize {
        self.dim() / self.frame_window
    }

    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| x * s + m)
            .collect()
    }
}

/// Train an `layers x codes` residual quantizer on a motion dataset.
/// Layer `l` runs k-means on the residuals left by layers `0..l`; empty
/// clusters are reseeded to the worst-quantized sample each round. The
/// whole procedure is deterministic for a fixed seed and input order.
pub fn train_rvq(
    motions: &[&RobotMotion],
    part: Part,
    layers: usize,
    codes: usize,
    window: usize,
    seed: u64,
) -> Result<RvqModel, RvqError> {
    if layers == 0 {
        return Err(RvqError::NoLayers);
    }
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for m in motions {
        raw.extend(frame_features(m, part, window)?);
    }
    if raw.is_empty() {
        return Err(RvqError::EmptyDataset);
    }
    let dim = raw[0].len();
    let n = raw.len();

    // z-normalization statistics with a floor so constant channels stay
    // finite
    let mut mean = vec![0.0; dim];
    for row in &raw {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; dim];
    for row in &raw {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale: Vec<f64> = var
        .iter()
        .map(|s| (s / n as f64).sqrt().max(1e-8))
        .collect();

    let mut residuals: Vec<Vec<f64>> = raw
        .iter()
        .map(|row| {
            row.iter()
                .zip(mean.iter().zip(&scale))
                .map(|(x, (m, s))| (x - m) / s)
                .collect()
        })
        .collect();

    let mut books = Vec::with_capacity(layers);
    for layer in 0..layers {
        let result = kmeans(
            &residuals,
            codes,
            seed.wrapping_mul(1_000_003).wrapping_add(layer as u64),
            50,
            1e-8,
        )?;
        let mut usage = vec![0u64; codes];
        for (row, &a) in residuals.iter_mut().zip(&result.assignments) {
            usage[a] += 1;
            for (r, c) in row.iter_mut().zip(&result.centroids[a]) {
                *r -= c;
            }
        }
        books.push(Codebook {
            codes: result.centroids,
            usage_counts: usage,
        });
    }

    Ok(RvqModel {
        part,
        layers: books,
        mean,
        scale,
        frame_window: window,
    })
}

/// Greedy residual encoding of raw feature frames (one token per layer per
/// frame, nearest code by Euclidean distance, lowest index on ties).
pub fn encode_features(model: &RvqModel, raw_features: &[Vec<f64>]) -> Result<TokenStack, RvqError> {
    let mut tokens = Vec::with_capacity(raw_features.len());
    for row in raw_features {
        if row.len() != model.dim() {
            return Err(RvqError::DimensionMismatch {
                expected: model.dim(),
                found: row.len(),
            });
        }
        let mut residual = model.normalize(row);
        let mut frame_tokens = Vec::with_capacity(model.layers.len());
        for book in &model.layers {
            let idx = nearest(&residual, &book.codes);
            for (r, c) in residual.iter_mut().zip(&book.codes[idx]) {
                *r -= c;
            }
            frame_tokens.push(idx);
        }
        tokens.push(frame_tokens);
    }
    Ok(TokenStack {
        part: model.part,
        tokens,
    })
}

/// Encode a motion through the model's channel selection and windowing.
pub fn encode(model: &RvqModel, motion: &RobotMotion) -> Result<TokenStack, RvqError> {
    let raw = frame_features(motion, model.part, model.frame_window)?;
    encode_features(model, &raw)
}

/// Sum the indexed codes per frame: the normalized latent reconstruction.
pub fn decode_latents(model: &RvqModel, stack: &TokenStack) -> Result<Vec<Vec<f64>>, RvqError> {
    if model.layers.is_empty() {
        return Err(RvqError::NoLayers);
    }
    let mut out = Vec::with_capacity(stack.tokens.len());
    for (t, frame) in stack.tokens.iter().enumerate() {
        if frame.len() != model.layers.len() {
            return Err(RvqError::LayerCountMismatch {
                expected: model.layers.len(),
                found: frame.len(),
            });
        }
        let mut acc = vec![0.0; model.dim()];
        for (book, &idx) in model.layers.iter().zip(frame) {
            let code = book.codes.get(idx).ok_or(RvqError::TokenOutOfRange {
                frame: t,
                token: idx,
                codes: book.codes.len(),
            })?;
            for (a, c) in acc.iter_mut().zip(code) {
                *a += c;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Decode tokens all the way back to a channel clip: indexed codes are
/// summed, de-normalized, and overlap-averaged into per-frame channels.
pub fn decode_to_clip(
    model: &RvqModel,
    stack: &TokenStack,
    frame_rate: f64,
) -> Result<MotionClip, RvqError> {
    let latents = decode_latents(model, stack)?;
    let denorm: Vec<Vec<f64>> = latents.iter().map(|z| model.denormalize(z)).collect();
    let rows = unframe_windows(&denorm, model.frame_window, model.channels());
    Ok(MotionClip {
        channel_names: model
            .part
            .channel_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        frame_rate,
        values: rows,
    })
}

/// Cumulative reconstruction MSE in normalized feature space after using
/// only the first `l` layers, for `l = 1..=layers`. Non-increasing on the
/// training data by construction.
pub fn reconstruction_error(model: &RvqModel, motion: &RobotMotion) -> Result<Vec<f64>, RvqError> {
    let raw = frame_features(motion, model.part, model.frame_window)?;
    let n_entries = (raw.len() * model.dim()) as f64;
    let mut residuals: Vec<Vec<f64>> = raw.iter().map(|r| model.normalize(r)).collect();
    let mut curve = Vec::with_capacity(model.layers.len());
    for book in &model.layers {
        for row in residuals.iter_mut() {
            let idx = nearest(row, &book.codes);
            for (r, c) in row.iter_mut().zip(&book.codes[idx]) {
                *r -= c;
            }
        }
        let sq: f64 = residuals
            .iter()
            .map(|row| row.iter().map(|v| v * v).sum::<f64>())
            .sum();
        curve.push(sq / n_entries);
    }
    Ok(curve)
}

/// Round-trip a motion through the quantizer and report the mean
/// per-channel RMSE in channel units (radians for joint channels).
pub fn reconstruction_rmse(model: &RvqModel, motion: &RobotMotion) -> Result<f64, RvqError> {
    let stack = encode(model, motion)?;
    let recon = decode_to_clip(model, &stack, motion.frame_rate)?;
    let original = select_channels(motion, model.part)?;
    let channels = model.channels();
    let frames = original.len();
    let mut mean_rmse = 0.0;
    for c in 0..channels {
        let sum_sq: f64 = (0..frames)
            .map(|t| (original[t][c] - recon.values[t][c]).powi(2))
            .sum();
        mean_rmse += (sum_sq / frames as f64).sqrt();
    }
    Ok(mean_rmse / channels as f64)
}

const MAGIC: &[u8; 4] = b"RVQ1";

/// Binary model layout: magic `RVQ1`; little-endian u32 dims
/// `L, K, D, window, part` (part: 0 = body, 1 = hand); `D` f64 means;
/// `D` f64 scales; then `L*K*D` f64 code values, layer-major, row-major.
pub fn write_model(model: &RvqModel) -> Vec<u8> {
    let l = model.layers.len();
    let k = model.codes_per_layer();
    let d = model.dim();
    let mut out = Vec::with_capacity(4 + 20 + 8 * (2 * d + l * k * d));
    out.extend_from_slice(MAGIC);
    for v in [
        l as u32,
        k as u32,
        d as u32,
        model.frame_window as u32,
        match model.part {
            Part::Body => 0u32,
            Part::Hand => 1u32,
        },
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in model.mean.iter().chain(&model.scale) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for book in &model.layers {
        for code in &book.codes {
            for v in code {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn read_model(bytes: &[u8]) -> Result<RvqModel, RvqError> {
    if bytes.len() < 24 || &bytes[0..4] != MAGIC {
        return Err(RvqError::BadModelFile("missing RVQ1 magic".into()));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    let (l, k, d, window, part_code) = (u32_at(4), u32_at(8), u32_at(12), u32_at(16), u32_at(20));
    let part = match part_code {
        0 => Part::Body,
        1 => Part::Hand,
        other => return Err(RvqError::BadModelFile(format!("unknown part code {other}"))),
    };
    let needed = 24 + 8 * (2 * d + l * k * d);
    if bytes.len() < needed {
        return Err(RvqError::BadModelFile(format!(
            "file has {} bytes, layout needs {needed}",
            bytes.len()
        )));
    }
    let mut off = 24;
    let mut f64_at = || -> f64 {
        let v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        off += 8;
        v
    };
    let mean: Vec<f64> = (0..d).map(|_| f64_at()).collect();
    let scale: Vec<f64> = (0..d).map(|_| f64_at()).collect();
    let mut layers = Vec::with_capacity(l);
    for _ in 0..l {
        let codes: Vec<Vec<f64>> = (0..k).map(|_| (0..d).map(|_| f64_at()).collect()).collect();
        layers.push(Codebook {
            usage_counts: vec![0; codes.len()],
            codes,
        });
    }
    Ok(RvqModel {
        part,
        layers,
        mean,
        scale,
        frame_window: window,
    })
}

/// Residual norm of the best single combination found by exhaustive search
/// over all `K^L` code sums. Test oracle for the greedy encoder.
pub fn exhaustive_best_residual(model: &RvqModel, raw: &[f64]) -> f64 {
    let z = model.normalize(raw);
    let mut best = f64::MAX;
    let k = model.codes_per_layer();
    let l = model.layers.len();
    let mut combo = vec![0usize; l];
    loop {
        let mut acc = vec![0.0; model.dim()];
        for (layer, &idx) in combo.iter().enumerate() {
            for (a, c) in acc.iter_mut().zip(&model.layers[layer].codes[idx]) {
                *a += c;
            }
        }
        best = best.min(squared_distance(&z, &acc));
        // odometer increment
        let mut pos = 0;
        loop {
            combo[pos] += 1;
            if combo[pos] < k {
                break;
            }
            combo[pos] = 0;
            pos += 1;
            if pos == l {
                return best.sqrt();
            }
        }
    }
}

/// Residual norm left by the greedy path for one raw feature frame.
pub fn greedy_residual(model: &RvqModel, raw: &[f64]) -> f64 {
    let mut residual = model.normalize(raw);
    for book in &model.layers {
        let idx = nearest(&residual, &book.codes);
        for (r, c) in residual.iter_mut().zip(&book.codes[idx]) {
            *r -= c;
        }
    }
    residual.iter().map(|v| v * v).sum::<f64>().sqrt()
}
