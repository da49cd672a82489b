//! Deterministic demo data: the bundled robot description, a human BVH
//! skeleton, synthetic motion clips, and a synthetic speech-like WAV.
//!
//! Everything here is generated from fixed formulas so tests and the
//! `gen-fixtures` CLI subcommand produce bit-identical files on every run.

use std::f64::consts::TAU;

use crate::motion_io::{encode_wav_pcm16, parse_bvh, BvhDocument};

/// Bundled 29-DoF humanoid description (z-up, meters).
pub const G1_DESCRIPTION: &str = include_str!("../fixtures/g1_29dof.desc");

/// Bundled human skeleton (hierarchy only, one rest frame), z-up, meters.
pub const HUMAN_SKELETON_BVH: &str = include_str!("../fixtures/human_skeleton.bvh");

/// Bundled human-to-robot correspondence map.
pub const G1_CORRESPONDENCE: &str = include_str!("../fixtures/g1_from_human.map");

/// A gesture-like clip on the human fixture skeleton: the root sways
/// gently while arms, spine, and head move on incommensurate sinusoids.
/// `seconds` of motion at `rate` Hz.
pub fn gesture_bvh(seconds: f64, rate: f64) -> BvhDocument {
    let mut doc = parse_bvh(HUMAN_SKELETON_BVH).expect("bundled skeleton parses");
    let frames = (seconds * rate).round() as usize;
    let width = doc.total_channels();
    let mut rows = Vec::with_capacity(frames);
    for f in 0..frames {
        let t = f as f64 / rate;
        rows.push(gesture_frame(t, width));
    }
    doc.frames = rows;
    doc.frame_count = frames;
    doc.frame_time = 1.0 / rate;
    doc
}

/// One synthetic gesture frame. Channel order follows the fixture
/// skeleton's declaration order; indices derived from the hierarchy.
fn gesture_frame(t: f64, width: usize) -> Vec<f64> {
    let mut row = vec![0.0; width];
    // root: gentle sway, constant height
    row[0] = 0.03 * (0.31 * TAU * t).sin(); // x
    row[1] = 0.02 * (0.23 * TAU * t).sin(); // y
    row[2] = 0.93 + 0.01 * (0.41 * TAU * t).sin(); // z
    row[3] = 0.08 * (0.19 * TAU * t).sin(); // root yaw (Zrotation)

    let set3 = |row: &mut Vec<f64>, base: usize, z: f64, x: f64, y: f64| {
        row[base] = z;
        row[base + 1] = x;
        row[base + 2] = y;
    };

    // channel bases, root = 0..6, then 3 per joint in declaration order:
    // Spine 6, Chest 9, Neck 12, Head 15,
    // LeftArm 18, LeftForeArm 21, LeftHand 24,
    // RightArm 27, RightForeArm 30, RightHand 33,
    // LeftUpLeg 36, LeftLeg 39, LeftFoot 42,
    // RightUpLeg 45, RightLeg 48, RightFoot 51
    set3(&mut row, 6, 0.06 * (0.27 * TAU * t).sin(), 0.05 * (0.17 * TAU * t).sin(), 0.0);
    set3(&mut row, 9, 0.04 * (0.27 * TAU * t + 0.4).sin(), 0.03 * (0.13 * TAU * t).sin(), 0.0);
    set3(&mut row, 12, 0.05 * (0.37 * TAU * t).sin(), 0.04 * (0.29 * TAU * t).sin(), 0.0);
    set3(&mut row, 15, 0.06 * (0.43 * TAU * t).sin(), 0.05 * (0.31 * TAU * t).sin(), 0.0);
    // arms carry the gesture: larger, slower strokes
    set3(
        &mut row,
        18,
        0.5 * (0.53 * TAU * t).sin(),
        0.45 + 0.35 * (0.39 * TAU * t).sin(),
        0.2 * (0.21 * TAU * t).sin(),
    );
    set3(
        &mut row,
        21,
        0.0,
        0.6 + 0.5 * (0.47 * TAU * t + 0.9).sin(),
        0.15 * (0.33 * TAU * t).sin(),
    );
    set3(
        &mut row,
        24,
        0.2 * (0.61 * TAU * t).sin(),
        0.2 * (0.55 * TAU * t).sin(),
        0.0,
    );
    set3(
        &mut row,
        27,
        -0.5 * (0.51 * TAU * t + 0.5).sin(),
        0.45 + 0.35 * (0.37 * TAU * t + 1.3).sin(),
        -0.2 * (0.23 * TAU * t).sin(),
    );
    set3(
        &mut row,
        30,
        0.0,
        0.6 + 0.5 * (0.43 * TAU * t + 2.1).sin(),
        -0.15 * (0.31 * TAU * t).sin(),
    );
    set3(
        &mut row,
        33,
        -0.2 * (0.59 * TAU * t).sin(),
        0.2 * (0.53 * TAU * t + 0.7).sin(),
        0.0,
    );
    // legs: small weight shifts only
    set3(&mut row, 36, 0.04 * (0.23 * TAU * t).sin(), 0.05 * (0.19 * TAU * t).sin(), 0.0);
    set3(&mut row, 39, 0.0, 0.08 + 0.06 * (0.19 * TAU * t + 0.3).sin(), 0.0);
    set3(&mut row, 42, 0.0, -0.06 * (0.19 * TAU * t + 0.3).sin(), 0.0);
    set3(&mut row, 45, -0.04 * (0.23 * TAU * t + 1.0).sin(), 0.05 * (0.19 * TAU * t + 3.1).sin(), 0.0);
    set3(&mut row, 48, 0.0, 0.08 + 0.06 * (0.19 * TAU * t + 3.4).sin(), 0.0);
    set3(&mut row, 51, 0.0, -0.06 * (0.19 * TAU * t + 3.4).sin(), 0.0);
    row
}

/// A walk-like clip: the root advances along +x while the legs swing; feet
/// alternate stance phases during which the stance foot stays pinned in
/// world space (by construction of the hip/knee angles, approximately).
pub fn walk_bvh(seconds: f64, rate: f64) -> BvhDocument {
    let mut doc = parse_bvh(HUMAN_SKELETON_BVH).expect("bundled skeleton parses");
    let frames = (seconds * rate).round() as usize;
    let width = doc.total_channels();
    let stride_hz = 0.8; // full gait cycle per 1.25 s
    let speed = 0.3; // m/s forward
    let mut rows = Vec::with_capacity(frames);
    for f in 0..frames {
        let t = f as f64 / rate;
        let mut row = vec![0.0; width];
        let phase = TAU * stride_hz * t;
        row[0] = speed * t; // x advance
        row[1] = 0.015 * phase.sin(); // lateral sway
        row[2] = 0.93 + 0.008 * (2.0 * phase).cos();
        // arms counter-swing a little
        row[18 + 1] = 0.15 * phase.sin() + 0.4;
        row[27 + 1] = -0.15 * phase.sin() + 0.4;
        // legs: hip pitch sinusoids in antiphase, knees flex in swing
        let swing_l = phase.sin();
        let swing_r = (phase + std::f64::consts::PI).sin();
        row[36 + 1] = 0.35 * swing_l;
        row[39 + 1] = 0.25 * (1.0 - swing_l).max(0.0);
        row[42 + 1] = -0.15 * swing_l;
        row[45 + 1] = 0.35 * swing_r;
        row[48 + 1] = 0.25 * (1.0 - swing_r).max(0.0);
        row[51 + 1] = -0.15 * swing_r;
        rows.push(row);
    }
    doc.frames = rows;
    doc.frame_count = frames;
    doc.frame_time = 1.0 / rate;
    doc
}

/// Speech-like test audio: a few sustained vowel-ish tones with a 2 Hz
/// amplitude pulse train layered on top, PCM16 mono.
pub fn speech_wav(seconds: f64, sample_rate: u32) -> Vec<u8> {
    let n = (seconds * sample_rate as f64) as usize;
    let sr = sample_rate as f64;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / sr;
        // slowly wandering "formants"
        let f0 = 160.0 + 40.0 * (0.37 * TAU * t).sin();
        let f1 = 440.0 + 120.0 * (0.11 * TAU * t).sin();
        let voiced = 0.35 * (TAU * f0 * t).sin() + 0.2 * (TAU * f1 * t).sin();
        // 2 Hz click train for rhythm
        let beat_phase = (2.0 * t).fract();
        let click = if beat_phase < 0.02 { 0.4 * (1.0 - beat_phase / 0.02) } else { 0.0 };
        // syllable-rate amplitude envelope
        let env = 0.55 + 0.45 * (3.1 * TAU * t).sin().powi(2);
        samples.push((voiced * env + click).clamp(-1.0, 1.0));
    }
    encode_wav_pcm16(sample_rate, 1, &samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_skeleton_parses() {
        let doc = parse_bvh(HUMAN_SKELETON_BVH).unwrap();
        assert_eq!(doc.total_channels(), 6 + 3 * 16);
    }

    #[test]
    fn gesture_clip_has_requested_shape() {
        let doc = gesture_bvh(2.0, 30.0);
        assert_eq!(doc.frame_count, 60);
        assert_eq!(doc.frames.len(), 60);
        assert!((doc.frame_rate() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(gesture_bvh(1.0, 30.0), gesture_bvh(1.0, 30.0));
        assert_eq!(speech_wav(0.5, 16_000), speech_wav(0.5, 16_000));
    }
}
