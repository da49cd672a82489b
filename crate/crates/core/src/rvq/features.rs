//! Per-frame motion features for the quantizer: a documented channel
//! subset per body part, concatenated over a sliding window of frames.
//!
//! The robot has no fingers, so the "hand" part covers the arm chains from
//! the shoulders through the wrists; the body part covers legs, waist, and
//! the root height.

use super::RvqError;
use crate::retarget::RobotMotion;

/// Which half of the motion a model covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Body,
    Hand,
}

impl Part {
    pub fn tag(self) -> &'static str {
        match self {
            Part::Body => "body",
            Part::Hand => "hand",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Part> {
        match tag {
            "body" => Some(Part::Body),
            "hand" => Some(Part::Hand),
            _ => None,
        }
    }

    /// Channel names this part reads and reconstructs, in order. The body
    /// part leads with the root height.
    pub fn channel_names(self) -> Vec<&'static str> {
        match self {
            Part::Body => vec![
                "root_pos_z",
                "left_hip_pitch_joint",
                "left_hip_roll_joint",
                "left_hip_yaw_joint",
                "left_knee_joint",
                "left_ankle_pitch_joint",
                "left_ankle_roll_joint",
                "right_hip_pitch_joint",
                "right_hip_roll_joint",
                "right_hip_yaw_joint",
                "right_knee_joint",
                "right_ankle_pitch_joint",
                "right_ankle_roll_joint",
                "waist_yaw_joint",
                "waist_roll_joint",
                "waist_pitch_joint",
            ],
            Part::Hand => vec![
                "left_shoulder_pitch_joint",
                "left_shoulder_roll_joint",
                "left_shoulder_yaw_joint",
                "left_elbow_joint",
                "left_wrist_roll_joint",
                "left_wrist_pitch_joint",
                "left_wrist_yaw_joint",
                "right_shoulder_pitch_joint",
                "right_shoulder_roll_joint",
                "right_shoulder_yaw_joint",
                "right_elbow_joint",
                "right_wrist_roll_joint",
                "right_wrist_pitch_joint",
                "right_wrist_yaw_joint",
            ],
        }
    }
}

/// Extract the part's raw per-frame channel rows from a motion.
pub fn select_channels(motion: &RobotMotion, part: Part) -> Result<Vec<Vec<f64>>, RvqError> {
    let names = part.channel_names();
    let mut sources = Vec::with_capacity(names.len());
    for name in &names {
        if *name == "root_pos_z" {
            sources.push(None);
        } else {
            let idx = motion
                .joint_names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| RvqError::MissingChannel((*name).to_string()))?;
            sources.push(Some(idx));
        }
    }
    Ok(motion
        .frames
        .iter()
        .map(|f| {
            sources
                .iter()
                .map(|s| match s {
                    None => f.root_position.z,
                    Some(i) => f.joint_angles[*i],
                })
                .collect()
        })
        .collect())
}

/// Concatenate `window` consecutive rows into one feature frame, sliding
/// by one: `n` rows become `n - window + 1` features of width
/// `window * channels`.
pub fn frame_windows(rows: &[Vec<f64>], window: usize) -> Result<Vec<Vec<f64>>, RvqError> {
    if window == 0 {
        return Err(RvqError::BadWindow(window));
    }
    if rows.len() < window {
        return Err(RvqError::ClipShorterThanWindow {
            frames: rows.len(),
            window,
        });
    }
    Ok(rows
        .windows(window)
        .map(|w| w.iter().flatten().copied().collect())
        .collect())
}

/// Inverse of [`frame_windows`]: overlap-average the windowed rows back to
/// per-frame channels. Exact framing reproduces the original rows.
pub fn unframe_windows(features: &[Vec<f64>], window: usize, channels: usize) -> Vec<Vec<f64>> {
    if features.is_empty() {
        return Vec::new();
    }
    let m = features.len();
    let n = m + window - 1;
    let mut sums = vec![vec![0.0; channels]; n];
    let mut counts = vec![0usize; n];
    for (t, feat) in features.iter().enumerate() {
        for k in 0..window {
            let frame = t + k;
            counts[frame] += 1;
            for c in 0..channels {
                sums[frame][c] += feat[k * channels + c];
            }
        }
    }
    for (row, count) in sums.iter_mut().zip(&counts) {
        let inv = 1.0 / *count as f64;
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
    sums
}

/// Raw (un-normalized) feature frames for a motion: `window` stacked
/// frames of the part's channel subset.
pub fn frame_features(
    motion: &RobotMotion,
    part: Part,
    window: usize,
) -> Result<Vec<Vec<f64>>, RvqError> {
    frame_windows(&select_channels(motion, part)?, window)
}
