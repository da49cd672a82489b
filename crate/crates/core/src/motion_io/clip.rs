//! Canonical time-indexed channel matrix shared by every pipeline stage,
//! plus linear resampling and the plain-text interchange format.

use thiserror::Error;

use super::bvh::{BvhDocument, BvhJoint};

/// A motion clip: named channels sampled at a fixed rate. Positions are in
/// meters, angles in radians; time is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionClip {
    pub channel_names: Vec<String>,
    pub frame_rate: f64,
    /// Row-major `[frames x channels]`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ClipError {
    #[error("clip has no frames")]
    Empty,
    #[error("frame rate must be finite and positive, got {0}")]
    BadFrameRate(f64),
    #[error("row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("clip text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("channel `{0}` not found")]
    UnknownChannel(String),
}

impl MotionClip {
    pub fn new(
        channel_names: Vec<String>,
        frame_rate: f64,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, ClipError> {
        if !(frame_rate.is_finite() && frame_rate > 0.0) {
            return Err(ClipError::BadFrameRate(frame_rate));
        }
        let width = channel_names.len();
        for (row, r) in values.iter().enumerate() {
            if r.len() != width {
                return Err(ClipError::RaggedRow {
                    row,
                    expected: width,
                    found: r.len(),
                });
            }
        }
        Ok(MotionClip {
            channel_names,
            frame_rate,
            values,
        })
    }

    pub fn frame_count(&self) -> usize {
        self.values.len()
    }

    pub fn channel_index(&self, name: &str) -> Result<usize, ClipError> {
        self.channel_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ClipError::UnknownChannel(name.to_string()))
    }

    pub fn channel(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[index])
    }

    pub fn duration(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            (self.values.len() - 1) as f64 / self.frame_rate
        }
    }
}

/// Flatten a BVH document into a clip. Channel names are
/// `<joint>.<Channel>` in depth-first declaration order.
pub fn bvh_to_clip(doc: &BvhDocument) -> MotionClip {
    fn names(j: &BvhJoint, out: &mut Vec<String>) {
        for ch in &j.channels {
            out.push(format!("{}.{ch}", j.name));
        }
        for c in &j.children {
            names(c, out);
        }
    }
    let mut channel_names = Vec::new();
    names(&doc.root, &mut channel_names);
    MotionClip {
        channel_names,
        frame_rate: doc.frame_rate(),
        values: doc.frames.clone(),
    }
}

/// Write BVH-sourced channel values back into a document's frame matrix.
pub fn clip_into_bvh(clip: &MotionClip, doc: &mut BvhDocument) -> Result<(), ClipError> {
    let expected = doc.total_channels();
    if clip.channel_names.len() != expected {
        return Err(ClipError::RaggedRow {
            row: 0,
            expected,
            found: clip.channel_names.len(),
        });
    }
    doc.frames = clip.values.clone();
    doc.frame_count = clip.values.len();
    doc.frame_time = 1.0 / clip.frame_rate;
    Ok(())
}

/// Resample to `target_rate` by per-channel linear interpolation. Duration
/// is preserved within one frame period; resampling at the source rate
/// returns the values unchanged.
pub fn resample_clip(clip: &MotionClip, target_rate: f64) -> Result<MotionClip, ClipError> {
    if clip.values.is_empty() {
        return Err(ClipError::Empty);
    }
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(ClipError::BadFrameRate(target_rate));
    }
    if target_rate == clip.frame_rate {
        return Ok(clip.clone());
    }
    let n = clip.values.len();
    let duration = (n - 1) as f64 / clip.frame_rate;
    let out_frames = (duration * target_rate).floor() as usize + 1;
    let mut values = Vec::with_capacity(out_frames);
    for i in 0..out_frames {
        let s = (i as f64 / target_rate) * clip.frame_rate;
        let lo = (s.floor() as usize).min(n - 1);
        let hi = (lo + 1).min(n - 1);
        let u = s - lo as f64;
        let row: Vec<f64> = clip.values[lo]
            .iter()
            .zip(&clip.values[hi])
            .map(|(a, b)| a + u * (b - a))
            .collect();
        values.push(row);
    }
    Ok(MotionClip {
        channel_names: clip.channel_names.clone(),
        frame_rate: target_rate,
        values,
    })
}

/// Serialize to the interchange format: one header line holding the frame
/// rate and the channel names, then one whitespace-separated row per frame.
pub fn write_clip(clip: &MotionClip) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}", clip.frame_rate));
    for name in &clip.channel_names {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for row in &clip.values {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn parse_clip(text: &str) -> Result<MotionClip, ClipError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(ClipError::Empty)?;
    let mut toks = header.split_whitespace();
    let rate_tok = toks.next().ok_or(ClipError::Parse {
        line: 1,
        message: "empty header".into(),
    })?;
    let frame_rate: f64 = rate_tok.parse().map_err(|_| ClipError::Parse {
        line: 1,
        message: format!("bad frame rate `{rate_tok}`"),
    })?;
    let channel_names: Vec<String> = toks.map(str::to_string).collect();
    let mut values = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| ClipError::Parse {
                    line: idx + 1,
                    message: format!("`{t}` is not a number"),
                })
            })
            .collect();
        let row = row?;
        if row.len() != channel_names.len() {
            return Err(ClipError::RaggedRow {
                row: values.len(),
                expected: channel_names.len(),
                found: row.len(),
            });
        }
        values.push(row);
    }
    MotionClip::new(channel_names, frame_rate, values)
}
