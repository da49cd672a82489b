//! BVH (Biovision Hierarchy) reader and writer.
//!
//! The HIERARCHY section is parsed into a [`BvhJoint`] tree, the MOTION
//! section into a frame matrix. Rotation channels are converted from the
//! file's degrees into radians; [`write_bvh`] converts back.

use std::fmt;

use thiserror::Error;

/// One degree of freedom declared in a CHANNELS line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvhChannel {
    XPosition,
    YPosition,
    ZPosition,
    XRotation,
    YRotation,
    ZRotation,
}

impl BvhChannel {
    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            BvhChannel::XRotation | BvhChannel::YRotation | BvhChannel::ZRotation
        )
    }

    fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "Xposition" => Some(BvhChannel::XPosition),
            "Yposition" => Some(BvhChannel::YPosition),
            "Zposition" => Some(BvhChannel::ZPosition),
            "Xrotation" => Some(BvhChannel::XRotation),
            "Yrotation" => Some(BvhChannel::YRotation),
            "Zrotation" => Some(BvhChannel::ZRotation),
            _ => None,
        }
    }

    fn token(self) -> &'static str {
        match self {
            BvhChannel::XPosition => "Xposition",
            BvhChannel::YPosition => "Yposition",
            BvhChannel::ZPosition => "Zposition",
            BvhChannel::XRotation => "Xrotation",
            BvhChannel::YRotation => "Yrotation",
            BvhChannel::ZRotation => "Zrotation",
        }
    }
}

impl fmt::Display for BvhChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A joint in the BVH hierarchy. End sites are modeled as joints with
/// `is_end_site = true`, no channels, and no children.
#[derive(Debug, Clone, PartialEq)]
pub struct BvhJoint {
    pub name: String,
    /// Offset from the parent joint, in the document's length unit.
    pub offset: [f64; 3],
    pub channels: Vec<BvhChannel>,
    pub children: Vec<BvhJoint>,
    pub is_end_site: bool,
}

impl BvhJoint {
    /// Channel count summed over this joint and all descendants,
    /// depth-first in declaration order.
    pub fn total_channels(&self) -> usize {
        self.channels.len() + self.children.iter().map(|c| c.total_channels()).sum::<usize>()
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        if !self.is_end_site {
            out.push(&self.name);
        }
        for c in &self.children {
            c.collect_names(out);
        }
    }

    fn max_height(&self, base: f64) -> f64 {
        let here = base + self.offset[1].abs().max(self.offset[2].abs());
        self.children
            .iter()
            .map(|c| c.max_height(here))
            .fold(here, f64::max)
    }
}

/// A parsed BVH document. Rotation values in `frames` are radians;
/// position values and offsets are in the document's length unit
/// (see [`UnitPolicy`]).
#[derive(Debug, Clone, PartialEq)]
pub struct BvhDocument {
    pub root: BvhJoint,
    pub frame_count: usize,
    /// Seconds per frame, always positive.
    pub frame_time: f64,
    /// Row-major `[frame_count x total_channels]`.
    pub frames: Vec<Vec<f64>>,
}

impl BvhDocument {
    pub fn total_channels(&self) -> usize {
        self.root.total_channels()
    }

    pub fn frame_rate(&self) -> f64 {
        1.0 / self.frame_time
    }

    /// Joint names in depth-first declaration order, end sites excluded.
    pub fn joint_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_names(&mut out);
        out
    }

    /// Rough extent of the skeleton along its tallest offset chain. Used by
    /// the centimeter heuristic: human BVH exports in centimeters come out
    /// around 90-180 here, meter exports below 2.
    pub fn skeleton_height(&self) -> f64 {
        self.root.max_height(0.0)
    }

    /// Scale all offsets and position channels by `factor` in place.
    pub fn scale_lengths(&mut self, factor: f64) {
        fn rec(j: &mut BvhJoint, f: f64) {
            for o in &mut j.offset {
                *o *= f;
            }
            for c in &mut j.children {
                rec(c, f);
            }
        }
        rec(&mut self.root, factor);
        let flags = position_flags(&self.root);
        for row in &mut self.frames {
            for (v, is_pos) in row.iter_mut().zip(&flags) {
                if *is_pos {
                    *v *= factor;
                }
            }
        }
    }

    /// Apply a unit policy, returning the scale factor that was used.
    pub fn normalize_units(&mut self, policy: UnitPolicy) -> f64 {
        let factor = match policy {
            UnitPolicy::Meters => 1.0,
            UnitPolicy::Centimeters => 0.01,
            UnitPolicy::Auto => {
                if self.skeleton_height() > 10.0 {
                    0.01
                } else {
                    1.0
                }
            }
        };
        if factor != 1.0 {
            self.scale_lengths(factor);
        }
        factor
    }
}

/// How to interpret BVH lengths on ingest. BVH has no unit field; `Auto`
/// treats skeletons taller than 10 units as centimeter exports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitPolicy {
    #[default]
    Auto,
    Meters,
    Centimeters,
}

#[derive(Debug, Error, PartialEq)]
pub enum BvhError {
    #[error("line {line}: expected {expected}, found `{found}`")]
    Syntax {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: unexpected end of document (expected {expected})")]
    UnexpectedEof { line: usize, expected: &'static str },
    #[error("line {line}: joint `{name}` declared twice")]
    DuplicateJoint { line: usize, name: String },
    #[error("line {line}: joint has {count} channels; only 0, 3, or 6 are valid")]
    BadChannelCount { line: usize, count: usize },
    #[error(
        "line {line}: frame has {found} values but the hierarchy declares {expected} channels"
    )]
    ChannelMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: `{token}` is not a number")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: frame time must be positive, got {value}")]
    BadFrameTime { line: usize, value: f64 },
    #[error("document ends before {0} frames were read")]
    MissingFrames(usize),
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    /// Line number of the most recently yielded line, 1-based.
    current: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            current: 0,
        }
    }

    /// Next non-blank line as trimmed tokens.
    fn next_tokens(&mut self) -> Option<Vec<&'a str>> {
        for (idx, line) in self.iter.by_ref() {
            self.current = idx + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Some(toks);
            }
        }
        None
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64, BvhError> {
    tok.parse::<f64>().map_err(|_| BvhError::NonNumeric {
        line,
        token: tok.to_string(),
    })
}

/// Parse a BVH document. Rotation channel values are converted from degrees
/// to radians; offsets and positions are kept exactly as written (apply a
/// [`UnitPolicy`] separately if centimeter input is possible).
pub fn parse_bvh(text: &str) -> Result<BvhDocument, BvhError> {
    let mut lines = Lines::new(text);
    let mut seen_names: Vec<String> = Vec::new();

    expect_keyword(&mut lines, "HIERARCHY")?;

    let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
        line: lines.current,
        expected: "ROOT",
    })?;
    if toks[0] != "ROOT" || toks.len() < 2 {
        return Err(BvhError::Syntax {
            line: lines.current,
            expected: "ROOT <name>",
            found: toks.join(" "),
        });
    }
    let root_name = toks[1].to_string();
    let root = parse_joint(&mut lines, root_name, false, &mut seen_names)?;

    expect_keyword(&mut lines, "MOTION")?;

    let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
        line: lines.current,
        expected: "Frames:",
    })?;
    if toks[0] != "Frames:" || toks.len() != 2 {
        return Err(BvhError::Syntax {
            line: lines.current,
            expected: "Frames: <count>",
            found: toks.join(" "),
        });
    }
    let frame_count = toks[1].parse::<usize>().map_err(|_| BvhError::NonNumeric {
        line: lines.current,
        token: toks[1].to_string(),
    })?;

    let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
        line: lines.current,
        expected: "Frame Time:",
    })?;
    if toks.len() != 3 || toks[0] != "Frame" || toks[1] != "Time:" {
        return Err(BvhError::Syntax {
            line: lines.current,
            expected: "Frame Time: <seconds>",
            found: toks.join(" "),
        });
    }
    let frame_time = parse_number(toks[2], lines.current)?;
    if !(frame_time > 0.0) {
        return Err(BvhError::BadFrameTime {
            line: lines.current,
            value: frame_time,
        });
    }

    let total = root.total_channels();
    let rotation_flags = rotation_flags(&root);
    let mut frames = Vec::with_capacity(frame_count);
    for _ in 0..frame_count {
        let toks = match lines.next_tokens() {
            Some(t) => t,
            None => return Err(BvhError::MissingFrames(frame_count)),
        };
        if toks.len() != total {
            return Err(BvhError::ChannelMismatch {
                line: lines.current,
                expected: total,
                found: toks.len(),
            });
        }
        let mut row = Vec::with_capacity(total);
        for (tok, is_rot) in toks.iter().zip(&rotation_flags) {
            let v = parse_number(tok, lines.current)?;
            row.push(if *is_rot { v.to_radians() } else { v });
        }
        frames.push(row);
    }

    Ok(BvhDocument {
        root,
        frame_count,
        frame_time,
        frames,
    })
}

fn expect_keyword(lines: &mut Lines, kw: &'static str) -> Result<(), BvhError> {
    let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
        line: lines.current,
        expected: kw,
    })?;
    if toks.len() != 1 || toks[0] != kw {
        return Err(BvhError::Syntax {
            line: lines.current,
            expected: kw,
            found: toks.join(" "),
        });
    }
    Ok(())
}

fn parse_joint(
    lines: &mut Lines,
    name: String,
    is_end_site: bool,
    seen: &mut Vec<String>,
) -> Result<BvhJoint, BvhError> {
    if !is_end_site {
        if seen.iter().any(|n| *n == name) {
            return Err(BvhError::DuplicateJoint {
                line: lines.current,
                name,
            });
        }
        seen.push(name.clone());
    }

    expect_keyword(lines, "{")?;

    let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
        line: lines.current,
        expected: "OFFSET",
    })?;
    if toks[0] != "OFFSET" || toks.len() != 4 {
        return Err(BvhError::Syntax {
            line: lines.current,
            expected: "OFFSET <x> <y> <z>",
            found: toks.join(" "),
        });
    }
    let offset = [
        parse_number(toks[1], lines.current)?,
        parse_number(toks[2], lines.current)?,
        parse_number(toks[3], lines.current)?,
    ];

    let mut joint = BvhJoint {
        name,
        offset,
        channels: Vec::new(),
        children: Vec::new(),
        is_end_site,
    };

    loop {
        let toks = lines.next_tokens().ok_or(BvhError::UnexpectedEof {
            line: lines.current,
            expected: "CHANNELS, JOINT, End Site, or }",
        })?;
        match toks[0] {
            "}" => break,
            "CHANNELS" if !is_end_site => {
                let count = toks
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| BvhError::Syntax {
                        line: lines.current,
                        expected: "CHANNELS <count> <names...>",
                        found: toks.join(" "),
                    })?;
                if count != 0 && count != 3 && count != 6 {
                    return Err(BvhError::BadChannelCount {
                        line: lines.current,
                        count,
                    });
                }
                if toks.len() != 2 + count {
                    return Err(BvhError::Syntax {
                        line: lines.current,
                        expected: "CHANNELS count matching the listed names",
                        found: toks.join(" "),
                    });
                }
                for tok in &toks[2..] {
                    let ch = BvhChannel::from_token(tok).ok_or_else(|| BvhError::Syntax {
                        line: lines.current,
                        expected: "a channel name",
                        found: (*tok).to_string(),
                    })?;
                    joint.channels.push(ch);
                }
            }
            "JOINT" if !is_end_site && toks.len() >= 2 => {
                let child = parse_joint(lines, toks[1].to_string(), false, seen)?;
                joint.children.push(child);
            }
            "End" if !is_end_site && toks.get(1) == Some(&"Site") => {
                let end_name = format!("{}_end", joint.name);
                let child = parse_joint(lines, end_name, true, seen)?;
                joint.children.push(child);
            }
            _ => {
                return Err(BvhError::Syntax {
                    line: lines.current,
                    expected: "CHANNELS, JOINT, End Site, or }",
                    found: toks.join(" "),
                })
            }
        }
    }

    Ok(joint)
}

/// Per-channel rotation flags in depth-first declaration order.
fn rotation_flags(root: &BvhJoint) -> Vec<bool> {
    fn rec(j: &BvhJoint, out: &mut Vec<bool>) {
        for ch in &j.channels {
            out.push(ch.is_rotation());
        }
        for c in &j.children {
            rec(c, out);
        }
    }
    let mut out = Vec::new();
    rec(root, &mut out);
    out
}

fn position_flags(root: &BvhJoint) -> Vec<bool> {
    rotation_flags(root).into_iter().map(|r| !r).collect()
}

/// Serialize a document back to BVH text. Rotations are written in degrees.
/// Offsets and motion values use the shortest exact decimal form, so
/// parse(write(doc)) loses nothing beyond the radian/degree round trip;
/// "Frame Time:" is emitted with 6 decimal places.
pub fn write_bvh(doc: &BvhDocument) -> String {
    let mut out = String::new();
    out.push_str("HIERARCHY\n");
    write_joint(&mut out, &doc.root, 0, true);
    out.push_str("MOTION\n");
    out.push_str(&format!("Frames: {}\n", doc.frame_count));
    out.push_str(&format!("Frame Time: {:.6}\n", doc.frame_time));
    let flags = rotation_flags(&doc.root);
    for row in &doc.frames {
        let mut first = true;
        for (v, is_rot) in row.iter().zip(&flags) {
            if !first {
                out.push(' ');
            }
            first = false;
            let v = if *is_rot { v.to_degrees() } else { *v };
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

fn write_joint(out: &mut String, joint: &BvhJoint, depth: usize, is_root: bool) {
    let pad = "  ".repeat(depth);
    if joint.is_end_site {
        out.push_str(&format!("{pad}End Site\n"));
    } else if is_root {
        out.push_str(&format!("{pad}ROOT {}\n", joint.name));
    } else {
        out.push_str(&format!("{pad}JOINT {}\n", joint.name));
    }
    out.push_str(&format!("{pad}{{\n"));
    let inner = "  ".repeat(depth + 1);
    out.push_str(&format!(
        "{inner}OFFSET {} {} {}\n",
        joint.offset[0], joint.offset[1], joint.offset[2]
    ));
    if !joint.is_end_site {
        out.push_str(&format!("{inner}CHANNELS {}", joint.channels.len()));
        for ch in &joint.channels {
            out.push_str(&format!(" {ch}"));
        }
        out.push('\n');
    }
    for child in &joint.children {
        write_joint(out, child, depth + 1, false);
    }
    out.push_str(&format!("{pad}}}\n"));
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_JOINT_FIXTURE: &str = "\
HIERARCHY
ROOT Base
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Mid
  {
    OFFSET 0 1 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    JOINT Tip
    {
      OFFSET 0 0.5 0
      CHANNELS 3 Zrotation Xrotation Yrotation
      End Site
      {
        OFFSET 0 0.25 0
      }
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.033333
0 0 0 0 0 0 0 0 0 0 0 0
0.1 0 0 90 0 0 0 0 0 45 0 0
";

    #[test]
    fn parses_minimal_single_joint() {
        let text = "\
HIERARCHY
ROOT J
{
  OFFSET 0 0 0
  CHANNELS 3 Zrotation Xrotation Yrotation
}
MOTION
Frames: 2
Frame Time: 0.033333
0 0 0
0 0 0
";
        let doc = parse_bvh(text).unwrap();
        assert_eq!(doc.frame_count, 2);
        assert_eq!(doc.total_channels(), 3);
        assert!(doc.frames.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn converts_rotation_degrees_to_radians() {
        let doc = parse_bvh(THREE_JOINT_FIXTURE).unwrap();
        // channel 3 of frame 1 is a 90-degree Z rotation
        assert!((doc.frames[1][3] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // position channels are untouched
        assert_eq!(doc.frames[1][0], 0.1);
    }

    #[test]
    fn fixture_offsets_parse_bit_equal() {
        let doc = parse_bvh(THREE_JOINT_FIXTURE).unwrap();
        let mid = &doc.root.children[0];
        assert_eq!(mid.offset, [0.0, 1.0, 0.0]);
        let tip = &mid.children[0];
        assert_eq!(tip.offset, [0.0, 0.5, 0.0]);
        assert!(tip.children[0].is_end_site);
        assert_eq!(tip.children[0].offset, [0.0, 0.25, 0.0]);
    }

    #[test]
    fn round_trips_three_joint_fixture() {
        let doc = parse_bvh(THREE_JOINT_FIXTURE).unwrap();
        let doc2 = parse_bvh(&write_bvh(&doc)).unwrap();
        assert_eq!(doc.root, doc2.root);
        assert_eq!(doc.frame_count, doc2.frame_count);
        assert_eq!(doc.frame_time, doc2.frame_time);
        for (a, b) in doc.frames.iter().flatten().zip(doc2.frames.iter().flatten()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn frame_time_round_trips_within_tolerance() {
        let mut doc = parse_bvh(THREE_JOINT_FIXTURE).unwrap();
        doc.frame_time = 0.008333;
        let doc2 = parse_bvh(&write_bvh(&doc)).unwrap();
        assert!((doc2.frame_time - 0.008333).abs() < 1e-9);
    }

    #[test]
    fn channel_mismatch_reports_line() {
        let text = THREE_JOINT_FIXTURE.replace(
            "0.1 0 0 90 0 0 0 0 0 45 0 0",
            "0.1 0 0 90 0 0 0 0 0 45 0",
        );
        match parse_bvh(&text) {
            Err(BvhError::ChannelMismatch {
                line,
                expected: 12,
                found: 11,
            }) => assert_eq!(line, 25),
            other => panic!("expected channel mismatch, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_frame_token_is_an_error() {
        let text = THREE_JOINT_FIXTURE.replace("45", "forty-five");
        match parse_bvh(&text) {
            Err(BvhError::NonNumeric { token, .. }) => assert_eq!(token, "forty-five"),
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_joint_names() {
        let text = THREE_JOINT_FIXTURE.replace("JOINT Tip", "JOINT Mid");
        assert!(matches!(
            parse_bvh(&text),
            Err(BvhError::DuplicateJoint { .. })
        ));
    }

    #[test]
    fn rejects_bad_channel_count() {
        let text = "\
HIERARCHY
ROOT J
{
  OFFSET 0 0 0
  CHANNELS 2 Zrotation Xrotation
}
MOTION
Frames: 0
Frame Time: 0.0333
";
        assert!(matches!(
            parse_bvh(text),
            Err(BvhError::BadChannelCount { count: 2, .. })
        ));
    }

    #[test]
    fn auto_unit_policy_rescales_centimeter_skeletons() {
        let text = THREE_JOINT_FIXTURE
            .replace("OFFSET 0 1 0", "OFFSET 0 100 0")
            .replace("OFFSET 0 0.5 0", "OFFSET 0 50 0");
        let mut doc = parse_bvh(&text).unwrap();
        assert!(doc.skeleton_height() > 10.0);
        let factor = doc.normalize_units(UnitPolicy::Auto);
        assert_eq!(factor, 0.01);
        assert_eq!(doc.root.children[0].offset, [0.0, 1.0, 0.0]);
        // positions scaled, rotations untouched
        assert!((doc.frames[1][0] - 0.001).abs() < 1e-15);
        assert!((doc.frames[1][3] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn meter_scale_skeleton_is_left_alone() {
        let mut doc = parse_bvh(THREE_JOINT_FIXTURE).unwrap();
        let factor = doc.normalize_units(UnitPolicy::Auto);
        assert_eq!(factor, 1.0);
    }
}
