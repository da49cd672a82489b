//! Motion-quality metrics: joint-wise RMSE, foot sliding, ground
//! penetration, velocity spikes, and sphere-proxy self-intersection.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kinematics::{forward_kinematics, KinematicTree, TreeError};
use crate::motion_io::MotionClip;
use crate::retarget::RobotMotion;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("channel sets differ: `{a}` vs `{b}` at column {index}")]
    ChannelMismatch { index: usize, a: String, b: String },
    #[error("frame counts differ: {a} vs {b}")]
    FrameCountMismatch { a: usize, b: usize },
    #[error("motion has {0} frames; at least 2 are required")]
    TooFewFrames(usize),
    #[error("sphere radius for `{name}` must be positive, got {value}")]
    BadRadius { name: String, value: f64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Per-channel RMSE plus aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    /// (channel name, RMSE) in channel order.
    pub entries: Vec<(String, f64)>,
    pub mean: f64,
    pub max: f64,
}

impl ChannelReport {
    /// Two-column text table, one `name value` row per channel.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (name, v) in &self.entries {
            out.push_str(&format!("{name} {v:.6}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,rmse\n");
        for (name, v) in &self.entries {
            out.push_str(&format!("{name},{v:.6}\n"));
        }
        out
    }
}

/// Root-mean-square error per channel between two clips with identical
/// channel sets and frame counts.
pub fn rmse_per_channel(a: &MotionClip, b: &MotionClip) -> Result<ChannelReport, MetricsError> {
    if a.channel_names.len() != b.channel_names.len() {
        return Err(MetricsError::ChannelMismatch {
            index: a.channel_names.len().min(b.channel_names.len()),
            a: format!("{} channels", a.channel_names.len()),
            b: format!("{} channels", b.channel_names.len()),
        });
    }
    for (i, (na, nb)) in a.channel_names.iter().zip(&b.channel_names).enumerate() {
        if na != nb {
            return Err(MetricsError::ChannelMismatch {
                index: i,
                a: na.clone(),
                b: nb.clone(),
            });
        }
    }
    if a.values.len() != b.values.len() {
        return Err(MetricsError::FrameCountMismatch {
            a: a.values.len(),
            b: b.values.len(),
        });
    }
    let frames = a.values.len().max(1);
    let mut entries = Vec::with_capacity(a.channel_names.len());
    for (i, name) in a.channel_names.iter().enumerate() {
        let sum_sq: f64 = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(ra, rb)| (ra[i] - rb[i]).powi(2))
            .sum();
        entries.push((name.clone(), (sum_sq / frames as f64).sqrt()));
    }
    let mean = entries.iter().map(|(_, v)| v).sum::<f64>() / entries.len().max(1) as f64;
    let max = entries.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    Ok(ChannelReport { entries, mean, max })
}

/// Foot-sliding result: mean horizontal displacement per contact step.
#[derive(Debug, Clone, PartialEq)]
pub struct FootSliding {
    /// Meters of horizontal motion per consecutive contact-frame pair.
    pub score: f64,
    /// Number of contact-frame transitions measured.
    pub contact_transitions: usize,
    /// False when no foot was ever in contact (score is 0 by convention).
    pub had_contact: bool,
}

/// Mean horizontal displacement of feet across consecutive frames where
/// the foot is in contact. Contact means the foot body sits within
/// `contact_height_eps` of the ground and moves vertically slower than
/// `contact_vel_eps`.
pub fn foot_sliding_score(
    motion: &RobotMotion,
    tree: &KinematicTree,
    foot_bodies: &[&str],
    ground_height: f64,
    contact_height_eps: f64,
    contact_vel_eps: f64,
) -> Result<FootSliding, MetricsError> {
    let feet: Result<Vec<usize>, TreeError> =
        foot_bodies.iter().map(|n| tree.body_index(n)).collect();
    let feet = feet?;
    let n = motion.frames.len();
    if n < 2 {
        return Err(MetricsError::TooFewFrames(n));
    }
    let rate = motion.frame_rate;

    // world foot positions per frame
    let mut positions = Vec::with_capacity(n);
    for frame in &motion.frames {
        let fk = forward_kinematics(tree, &frame.pose())?;
        positions.push(feet.iter().map(|&i| fk.positions[i]).collect::<Vec<_>>());
    }

    let mut slide_total = 0.0;
    let mut transitions = 0usize;
    let mut had_contact = false;
    for (fi, _) in feet.iter().enumerate() {
        let in_contact = |t: usize| -> bool {
            let z = positions[t][fi].z;
            if z >= ground_height + contact_height_eps {
                return false;
            }
            let vz = if t + 1 < n {
                (positions[t + 1][fi].z - positions[t][fi].z) * rate
            } else {
                (positions[t][fi].z - positions[t - 1][fi].z) * rate
            };
            vz.abs() < contact_vel_eps
        };
        for t in 0..n {
            if in_contact(t) {
                had_contact = true;
                if t + 1 < n && in_contact(t + 1) {
                    let d = positions[t + 1][fi] - positions[t][fi];
                    slide_total += (d.x * d.x + d.y * d.y).sqrt();
                    transitions += 1;
                }
            }
        }
    }
    Ok(FootSliding {
        score: if transitions == 0 {
            0.0
        } else {
            slide_total / transitions as f64
        },
        contact_transitions: transitions,
        had_contact,
    })
}

/// Maximum depth any body sinks below the ground plane, meters.
pub fn ground_penetration_score(
    motion: &RobotMotion,
    tree: &KinematicTree,
    ground_height: f64,
) -> Result<f64, MetricsError> {
    let mut worst = 0.0f64;
    for frame in &motion.frames {
        let fk = forward_kinematics(tree, &frame.pose())?;
        for p in &fk.positions {
            worst = worst.max(ground_height - p.z);
        }
    }
    Ok(worst.max(0.0))
}

/// Frames where any joint's finite-difference speed exceeds `threshold`
/// (rad/s), with their indices.
pub fn velocity_spike_count(
    motion: &RobotMotion,
    threshold: f64,
) -> Result<(usize, Vec<usize>), MetricsError> {
    let n = motion.frames.len();
    if n < 2 {
        return Err(MetricsError::TooFewFrames(n));
    }
    let rate = motion.frame_rate;
    let mut frames = Vec::new();
    for t in 1..n {
        let spike = motion.frames[t]
            .joint_angles
            .iter()
            .zip(&motion.frames[t - 1].joint_angles)
            .any(|(a, b)| ((a - b) * rate).abs() > threshold);
        if spike {
            frames.push(t);
        }
    }
    Ok((frames.len(), frames))
}

/// Count of colliding (frame, body-pair) events under sphere proxies.
/// Bodies absent from the radii map are ignored; parent-child pairs are
/// always considered adjacent and skipped.
pub fn self_intersection_score(
    motion: &RobotMotion,
    tree: &KinematicTree,
    sphere_radii: &BTreeMap<String, f64>,
) -> Result<usize, MetricsError> {
    let mut bodies = Vec::new();
    for (name, r) in sphere_radii {
        if !(r.is_finite() && *r > 0.0) {
            return Err(MetricsError::BadRadius {
                name: name.clone(),
                value: *r,
            });
        }
        bodies.push((tree.body_index(name)?, *r));
    }
    let adjacent = |a: usize, b: usize| -> bool {
        tree.joints()[a].parent == Some(b)
            || tree.joints()[b].parent == Some(a)
            || tree.joints()[a].parent == tree.joints()[b].parent
    };
    let mut count = 0usize;
    for frame in &motion.frames {
        let fk = forward_kinematics(tree, &frame.pose())?;
        for i in 0..bodies.len() {
            for j in (i + 1)..bodies.len() {
                let (bi, ri) = bodies[i];
                let (bj, rj) = bodies[j];
                if adjacent(bi, bj) {
                    continue;
                }
                if (fk.positions[bi] - fk.positions[bj]).norm() < ri + rj {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kinematics::load_robot_description;
    use crate::retarget::RobotFrame;
    use nalgebra::{UnitQuaternion, Vector3};

    fn g1() -> KinematicTree {
        load_robot_description(fixtures::G1_DESCRIPTION).unwrap()
    }

    fn rest_motion(tree: &KinematicTree, n: usize) -> RobotMotion {
        let rest = tree.rest_pose();
        RobotMotion {
            frame_rate: 30.0,
            joint_names: tree.dof_names().iter().map(|s| s.to_string()).collect(),
            frames: (0..n)
                .map(|_| RobotFrame {
                    root_position: rest.root_position,
                    root_orientation: UnitQuaternion::identity(),
                    root_linear_velocity: Vector3::zeros(),
                    root_angular_velocity: Vector3::zeros(),
                    joint_angles: rest.joint_angles.clone(),
                })
                .collect(),
        }
    }

    fn clip(names: &[&str], rows: Vec<Vec<f64>>) -> MotionClip {
        MotionClip::new(names.iter().map(|s| s.to_string()).collect(), 30.0, rows).unwrap()
    }

    #[test]
    fn identical_clips_have_zero_rmse() {
        let a = clip(&["x", "y"], vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let report = rmse_per_channel(&a, &a).unwrap();
        assert!(report.entries.iter().all(|(_, v)| *v == 0.0));
        assert_eq!(report.mean, 0.0);
    }

    #[test]
    fn constant_offset_is_the_rmse() {
        let a = clip(&["x", "y"], vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let mut b = a.clone();
        for row in b.values.iter_mut() {
            row[1] += 0.1;
        }
        let report = rmse_per_channel(&a, &b).unwrap();
        assert!(report.entries[0].1 == 0.0);
        assert!((report.entries[1].1 - 0.1).abs() < 1e-12);
        assert!((report.max - 0.1).abs() < 1e-12);
    }

    #[test]
    fn rmse_is_symmetric_and_scales_linearly() {
        let a = clip(&["x"], vec![vec![0.0], vec![1.0], vec![2.0]]);
        let b = clip(&["x"], vec![vec![0.5], vec![0.0], vec![2.5]]);
        let ab = rmse_per_channel(&a, &b).unwrap();
        let ba = rmse_per_channel(&b, &a).unwrap();
        assert_eq!(ab.entries, ba.entries);

        // doubling (b - a) doubles the rmse
        let doubled = clip(&["x"], vec![vec![1.0], vec![-1.0], vec![3.0]]);
        let a2 = rmse_per_channel(&a, &doubled).unwrap();
        assert!((a2.entries[0].1 - 2.0 * ab.entries[0].1).abs() < 1e-12);
    }

    #[test]
    fn mismatched_channels_error() {
        let a = clip(&["x"], vec![vec![0.0]]);
        let b = clip(&["y"], vec![vec![0.0]]);
        assert!(matches!(
            rmse_per_channel(&a, &b),
            Err(MetricsError::ChannelMismatch { .. })
        ));
    }

    #[test]
    fn table_rows_match_paper_layout() {
        let a = clip(&["root_pos_x"], vec![vec![0.0]]);
        let b = clip(&["root_pos_x"], vec![vec![0.000592]]);
        let table = rmse_per_channel(&a, &b).unwrap().to_table();
        assert_eq!(table, "root_pos_x 0.000592\n");
    }

    #[test]
    fn pinned_feet_do_not_slide() {
        let tree = g1();
        let motion = rest_motion(&tree, 30);
        let s = foot_sliding_score(&motion, &tree, &["left_foot", "right_foot"], 0.0, 0.02, 0.1)
            .unwrap();
        assert!(s.had_contact);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn constructed_slide_measures_one_centimeter_per_frame() {
        let tree = g1();
        let mut motion = rest_motion(&tree, 10);
        for (t, f) in motion.frames.iter_mut().enumerate() {
            f.root_position.x += 0.01 * t as f64; // drags the feet with it
        }
        let s = foot_sliding_score(&motion, &tree, &["left_foot", "right_foot"], 0.0, 0.02, 0.1)
            .unwrap();
        assert!((s.score - 0.01).abs() < 1e-9, "score {}", s.score);
    }

    #[test]
    fn no_contact_flags_and_scores_zero() {
        let tree = g1();
        let mut motion = rest_motion(&tree, 10);
        for f in motion.frames.iter_mut() {
            f.root_position.z += 0.5;
        }
        let s = foot_sliding_score(&motion, &tree, &["left_foot", "right_foot"], 0.0, 0.02, 0.1)
            .unwrap();
        assert!(!s.had_contact);
        assert_eq!(s.score, 0.0);
    }

    #[test]
    fn penetration_zero_above_ground_and_measures_depth() {
        let tree = g1();
        let motion = rest_motion(&tree, 5);
        assert_eq!(ground_penetration_score(&motion, &tree, 0.0).unwrap(), 0.0);

        let mut sunk = motion.clone();
        sunk.frames[2].root_position.z -= 0.03;
        let p = ground_penetration_score(&sunk, &tree, 0.0).unwrap();
        assert!((p - 0.03).abs() < 1e-9, "penetration {p}");
    }

    #[test]
    fn smooth_motion_has_no_spikes_and_jumps_are_caught() {
        let tree = g1();
        let mut motion = rest_motion(&tree, 60);
        for (t, f) in motion.frames.iter_mut().enumerate() {
            f.joint_angles[3] = 0.3 * (t as f64 * 0.1).sin(); // ~0.9 rad/s peak
        }
        let (count, _) = velocity_spike_count(&motion, 10.0).unwrap();
        assert_eq!(count, 0);

        motion.frames[30].joint_angles[3] += 1.0; // 30 rad/s jump at 30 Hz
        let (count, frames) = velocity_spike_count(&motion, 10.0).unwrap();
        assert!(count >= 1);
        assert!(frames.contains(&30));
    }

    #[test]
    fn rest_pose_has_no_self_intersections_and_touching_wrists_do() {
        let tree = g1();
        let motion = rest_motion(&tree, 3);
        let mut radii = BTreeMap::new();
        for b in ["left_wrist_yaw_joint", "right_wrist_yaw_joint", "head", "left_knee_joint", "right_knee_joint"] {
            radii.insert(b.to_string(), 0.05);
        }
        assert_eq!(self_intersection_score(&motion, &tree, &radii).unwrap(), 0);

        // fold both shoulders to pull the wrists together in front
        let mut crossed = motion.clone();
        let li = tree.dof_names().iter().position(|n| *n == "left_shoulder_roll_joint").unwrap();
        let ri = tree.dof_names().iter().position(|n| *n == "right_shoulder_roll_joint").unwrap();
        for f in crossed.frames.iter_mut() {
            f.joint_angles[li] = -0.9; // fold inward
            f.joint_angles[ri] = 0.9;
        }
        let hits = self_intersection_score(&crossed, &tree, &radii).unwrap();
        assert!(hits >= 1, "expected wrist collision, got {hits}");
    }

    #[test]
    fn enlarging_radii_never_decreases_the_score() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let tree = g1();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..5 {
            let mut motion = rest_motion(&tree, 8);
            for f in motion.frames.iter_mut() {
                for a in f.joint_angles.iter_mut() {
                    *a = rng.gen::<f64>() - 0.5;
                }
            }
            let mut radii = BTreeMap::new();
            for b in [
                "left_wrist_yaw_joint",
                "right_wrist_yaw_joint",
                "left_elbow_joint",
                "right_elbow_joint",
                "head",
                "left_knee_joint",
                "right_knee_joint",
            ] {
                radii.insert(b.to_string(), 0.02 + 0.06 * rng.gen::<f64>());
            }
            let base = self_intersection_score(&motion, &tree, &radii).unwrap();
            let grown: BTreeMap<String, f64> =
                radii.iter().map(|(k, v)| (k.clone(), v * 1.5)).collect();
            let bigger = self_intersection_score(&motion, &tree, &grown).unwrap();
            assert!(bigger >= base, "{bigger} < {base}");
        }
    }
}
