//! The reference-motion record: per frame, root position and orientation,
//! root linear/angular velocity, and every joint angle; plus the plain-text
//! file format and finite-difference velocity filling.

use nalgebra::{UnitQuaternion, Vector3};

use super::RetargetError;
use crate::kinematics::Pose;
use crate::motion_io::MotionClip;

#[derive(Debug, Clone, PartialEq)]
pub struct RobotFrame {
    pub root_position: Vector3<f64>,
    pub root_orientation: UnitQuaternion<f64>,
    pub root_linear_velocity: Vector3<f64>,
    pub root_angular_velocity: Vector3<f64>,
    pub joint_angles: Vec<f64>,
}

impl RobotFrame {
    pub fn pose(&self) -> Pose {
        Pose {
            root_position: self.root_position,
            root_orientation: self.root_orientation,
            joint_angles: self.joint_angles.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotMotion {
    pub frame_rate: f64,
    /// Joint names in angle order (29 entries for the bundled robot).
    pub joint_names: Vec<String>,
    pub frames: Vec<RobotFrame>,
}

impl RobotMotion {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Channel names of the bare text format: root position, root linear
    /// velocity, then the joint names.
    pub fn channel_names(&self) -> Vec<String> {
        let mut names = vec![
            "root_pos_x".into(),
            "root_pos_y".into(),
            "root_pos_z".into(),
            "root_vel_x".into(),
            "root_vel_y".into(),
            "root_vel_z".into(),
        ];
        names.extend(self.joint_names.iter().cloned());
        names
    }

    /// Flatten to a clip over the bare channel set (orientation and angular
    /// velocity are not clip channels; use the extended file format to
    /// persist them).
    pub fn to_clip(&self) -> MotionClip {
        let values = self
            .frames
            .iter()
            .map(|f| {
                let mut row = Vec::with_capacity(6 + f.joint_angles.len());
                row.extend_from_slice(f.root_position.as_slice());
                row.extend_from_slice(f.root_linear_velocity.as_slice());
                row.extend_from_slice(&f.joint_angles);
                row
            })
            .collect();
        MotionClip {
            channel_names: self.channel_names(),
            frame_rate: self.frame_rate,
            values,
        }
    }
}

/// Fill root velocities by finite differences: central at interior frames,
/// one-sided at the ends. Angular velocity is the rotation-vector rate of
/// the world-frame quaternion increment.
pub fn compute_root_velocities(motion: &mut RobotMotion) -> Result<(), RetargetError> {
    let n = motion.frames.len();
    if n < 2 {
        return Err(RetargetError::TooFewFrames(n));
    }
    let rate = motion.frame_rate;
    let pos: Vec<Vector3<f64>> = motion.frames.iter().map(|f| f.root_position).collect();
    let ori: Vec<UnitQuaternion<f64>> =
        motion.frames.iter().map(|f| f.root_orientation).collect();
    for t in 0..n {
        let (lin, ang) = if t == 0 {
            (
                (pos[1] - pos[0]) * rate,
                (ori[1] * ori[0].inverse()).scaled_axis() * rate,
            )
        } else if t == n - 1 {
            (
                (pos[n - 1] - pos[n - 2]) * rate,
                (ori[n - 1] * ori[n - 2].inverse()).scaled_axis() * rate,
            )
        } else {
            (
                (pos[t + 1] - pos[t - 1]) * (rate / 2.0),
                (ori[t + 1] * ori[t - 1].inverse()).scaled_axis() * (rate / 2.0),
            )
        };
        motion.frames[t].root_linear_velocity = lin;
        motion.frames[t].root_angular_velocity = ang;
    }
    Ok(())
}

/// Serialize to the text format: a `frame_rate` header line, a channel-name
/// line, one row per frame. The bare format carries root position, root
/// linear velocity, and the joint angles; `extended` appends
/// `root_quat_w/x/y/z` and `root_angvel_x/y/z` columns so the record can be
/// reloaded losslessly.
pub fn write_robot_motion(motion: &RobotMotion, extended: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}\n", motion.frame_rate));
    let mut names = motion.channel_names();
    if extended {
        for extra in [
            "root_quat_w",
            "root_quat_x",
            "root_quat_y",
            "root_quat_z",
            "root_angvel_x",
            "root_angvel_y",
            "root_angvel_z",
        ] {
            names.push(extra.into());
        }
    }
    out.push_str(&names.join(" "));
    out.push('\n');
    for f in &motion.frames {
        let mut row: Vec<f64> = Vec::with_capacity(names.len());
        row.extend_from_slice(f.root_position.as_slice());
        row.extend_from_slice(f.root_linear_velocity.as_slice());
        row.extend_from_slice(&f.joint_angles);
        if extended {
            let q = f.root_orientation.quaternion();
            row.extend_from_slice(&[q.w, q.i, q.j, q.k]);
            row.extend_from_slice(f.root_angular_velocity.as_slice());
        }
        let text: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&text.join(" "));
        out.push('\n');
    }
    out
}

/// Parse either the bare or the extended format. Bare files get identity
/// root orientation and zero angular velocity.
pub fn parse_robot_motion(text: &str) -> Result<RobotMotion, RetargetError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let rate_line = lines.next().ok_or(RetargetError::EmptyMotionFile)?;
    let frame_rate: f64 = rate_line
        .trim()
        .parse()
        .map_err(|_| RetargetError::MotionParse(format!("bad frame rate `{rate_line}`")))?;
    let header = lines.next().ok_or(RetargetError::EmptyMotionFile)?;
    let names: Vec<&str> = header.split_whitespace().collect();
    if names.len() < 7 || names[0] != "root_pos_x" {
        return Err(RetargetError::MotionParse(
            "channel line must start with root_pos_x .. root_vel_z".into(),
        ));
    }
    let extended = names.ends_with(&[
        "root_quat_w",
        "root_quat_x",
        "root_quat_y",
        "root_quat_z",
        "root_angvel_x",
        "root_angvel_y",
        "root_angvel_z",
    ]);
    let n_joints = names.len() - 6 - if extended { 7 } else { 0 };
    let joint_names: Vec<String> = names[6..6 + n_joints].iter().map(|s| s.to_string()).collect();

    let mut frames = Vec::new();
    for line in lines {
        let vals: Result<Vec<f64>, _> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| RetargetError::MotionParse(format!("`{t}` is not a number")))
            })
            .collect();
        let vals = vals?;
        if vals.len() != names.len() {
            return Err(RetargetError::MotionParse(format!(
                "row has {} values, header declares {}",
                vals.len(),
                names.len()
            )));
        }
        let (quat, angvel) = if extended {
            let q = &vals[6 + n_joints..10 + n_joints];
            let w = &vals[10 + n_joints..13 + n_joints];
            (
                UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3])),
                Vector3::new(w[0], w[1], w[2]),
            )
        } else {
            (UnitQuaternion::identity(), Vector3::zeros())
        };
        frames.push(RobotFrame {
            root_position: Vector3::new(vals[0], vals[1], vals[2]),
            root_linear_velocity: Vector3::new(vals[3], vals[4], vals[5]),
            root_orientation: quat,
            root_angular_velocity: angvel,
            joint_angles: vals[6..6 + n_joints].to_vec(),
        });
    }
    Ok(RobotMotion {
        frame_rate,
        joint_names,
        frames,
    })
}
