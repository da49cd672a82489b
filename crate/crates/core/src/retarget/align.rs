//! Rest-pose alignment: a yaw-plus-translation rigid transform between the
//! two skeletons' rest poses, and the per-pair residual offsets used when
//! building frame targets.
//!
//! Keeping orientation-weighted ankle pairs in the correspondence means the
//! stored rest orientation offsets reproduce the robot's straight ankles
//! exactly at rest, which is what suppresses the toed-in artifact.

use nalgebra::{UnitQuaternion, Vector3};

use super::{Correspondence, RetargetError};
use crate::kinematics::{forward_kinematics, KinematicTree};

/// The rigid transform (rotation about the vertical axis + translation,
/// including height) that carries robot rest key-body positions onto the
/// human ones, minimizing the weighted summed squared distance. The offset
/// arrays are indexed like the correspondence pairs and live in robot
/// space.
#[derive(Debug, Clone, PartialEq)]
pub struct RestAlignment {
    pub yaw: f64,
    pub translation: Vector3<f64>,
    /// Residual position offset per pair: robot rest position minus the
    /// human rest position mapped into robot space.
    pub pair_position_offsets: Vec<Vector3<f64>>,
    /// Rest orientation offset per pair: `q_robot * (R_yaw^-1 * q_human)^-1`.
    pub pair_orientation_offsets: Vec<UnitQuaternion<f64>>,
}

impl RestAlignment {
    /// Rotation carrying robot rest points toward human rest points.
    pub fn rotation(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), self.yaw)
    }

    /// Map a robot-space point into human space.
    pub fn robot_point_to_human(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * p + self.translation
    }

    /// Map a human-space point into robot space (the target-building
    /// direction).
    pub fn human_point_to_robot(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation().inverse() * (p - self.translation)
    }

    /// Map a human-space orientation into robot space.
    pub fn human_orientation_to_robot(&self, q: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
        self.rotation().inverse() * q
    }

    /// Position target for pair `i` given the (scaled) human body position.
    pub fn position_target(&self, i: usize, human_pos: &Vector3<f64>) -> Vector3<f64> {
        self.human_point_to_robot(human_pos) + self.pair_position_offsets[i]
    }

    /// Orientation target for pair `i` given the human body orientation.
    pub fn orientation_target(&self, i: usize, human_ori: &UnitQuaternion<f64>) -> UnitQuaternion<f64> {
        self.pair_orientation_offsets[i] * self.human_orientation_to_robot(human_ori)
    }
}

/// Solve the weighted rest-pose alignment. Errors when fewer than 3
/// non-collinear correspondence points are available.
pub fn align_rest_pose(
    human: &KinematicTree,
    robot: &KinematicTree,
    correspondence: &Correspondence,
) -> Result<RestAlignment, RetargetError> {
    let pairs = correspondence.resolve(human, robot)?;
    let human_fk = forward_kinematics(human, &human.rest_pose())?;
    let robot_fk = forward_kinematics(robot, &robot.rest_pose())?;

    let human_pts: Vec<Vector3<f64>> =
        pairs.iter().map(|p| human_fk.positions[p.human_index]).collect();
    let robot_pts: Vec<Vector3<f64>> =
        pairs.iter().map(|p| robot_fk.positions[p.robot_index]).collect();

    check_noncollinear(&human_pts)?;

    let mut weights: Vec<f64> = pairs.iter().map(|p| p.weight_position).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let wsum: f64 = weights.iter().sum();

    let mean = |pts: &[Vector3<f64>]| -> Vector3<f64> {
        pts.iter()
            .zip(&weights)
            .map(|(p, w)| p * *w)
            .sum::<Vector3<f64>>()
            / wsum
    };
    let h_mean = mean(&human_pts);
    let r_mean = mean(&robot_pts);

    // planar Procrustes for the yaw: maximize sum w * h~ . Rz(yaw) r~
    let mut num = 0.0;
    let mut den = 0.0;
    for ((h, r), w) in human_pts.iter().zip(&robot_pts).zip(&weights) {
        let hx = h.x - h_mean.x;
        let hy = h.y - h_mean.y;
        let rx = r.x - r_mean.x;
        let ry = r.y - r_mean.y;
        num += w * (hy * rx - hx * ry);
        den += w * (hx * rx + hy * ry);
    }
    let yaw = if num == 0.0 && den == 0.0 {
        0.0
    } else {
        num.atan2(den)
    };

    let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw);
    let translation = h_mean - rot * r_mean;

    let alignment_base = RestAlignment {
        yaw,
        translation,
        pair_position_offsets: Vec::new(),
        pair_orientation_offsets: Vec::new(),
    };

    let mut pos_offsets = Vec::with_capacity(pairs.len());
    let mut ori_offsets = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let mapped = alignment_base.human_point_to_robot(&human_pts[i]);
        pos_offsets.push(robot_pts[i] - mapped);
        let mapped_ori =
            alignment_base.human_orientation_to_robot(&human_fk.orientations[p.human_index]);
        ori_offsets.push(robot_fk.orientations[p.robot_index] * mapped_ori.inverse());
    }

    Ok(RestAlignment {
        yaw,
        translation,
        pair_position_offsets: pos_offsets,
        pair_orientation_offsets: ori_offsets,
    })
}

fn check_noncollinear(points: &[Vector3<f64>]) -> Result<(), RetargetError> {
    if points.len() < 3 {
        return Err(RetargetError::UnderdeterminedAlignment(points.len()));
    }
    // count points spanning a plane: any pair of independent difference
    // vectors with a non-vanishing cross product will do
    let p0 = points[0];
    let mut dir: Option<Vector3<f64>> = None;
    for p in &points[1..] {
        let d = p - p0;
        if d.norm() < 1e-12 {
            continue;
        }
        match dir {
            None => dir = Some(d),
            Some(v) => {
                if v.cross(&d).norm() > 1e-9 * v.norm().max(1.0) * d.norm().max(1.0) {
                    return Ok(());
                }
            }
        }
    }
    Err(RetargetError::UnderdeterminedAlignment(points.len()))
}
