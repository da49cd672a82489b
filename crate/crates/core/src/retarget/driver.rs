//! Whole-clip retargeting: build per-frame targets from the aligned,
//! scaled source trajectories, solve both stages with temporal
//! warm-starting, project the root above ground, and fill root velocities.

use nalgebra::Vector3;

use super::align::align_rest_pose;
use super::motion::{compute_root_velocities, RobotFrame, RobotMotion};
use super::scale::scale_source_motion;
use super::solver::{stage1_solve, stage2_solve, FrameTargets, TargetSpec};
use super::{Correspondence, RetargetConfig, RetargetError};
use crate::kinematics::{forward_kinematics, HumanModel, KinematicTree};
use crate::motion_io::MotionClip;

/// Per-frame diagnostics from the two-stage solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RetargetReport {
    /// Stage-2 objective at the stage-1 output (its initialization), per frame.
    pub stage2_initial: Vec<f64>,
    /// Stage-2 objective at its own output, per frame.
    pub stage2_final: Vec<f64>,
    /// Root lift applied by the ground constraint, per frame (meters, >= 0).
    pub ground_lift: Vec<f64>,
}

/// Retarget a source clip onto the robot tree. Frame `t` is warm-started
/// from the frame `t-1` solution (the rest pose at frame 0); after each
/// solve the root is lifted so no key body sinks below the configured
/// ground height.
pub fn retarget_clip(
    clip: &MotionClip,
    human: &HumanModel,
    robot: &KinematicTree,
    correspondence: &Correspondence,
    config: &RetargetConfig,
) -> Result<(RobotMotion, RetargetReport), RetargetError> {
    config.validate()?;
    let alignment = align_rest_pose(&human.tree, robot, correspondence)?;
    let trajectories = scale_source_motion(clip, human, config)?;
    let pairs = correspondence.resolve(&human.tree, robot)?;
    // ground projection scans the robot's key bodies; trees without key
    // flags (BVH-derived skeletons) fall back to the correspondence bodies
    let mut key_bodies = robot.key_body_indices();
    if key_bodies.is_empty() {
        key_bodies = pairs.iter().map(|p| p.robot_index).collect();
    }

    let mut warm = robot.rest_pose();
    let mut frames = Vec::with_capacity(trajectories.frame_count());
    let mut report = RetargetReport {
        stage2_initial: Vec::with_capacity(trajectories.frame_count()),
        stage2_final: Vec::with_capacity(trajectories.frame_count()),
        ground_lift: Vec::with_capacity(trajectories.frame_count()),
    };

    for f in 0..trajectories.frame_count() {
        let at = |e: RetargetError| RetargetError::AtFrame {
            frame: f,
            source: Box::new(e),
        };

        let targets = FrameTargets {
            targets: pairs
                .iter()
                .enumerate()
                .map(|(i, p)| TargetSpec {
                    body_index: p.robot_index,
                    weight_position: p.weight_position,
                    weight_orientation: p.weight_orientation,
                    end_effector: p.end_effector,
                    position: alignment
                        .position_target(i, &trajectories.positions[f][p.human_index]),
                    orientation: alignment
                        .orientation_target(i, &trajectories.orientations[f][p.human_index]),
                })
                .collect(),
        };

        let (s1, _) = stage1_solve(robot, &targets, &warm, config).map_err(at)?;
        let (mut pose, s2_report) = stage2_solve(robot, &targets, &s1, config).map_err(at)?;
        report.stage2_initial.push(s2_report.initial_residual);
        report.stage2_final.push(s2_report.final_residual);

        // ground constraint: lift the root until every key body clears the
        // ground plane
        let fk = forward_kinematics(robot, &pose).map_err(|e| at(e.into()))?;
        let min_z = key_bodies
            .iter()
            .map(|&i| fk.positions[i].z)
            .fold(f64::MAX, f64::min);
        let lift = (config.ground_height - min_z).max(0.0);
        pose.root_position.z += lift;
        report.ground_lift.push(lift);

        warm = pose.clone();
        frames.push(RobotFrame {
            root_position: pose.root_position,
            root_orientation: pose.root_orientation,
            root_linear_velocity: Vector3::zeros(),
            root_angular_velocity: Vector3::zeros(),
            joint_angles: pose.joint_angles,
        });
    }

    let mut motion = RobotMotion {
        frame_rate: clip.frame_rate,
        joint_names: robot.dof_names().iter().map(|s| s.to_string()).collect(),
        frames,
    };
    if motion.frames.len() >= 2 {
        compute_root_velocities(&mut motion)?;
    }
    Ok((motion, report))
}

/// Convenience: the identity-orientation pose sequence of a motion,
/// useful when a caller needs FK on every frame.
pub(crate) fn fk_min_z(
    robot: &KinematicTree,
    motion: &RobotMotion,
    bodies: &[usize],
) -> Result<Vec<f64>, RetargetError> {
    motion
        .frames
        .iter()
        .map(|frame| {
            let fk = forward_kinematics(robot, &frame.pose())?;
            Ok(bodies
                .iter()
                .map(|&i| fk.positions[i].z)
                .fold(f64::MAX, f64::min))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::motion_io::{bvh_to_clip, parse_bvh};

    fn human_model() -> HumanModel {
        let doc = parse_bvh(fixtures::HUMAN_SKELETON_BVH).unwrap();
        HumanModel::from_document(&doc).unwrap()
    }

    fn self_correspondence() -> Correspondence {
        let pairs = [
            ("Hips", 1.0, 1.0, false),
            ("Spine", 0.5, 1.0, false),
            ("Chest", 1.0, 1.0, false),
            ("Neck", 0.5, 1.0, false),
            ("Head", 1.0, 1.0, false),
            ("LeftArm", 0.5, 1.0, false),
            ("LeftForeArm", 0.5, 1.0, false),
            ("LeftHand", 1.0, 1.0, true),
            ("RightArm", 0.5, 1.0, false),
            ("RightForeArm", 0.5, 1.0, false),
            ("RightHand", 1.0, 1.0, true),
            ("LeftUpLeg", 0.5, 1.0, false),
            ("LeftLeg", 0.5, 1.0, false),
            ("LeftFoot", 1.0, 1.0, true),
            ("RightUpLeg", 0.5, 1.0, false),
            ("RightLeg", 0.5, 1.0, false),
            ("RightFoot", 1.0, 1.0, true),
        ];
        Correspondence::new(
            pairs
                .iter()
                .map(|(n, wp, wo, ee)| super::super::CorrespondencePair {
                    human_body: n.to_string(),
                    robot_body: n.to_string(),
                    weight_position: *wp,
                    weight_orientation: *wo,
                    end_effector: *ee,
                })
                .collect(),
        )
        .unwrap()
    }

    fn tight_config() -> RetargetConfig {
        RetargetConfig {
            convergence_tol: 1e-7,
            max_iterations_stage1: 60,
            max_iterations_stage2: 120,
            ..RetargetConfig::default()
        }
    }

    #[test]
    fn constant_pose_clip_gives_constant_motion_and_zero_velocity() {
        let model = human_model();
        let doc = fixtures::gesture_bvh(1.0, 30.0);
        let mut clip = bvh_to_clip(&doc);
        let first = clip.values[0].clone();
        for row in clip.values.iter_mut() {
            *row = first.clone();
        }
        let (motion, _) = retarget_clip(
            &clip,
            &model,
            &model.tree,
            &self_correspondence(),
            &tight_config(),
        )
        .unwrap();
        let f0 = &motion.frames[0];
        for f in &motion.frames {
            assert!((f.root_position - f0.root_position).norm() < 1e-9);
            for (a, b) in f.joint_angles.iter().zip(&f0.joint_angles) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!(f.root_linear_velocity.norm() < 1e-6);
            assert!(f.root_angular_velocity.norm() < 1e-6);
        }
    }

    #[test]
    fn self_retarget_recovers_source_joint_angles() {
        let model = human_model();
        let doc = fixtures::gesture_bvh(2.0, 30.0);
        let clip = bvh_to_clip(&doc);
        let (motion, report) = retarget_clip(
            &clip,
            &model,
            &model.tree,
            &self_correspondence(),
            &tight_config(),
        )
        .unwrap();

        // oracle: the source pose of each frame
        let mut total = 0.0;
        let mut count = 0usize;
        for (f, row) in clip.values.iter().enumerate() {
            let source = model.pose_at(row);
            for (a, b) in motion.frames[f].joint_angles.iter().zip(&source.joint_angles) {
                total += (a - b).abs();
                count += 1;
            }
        }
        let mae = total / count as f64;
        assert!(mae <= 1e-4, "mean absolute joint error {mae}");

        for (init, fin) in report.stage2_initial.iter().zip(&report.stage2_final) {
            assert!(fin <= init, "stage2 degraded: {fin} > {init}");
        }
    }

    #[test]
    fn penetrating_source_is_lifted_above_ground() {
        let model = human_model();
        let doc = fixtures::gesture_bvh(1.0, 30.0);
        let mut clip = bvh_to_clip(&doc);
        // sink the whole motion 2 cm below the feet
        for row in clip.values.iter_mut() {
            row[2] -= 0.07;
        }
        let config = tight_config();
        let (motion, report) = retarget_clip(
            &clip,
            &model,
            &model.tree,
            &self_correspondence(),
            &config,
        )
        .unwrap();
        assert!(report.ground_lift.iter().any(|l| *l > 0.0));

        let feet = [
            model.tree.body_index("LeftFoot").unwrap(),
            model.tree.body_index("RightFoot").unwrap(),
        ];
        let min_z = fk_min_z(&model.tree, &motion, &feet).unwrap();
        for z in min_z {
            assert!(z >= config.ground_height - 1e-6, "foot at {z}");
        }
    }
}
