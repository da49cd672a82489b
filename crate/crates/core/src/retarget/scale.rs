//! Non-uniform local scaling of the source motion: every bone vector of
//! the human FK result is multiplied by its per-bone scale and the chain is
//! re-accumulated from the root; the root trajectory itself is scaled by a
//! single uniform factor around its rest position. Orientations pass
//! through unchanged.

use nalgebra::{UnitQuaternion, Vector3};

use super::{base_name, RetargetConfig, RetargetError};
use crate::kinematics::{forward_kinematics, HumanModel};
use crate::motion_io::MotionClip;

/// Per-frame world positions and orientations for every body of the source
/// skeleton after scaling. Indexed `[frame][body]`, bodies in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyTrajectories {
    pub body_names: Vec<String>,
    pub frame_rate: f64,
    pub positions: Vec<Vec<Vector3<f64>>>,
    pub orientations: Vec<Vec<UnitQuaternion<f64>>>,
}

impl BodyTrajectories {
    pub fn frame_count(&self) -> usize {
        self.positions.len()
    }
}

/// Scale the source clip's FK trajectories per the config.
pub fn scale_source_motion(
    clip: &MotionClip,
    human: &HumanModel,
    config: &RetargetConfig,
) -> Result<BodyTrajectories, RetargetError> {
    config.validate()?;
    if clip.values.is_empty() {
        return Err(RetargetError::EmptyClip);
    }
    let tree = &human.tree;

    // every scale-map key must name a bone of this skeleton
    for key in config.local_scale_per_bone.keys() {
        let found = tree.joints().iter().any(|j| base_name(&j.name) == key);
        if !found {
            return Err(RetargetError::UnknownBone(key.clone()));
        }
    }

    let rest_root = tree.rest_pose().root_position;
    let scale_for = |frame_name: &str| -> f64 {
        config
            .local_scale_per_bone
            .get(base_name(frame_name))
            .copied()
            .unwrap_or(1.0)
    };

    let n_bodies = tree.frame_count();
    let mut positions = Vec::with_capacity(clip.values.len());
    let mut orientations = Vec::with_capacity(clip.values.len());

    for row in &clip.values {
        let pose = human.pose_at(row);
        let fk = forward_kinematics(tree, &pose)?;

        let mut scaled = Vec::with_capacity(n_bodies);
        // root displacement from rest, scaled uniformly (or per-axis in
        // the ablation configuration)
        let d = fk.positions[0] - rest_root;
        let scaled_d = match config.root_translation_scale_per_axis {
            Some([sx, sy, sz]) => Vector3::new(sx * d.x, sy * d.y, sz * d.z),
            None => d * config.root_translation_scale,
        };
        scaled.push(rest_root + scaled_d);

        for (i, joint) in tree.joints().iter().enumerate().skip(1) {
            let parent = joint.parent.expect("non-root frames have parents");
            let bone = fk.positions[i] - fk.positions[parent];
            let s = scale_for(&joint.name);
            let p: Vector3<f64> = scaled[parent] + bone * s;
            scaled.push(p);
        }
        positions.push(scaled);
        orientations.push(fk.orientations);
    }

    Ok(BodyTrajectories {
        body_names: tree.joints().iter().map(|j| j.name.clone()).collect(),
        frame_rate: clip.frame_rate,
        positions,
        orientations,
    })
}
