//! Convert a BVH skeleton into a kinematic tree so one FK/Jacobian engine
//! serves both embodiments.
//!
//! Each 3-rotation BVH joint becomes three stacked revolute frames about the
//! channel axes in declaration order; composing them reproduces the BVH
//! rotation product (e.g. `Zrotation Xrotation Yrotation` gives
//! `Rz * Rx * Ry`). The frame after the full stack carries the joint's plain
//! name, so correspondence files can refer to BVH joints directly.
//!
//! A root with position channels becomes the 6-DoF floating base: its
//! rotation channels fold into the base orientation rather than into
//! revolute joints, which keeps the base from being redundant with a
//! rotation stack during IK.

use nalgebra::{Unit, UnitQuaternion, Vector3};

use super::tree::{JointKind, JointSpec, KinematicTree, Pose, TreeError};
use crate::motion_io::{BvhChannel, BvhDocument, BvhJoint};

/// Where each BVH channel lands in a [`Pose`].
#[derive(Debug, Clone, Copy, PartialEq)]
enum ChannelTarget {
    RootPosition(usize),
    /// Root rotation channel: composed into the base orientation in
    /// declaration order.
    RootRotation(BvhChannel),
    Dof(usize),
}

/// Maps BVH frame rows (document channel order) onto poses of the
/// converted tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BvhChannelMap {
    targets: Vec<ChannelTarget>,
    n_dof: usize,
    rest_root: Vector3<f64>,
}

impl BvhChannelMap {
    /// Build a pose from one frame row (values already in radians/meters).
    /// Channels missing from the row default to the rest configuration.
    pub fn pose_from_row(&self, row: &[f64]) -> Pose {
        let mut pose = Pose {
            root_position: self.rest_root,
            root_orientation: UnitQuaternion::identity(),
            joint_angles: vec![0.0; self.n_dof],
        };
        for (value, target) in row.iter().zip(&self.targets) {
            match target {
                ChannelTarget::RootPosition(axis) => pose.root_position[*axis] = *value,
                ChannelTarget::RootRotation(ch) => {
                    pose.root_orientation = pose.root_orientation
                        * UnitQuaternion::from_axis_angle(&channel_axis(*ch), *value);
                }
                ChannelTarget::Dof(d) => pose.joint_angles[*d] = *value,
            }
        }
        pose
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }
}

/// A BVH-derived skeleton: the kinematic tree plus the channel mapping
/// needed to turn clip rows into poses.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanModel {
    pub tree: KinematicTree,
    pub channel_map: BvhChannelMap,
}

impl HumanModel {
    pub fn from_document(doc: &BvhDocument) -> Result<Self, TreeError> {
        let (tree, channel_map) = tree_from_bvh(doc)?;
        Ok(HumanModel { tree, channel_map })
    }

    pub fn pose_at(&self, row: &[f64]) -> Pose {
        self.channel_map.pose_from_row(row)
    }
}

fn channel_axis(ch: BvhChannel) -> Unit<Vector3<f64>> {
    match ch {
        BvhChannel::XPosition | BvhChannel::XRotation => Unit::new_unchecked(Vector3::x()),
        BvhChannel::YPosition | BvhChannel::YRotation => Unit::new_unchecked(Vector3::y()),
        BvhChannel::ZPosition | BvhChannel::ZRotation => Unit::new_unchecked(Vector3::z()),
    }
}

fn position_axis(ch: BvhChannel) -> usize {
    match ch {
        BvhChannel::XPosition => 0,
        BvhChannel::YPosition => 1,
        BvhChannel::ZPosition => 2,
        _ => unreachable!(),
    }
}

/// Convert a parsed BVH document into a kinematic tree and channel map.
/// Position channels are only supported on the root joint.
pub fn tree_from_bvh(doc: &BvhDocument) -> Result<(KinematicTree, BvhChannelMap), TreeError> {
    let mut joints: Vec<JointSpec> = Vec::new();
    let mut targets: Vec<ChannelTarget> = Vec::new();
    let mut n_dof = 0usize;

    let root_free = doc.root.channels.iter().any(|c| !c.is_rotation());

    if root_free {
        // floating base carries the root's position and rotation channels
        joints.push(JointSpec {
            name: doc.root.name.clone(),
            parent: None,
            offset: Vector3::from(doc.root.offset),
            kind: JointKind::Fixed,
            is_key_body: false,
        });
        for ch in &doc.root.channels {
            if ch.is_rotation() {
                targets.push(ChannelTarget::RootRotation(*ch));
            } else {
                targets.push(ChannelTarget::RootPosition(position_axis(*ch)));
            }
        }
        for child in &doc.root.children {
            convert_joint(child, Some(0), &mut joints, &mut targets, &mut n_dof)?;
        }
    } else {
        // fixed base at the root offset; root rotations become a stack
        joints.push(JointSpec {
            name: format!("{}__base", doc.root.name),
            parent: None,
            offset: Vector3::from(doc.root.offset),
            kind: JointKind::Fixed,
            is_key_body: false,
        });
        convert_stack_and_children(&doc.root, 0, Vector3::zeros(), &mut joints, &mut targets, &mut n_dof)?;
    }

    let tree = KinematicTree::new(joints, root_free)?;
    let map = BvhChannelMap {
        targets,
        n_dof,
        rest_root: doc.root.offset.into(),
    };
    Ok((tree, map))
}

fn convert_joint(
    joint: &BvhJoint,
    parent: Option<usize>,
    joints: &mut Vec<JointSpec>,
    targets: &mut Vec<ChannelTarget>,
    n_dof: &mut usize,
) -> Result<(), TreeError> {
    for ch in &joint.channels {
        if !ch.is_rotation() {
            return Err(TreeError::PositionChannelNotRoot {
                joint: joint.name.clone(),
            });
        }
    }
    let parent = parent.expect("non-root joints have parents");
    convert_stack_and_children(joint, parent, Vector3::from(joint.offset), joints, targets, n_dof)
}

/// Emit the revolute stack for `joint`'s rotation channels, the named end
/// frame, and recurse into children.
fn convert_stack_and_children(
    joint: &BvhJoint,
    parent: usize,
    offset: Vector3<f64>,
    joints: &mut Vec<JointSpec>,
    targets: &mut Vec<ChannelTarget>,
    n_dof: &mut usize,
) -> Result<(), TreeError> {
    let mut attach = parent;
    let mut pending_offset = offset;
    let mut rot_index = 0;
    for ch in &joint.channels {
        if !ch.is_rotation() {
            continue; // root positions handled by the caller
        }
        targets.push(ChannelTarget::Dof(*n_dof));
        joints.push(JointSpec {
            name: format!("{}__r{}", joint.name, rot_index),
            parent: Some(attach),
            offset: pending_offset,
            kind: JointKind::Revolute {
                axis: channel_axis(*ch),
                limit_lower: f64::NEG_INFINITY,
                limit_upper: f64::INFINITY,
                dof: *n_dof,
            },
            is_key_body: false,
        });
        *n_dof += 1;
        rot_index += 1;
        attach = joints.len() - 1;
        pending_offset = Vector3::zeros();
    }

    // named frame at the end of the stack; children and correspondences
    // attach here
    joints.push(JointSpec {
        name: joint.name.clone(),
        parent: Some(attach),
        offset: pending_offset,
        kind: JointKind::Fixed,
        is_key_body: false,
    });
    let named = joints.len() - 1;

    for child in &joint.children {
        convert_joint(child, Some(named), joints, targets, n_dof)?;
    }
    Ok(())
}
