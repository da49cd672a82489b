//! Kinematic trees for the robot and for BVH-derived human skeletons:
//! loading, forward kinematics, Jacobians, and joint-limit handling.

mod bvh_tree;
mod tree;

pub use bvh_tree::{tree_from_bvh, BvhChannelMap, HumanModel};
pub use tree::{
    clamp_to_limits, forward_kinematics, jacobian, jacobian_with_transforms,
    load_robot_description, serialize_description, BodyTransforms, JointKind, JointSpec,
    KinematicTree, Pose, TreeError,
};
