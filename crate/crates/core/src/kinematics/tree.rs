//! Kinematic tree core: description format, forward kinematics, Jacobians,
//! joint limits.
//!
//! A tree is an ordered list of frames, parents before children. Frames are
//! either revolute joints (one angle each, in declaration order) or
//! structural frames with no degree of freedom (the floating base, fixed
//! attachments like a head marker). The world transform of frame `j` is
//!
//! ```text
//! T_j = T_parent * translation(offset_j) * rotation(axis_j, angle_j)
//! ```
//!
//! with the rotation term absent for structural frames. Quaternions are
//! w-first Hamilton convention, active rotations (nalgebra's convention).

use nalgebra::{DMatrix, Unit, UnitQuaternion, Vector3};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum JointKind {
    /// One rotational degree of freedom about `axis` (unit, parent frame).
    Revolute {
        axis: Unit<Vector3<f64>>,
        limit_lower: f64,
        limit_upper: f64,
        /// Index into `Pose::joint_angles`.
        dof: usize,
    },
    /// Structural frame: rigid offset, no degree of freedom.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub name: String,
    /// Index of the parent frame; `None` marks the tree root.
    pub parent: Option<usize>,
    /// Offset from the parent frame, meters, expressed in the parent frame.
    pub offset: Vector3<f64>,
    pub kind: JointKind,
    pub is_key_body: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicTree {
    joints: Vec<JointSpec>,
    /// True when the root is a 6-DoF floating base driven by the pose's
    /// root position and orientation.
    root_free: bool,
    n_dof: usize,
    /// dof index -> frame index.
    dof_frames: Vec<usize>,
}

/// A full configuration: floating-base transform plus one angle per
/// revolute joint.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub root_position: Vector3<f64>,
    pub root_orientation: UnitQuaternion<f64>,
    pub joint_angles: Vec<f64>,
}

/// Forward-kinematics output: world position and orientation per frame,
/// indexed like `KinematicTree::joints`.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyTransforms {
    pub positions: Vec<Vector3<f64>>,
    pub orientations: Vec<UnitQuaternion<f64>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("line {line}: expected 11 fields, found {found}")]
    BadFieldCount { line: usize, found: usize },
    #[error("line {line}: `{token}` is not a number")]
    NonNumeric { line: usize, token: String },
    #[error("duplicate joint name `{0}`")]
    DuplicateName(String),
    #[error("joint `{joint}` references unknown parent `{parent}` (parents must be declared first)")]
    MissingParent { joint: String, parent: String },
    #[error("joint `{joint}` has non-unit axis ({x}, {y}, {z})")]
    NonUnitAxis { joint: String, x: f64, y: f64, z: f64 },
    #[error("joint `{joint}`: limit_lower {lower} exceeds limit_upper {upper}")]
    BadLimits { joint: String, lower: f64, upper: f64 },
    #[error("description declares {0} roots; exactly one frame may have parent `-`")]
    RootCount(usize),
    #[error("a free root must be a structural frame (axis 0 0 0), `{0}` is revolute")]
    FreeRevoluteRoot(String),
    #[error("description is empty")]
    Empty,
    #[error("pose has {found} joint angles, tree has {expected} degrees of freedom")]
    DofMismatch { expected: usize, found: usize },
    #[error("body index {index} out of range ({count} frames)")]
    BadBodyIndex { index: usize, count: usize },
    #[error("body `{0}` not found")]
    UnknownBody(String),
    #[error("joint `{joint}`: position channels are only supported on the root")]
    PositionChannelNotRoot { joint: String },
}

impl KinematicTree {
    /// Build from parts, validating ordering and axis invariants.
    pub fn new(joints: Vec<JointSpec>, root_free: bool) -> Result<Self, TreeError> {
        if joints.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut roots = 0;
        let mut dof_frames = Vec::new();
        for (i, j) in joints.iter().enumerate() {
            match j.parent {
                None => roots += 1,
                Some(p) if p >= i => {
                    return Err(TreeError::MissingParent {
                        joint: j.name.clone(),
                        parent: format!("#{p}"),
                    })
                }
                _ => {}
            }
            if joints[..i].iter().any(|o| o.name == j.name) {
                return Err(TreeError::DuplicateName(j.name.clone()));
            }
            if let JointKind::Revolute {
                axis,
                limit_lower,
                limit_upper,
                dof,
            } = &j.kind
            {
                if (axis.norm() - 1.0).abs() > 1e-9 {
                    return Err(TreeError::NonUnitAxis {
                        joint: j.name.clone(),
                        x: axis.x,
                        y: axis.y,
                        z: axis.z,
                    });
                }
                if limit_lower > limit_upper {
                    return Err(TreeError::BadLimits {
                        joint: j.name.clone(),
                        lower: *limit_lower,
                        upper: *limit_upper,
                    });
                }
                if *dof != dof_frames.len() {
                    return Err(TreeError::BadBodyIndex {
                        index: *dof,
                        count: dof_frames.len(),
                    });
                }
                dof_frames.push(i);
            }
        }
        if roots != 1 {
            return Err(TreeError::RootCount(roots));
        }
        if root_free {
            if let JointKind::Revolute { .. } = joints[0].kind {
                return Err(TreeError::FreeRevoluteRoot(joints[0].name.clone()));
            }
        }
        let n_dof = dof_frames.len();
        Ok(KinematicTree {
            joints,
            root_free,
            n_dof,
            dof_frames,
        })
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn root_free(&self) -> bool {
        self.root_free
    }

    pub fn frame_count(&self) -> usize {
        self.joints.len()
    }

    /// Frame index of a degree of freedom.
    pub fn dof_frame(&self, dof: usize) -> usize {
        self.dof_frames[dof]
    }

    /// Names of the revolute joints in dof order.
    pub fn dof_names(&self) -> Vec<&str> {
        self.dof_frames
            .iter()
            .map(|&i| self.joints[i].name.as_str())
            .collect()
    }

    pub fn body_index(&self, name: &str) -> Result<usize, TreeError> {
        self.joints
            .iter()
            .position(|j| j.name == name)
            .ok_or_else(|| TreeError::UnknownBody(name.to_string()))
    }

    pub fn key_body_indices(&self) -> Vec<usize> {
        self.joints
            .iter()
            .enumerate()
            .filter(|(_, j)| j.is_key_body)
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-dof limits in dof order, `(-inf, inf)` where unconstrained.
    pub fn limits(&self) -> Vec<(f64, f64)> {
        self.dof_frames
            .iter()
            .map(|&i| match &self.joints[i].kind {
                JointKind::Revolute {
                    limit_lower,
                    limit_upper,
                    ..
                } => (*limit_lower, *limit_upper),
                JointKind::Fixed => unreachable!(),
            })
            .collect()
    }

    /// The zero-angle configuration, root at the root frame's offset.
    pub fn rest_pose(&self) -> Pose {
        Pose {
            root_position: self.joints[0].offset,
            root_orientation: UnitQuaternion::identity(),
            joint_angles: vec![0.0; self.n_dof],
        }
    }

    /// Dof indices along the ancestor chain of `body`, including `body`
    /// itself when revolute.
    pub fn ancestral_dofs(&self, body: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = Some(body);
        while let Some(i) = cur {
            if let JointKind::Revolute { dof, .. } = self.joints[i].kind {
                out.push(dof);
            }
            cur = self.joints[i].parent;
        }
        out.reverse();
        out
    }
}

/// Clamp every joint angle into its limits; the root is untouched.
/// Idempotent.
pub fn clamp_to_limits(tree: &KinematicTree, pose: &Pose) -> Pose {
    let mut out = pose.clone();
    for (angle, (lo, hi)) in out.joint_angles.iter_mut().zip(tree.limits()) {
        *angle = angle.clamp(lo, hi);
    }
    out
}

/// World transform of every frame under `pose`.
pub fn forward_kinematics(tree: &KinematicTree, pose: &Pose) -> Result<BodyTransforms, TreeError> {
    if pose.joint_angles.len() != tree.n_dof {
        return Err(TreeError::DofMismatch {
            expected: tree.n_dof,
            found: pose.joint_angles.len(),
        });
    }
    let n = tree.joints.len();
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    for j in &tree.joints {
        let (base_pos, base_ori) = match j.parent {
            None if tree.root_free => (pose.root_position, pose.root_orientation),
            None => (j.offset, UnitQuaternion::identity()),
            Some(p) => {
                let pp: Vector3<f64> = positions[p];
                let po: UnitQuaternion<f64> = orientations[p];
                (pp + po * j.offset, po)
            }
        };
        let ori = match &j.kind {
            JointKind::Revolute { axis, dof, .. } => {
                base_ori * UnitQuaternion::from_axis_angle(axis, pose.joint_angles[*dof])
            }
            JointKind::Fixed => base_ori,
        };
        positions.push(base_pos);
        orientations.push(ori);
    }
    Ok(BodyTransforms {
        positions,
        orientations,
    })
}

/// Geometric Jacobian of `body_index`: rows are (linear; angular) world
/// velocity, columns are (root linear xyz, root angular xyz, each joint
/// rate in dof order). Root columns are zero for fixed-root trees; the
/// root angular convention is a world-frame rotation about the root
/// position.
pub fn jacobian(
    tree: &KinematicTree,
    pose: &Pose,
    body_index: usize,
) -> Result<DMatrix<f64>, TreeError> {
    let transforms = forward_kinematics(tree, pose)?;
    jacobian_with_transforms(tree, pose, &transforms, body_index)
}

/// Jacobian reusing precomputed FK transforms (the solver's hot path).
pub fn jacobian_with_transforms(
    tree: &KinematicTree,
    pose: &Pose,
    transforms: &BodyTransforms,
    body_index: usize,
) -> Result<DMatrix<f64>, TreeError> {
    if body_index >= tree.joints.len() {
        return Err(TreeError::BadBodyIndex {
            index: body_index,
            count: tree.joints.len(),
        });
    }
    let n_cols = 6 + tree.n_dof;
    let mut jac = DMatrix::zeros(6, n_cols);
    let p_body = transforms.positions[body_index];

    if tree.root_free {
        for k in 0..3 {
            jac[(k, k)] = 1.0;
        }
        let r = p_body - pose.root_position;
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = 1.0;
            let lin = e.cross(&r);
            for row in 0..3 {
                jac[(row, 3 + k)] = lin[row];
            }
            jac[(3 + k, 3 + k)] = 1.0;
        }
    }

    let mut cur = Some(body_index);
    while let Some(i) = cur {
        if let JointKind::Revolute { axis, dof, .. } = &tree.joints[i].kind {
            let parent_ori = match tree.joints[i].parent {
                Some(p) => transforms.orientations[p],
                None if tree.root_free => pose.root_orientation,
                None => UnitQuaternion::identity(),
            };
            let axis_world = parent_ori * axis.into_inner();
            let lin = axis_world.cross(&(p_body - transforms.positions[i]));
            let col = 6 + dof;
            for row in 0..3 {
                jac[(row, col)] = lin[row];
                jac[(3 + row, col)] = axis_world[row];
            }
        }
        cur = tree.joints[i].parent;
    }
    Ok(jac)
}

/// Parse the plain-text robot description. One frame per line:
/// `name parent offset_x offset_y offset_z axis_x axis_y axis_z lower upper key_body_flag`
/// with `-` as the root's parent, `#` comments, and an optional
/// `root free|fixed` directive (default fixed). An all-zero axis declares
/// a structural frame.
pub fn load_robot_description(text: &str) -> Result<KinematicTree, TreeError> {
    let mut joints: Vec<JointSpec> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut root_free = false;
    let mut n_dof = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks[0] == "root" && toks.len() == 2 {
            root_free = match toks[1] {
                "free" => true,
                "fixed" => false,
                other => {
                    return Err(TreeError::NonNumeric {
                        line,
                        token: other.to_string(),
                    })
                }
            };
            continue;
        }
        if toks.len() != 11 {
            return Err(TreeError::BadFieldCount {
                line,
                found: toks.len(),
            });
        }
        let name = toks[0].to_string();
        let parent = if toks[1] == "-" {
            None
        } else {
            let parent_name = toks[1];
            Some(names.iter().position(|n| n == parent_name).ok_or_else(|| {
                TreeError::MissingParent {
                    joint: name.clone(),
                    parent: parent_name.to_string(),
                }
            })?)
        };
        let num = |tok: &str| -> Result<f64, TreeError> {
            tok.parse::<f64>().map_err(|_| TreeError::NonNumeric {
                line,
                token: tok.to_string(),
            })
        };
        let offset = Vector3::new(num(toks[2])?, num(toks[3])?, num(toks[4])?);
        let axis = Vector3::new(num(toks[5])?, num(toks[6])?, num(toks[7])?);
        let lower = num(toks[8])?;
        let upper = num(toks[9])?;
        let key = toks[10] != "0";

        let kind = if axis == Vector3::zeros() {
            JointKind::Fixed
        } else {
            if (axis.norm() - 1.0).abs() > 1e-9 {
                return Err(TreeError::NonUnitAxis {
                    joint: name,
                    x: axis.x,
                    y: axis.y,
                    z: axis.z,
                });
            }
            if lower > upper {
                return Err(TreeError::BadLimits {
                    joint: name,
                    lower,
                    upper,
                });
            }
            let kind = JointKind::Revolute {
                axis: Unit::new_normalize(axis),
                limit_lower: lower,
                limit_upper: upper,
                dof: n_dof,
            };
            n_dof += 1;
            kind
        };

        names.push(name.clone());
        joints.push(JointSpec {
            name,
            parent,
            offset,
            kind,
            is_key_body: key,
        });
    }

    KinematicTree::new(joints, root_free)
}

/// Serialize a tree back to the description format.
/// `load_robot_description(serialize_description(t))` reproduces `t`.
pub fn serialize_description(tree: &KinematicTree) -> String {
    let mut out = String::new();
    out.push_str(if tree.root_free() {
        "root free\n"
    } else {
        "root fixed\n"
    });
    for j in tree.joints() {
        let parent = match j.parent {
            None => "-".to_string(),
            Some(p) => tree.joints()[p].name.clone(),
        };
        let (axis, lower, upper) = match &j.kind {
            JointKind::Revolute {
                axis,
                limit_lower,
                limit_upper,
                ..
            } => (axis.into_inner(), *limit_lower, *limit_upper),
            JointKind::Fixed => (Vector3::zeros(), 0.0, 0.0),
        };
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {} {} {}\n",
            j.name,
            parent,
            j.offset.x,
            j.offset.y,
            j.offset.z,
            axis.x,
            axis.y,
            axis.z,
            lower,
            upper,
            if j.is_key_body { 1 } else { 0 }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn g1() -> KinematicTree {
        load_robot_description(fixtures::G1_DESCRIPTION).unwrap()
    }

    /// Fixed-base 2-link planar chain: two revolute z joints, link length 1.
    fn two_link() -> KinematicTree {
        load_robot_description(
            "root fixed\n\
             j0 - 0 0 0 0 0 1 -10 10 0\n\
             j1 j0 0 1 0 0 0 1 -10 10 0\n\
             tip j1 0 1 0 0 0 0 0 0 1\n",
        )
        .unwrap()
    }

    fn random_pose(tree: &KinematicTree, rng: &mut StdRng) -> Pose {
        let axis = Vector3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        Pose {
            root_position: Vector3::new(rng.gen(), rng.gen(), rng.gen()),
            root_orientation: UnitQuaternion::from_scaled_axis(axis),
            joint_angles: (0..tree.n_dof()).map(|_| rng.gen::<f64>() - 0.5).collect(),
        }
    }

    #[test]
    fn g1_description_loads_with_29_dofs() {
        let tree = g1();
        assert_eq!(tree.n_dof(), 29);
        assert!(tree.root_free());
        let key_names: Vec<&str> = tree
            .key_body_indices()
            .into_iter()
            .map(|i| tree.joints()[i].name.as_str())
            .collect();
        for required in [
            "left_wrist_yaw_joint",
            "right_wrist_yaw_joint",
            "left_ankle_roll_joint",
            "right_ankle_roll_joint",
            "head",
        ] {
            assert!(key_names.contains(&required), "missing key body {required}");
        }
    }

    #[test]
    fn g1_dof_order_matches_table_names() {
        let tree = g1();
        let names = tree.dof_names();
        assert_eq!(names[0], "left_hip_pitch_joint");
        assert_eq!(names[5], "left_ankle_roll_joint");
        assert_eq!(names[11], "right_ankle_roll_joint");
        assert_eq!(names[12], "waist_yaw_joint");
        assert_eq!(names[15], "left_shoulder_pitch_joint");
        assert_eq!(names[21], "left_wrist_yaw_joint");
        assert_eq!(names[28], "right_wrist_yaw_joint");
    }

    #[test]
    fn single_joint_pendulum() {
        let tree = load_robot_description("j0 - 0 0 0 0 1 0 -3.14 3.14 0\n").unwrap();
        assert_eq!(tree.n_dof(), 1);
        assert_eq!(tree.frame_count(), 1);
        assert!(!tree.root_free());
    }

    #[test]
    fn non_unit_axis_is_rejected() {
        let err = load_robot_description("j0 - 0 0 0 0 0 2 -1 1 0\n").unwrap_err();
        assert!(matches!(err, TreeError::NonUnitAxis { .. }));
    }

    #[test]
    fn missing_parent_is_rejected() {
        let err = load_robot_description(
            "j0 - 0 0 0 0 0 1 -1 1 0\nj1 nope 0 1 0 0 0 1 -1 1 0\n",
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::MissingParent { .. }));
    }

    #[test]
    fn duplicate_name_is_rejected() {
        let err = load_robot_description(
            "j0 - 0 0 0 0 0 1 -1 1 0\nj0 j0 0 1 0 0 0 1 -1 1 0\n",
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::DuplicateName(_)));
    }

    #[test]
    fn zero_pose_fk_accumulates_offsets() {
        let tree = g1();
        let fk = forward_kinematics(&tree, &tree.rest_pose()).unwrap();
        // pelvis at its rest offset
        assert_eq!(fk.positions[0], Vector3::new(0.0, 0.0, 0.7821));
        // left hip pitch = pelvis + offset
        let i = tree.body_index("left_hip_pitch_joint").unwrap();
        let d = fk.positions[i] - Vector3::new(0.0, 0.0645, 0.7821 - 0.1027);
        assert!(d.norm() < 1e-12);
        // foot soles land on the ground
        let foot = tree.body_index("left_foot").unwrap();
        assert!(fk.positions[foot].z.abs() < 1e-9);
    }

    #[test]
    fn two_link_quarter_turn_reaches_minus_one_one() {
        let tree = two_link();
        let mut pose = tree.rest_pose();
        // angle of joint index 1 (the elbow) set to pi/2 about z
        pose.joint_angles[1] = std::f64::consts::FRAC_PI_2;
        let fk = forward_kinematics(&tree, &pose).unwrap();
        let tip = tree.body_index("tip").unwrap();
        let d = fk.positions[tip] - Vector3::new(-1.0, 1.0, 0.0);
        assert!(d.norm() < 1e-12, "tip at {:?}", fk.positions[tip]);
    }

    #[test]
    fn fk_is_equivariant_under_root_rotation() {
        let tree = g1();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let pose = random_pose(&tree, &mut rng);
            let fk = forward_kinematics(&tree, &pose).unwrap();
            let rot = UnitQuaternion::from_scaled_axis(Vector3::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ));
            let mut rotated = pose.clone();
            rotated.root_orientation = rot * pose.root_orientation;
            let fk_rot = forward_kinematics(&tree, &rotated).unwrap();
            for i in 0..tree.frame_count() {
                let expected = pose.root_position + rot * (fk.positions[i] - pose.root_position);
                assert!((fk_rot.positions[i] - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let tree = g1();
        let mut rng = StdRng::seed_from_u64(42);
        let h = 1e-6;
        for _ in 0..20 {
            let pose = random_pose(&tree, &mut rng);
            let body = rng.gen_range(0..tree.frame_count());
            let jac = jacobian(&tree, &pose, body).unwrap();
            let fd = finite_difference_jacobian(&tree, &pose, body, h);
            let denom = jac.norm().max(1.0);
            assert!(
                (&jac - &fd).norm() / denom < 1e-5,
                "body {body}: relative error {}",
                (&jac - &fd).norm() / denom
            );
        }
    }

    /// Central-difference oracle for the geometric Jacobian.
    pub(crate) fn finite_difference_jacobian(
        tree: &KinematicTree,
        pose: &Pose,
        body: usize,
        h: f64,
    ) -> DMatrix<f64> {
        let n_cols = 6 + tree.n_dof();
        let mut jac = DMatrix::zeros(6, n_cols);
        let perturb = |col: usize, sign: f64| -> Pose {
            let mut p = pose.clone();
            match col {
                0..=2 => p.root_position[col] += sign * h,
                3..=5 => {
                    let mut axis = Vector3::zeros();
                    axis[col - 3] = sign * h;
                    p.root_orientation = UnitQuaternion::from_scaled_axis(axis) * p.root_orientation;
                }
                _ => p.joint_angles[col - 6] += sign * h,
            }
            p
        };
        for col in 0..n_cols {
            if !tree.root_free() && col < 6 {
                continue;
            }
            let plus = forward_kinematics(tree, &perturb(col, 1.0)).unwrap();
            let minus = forward_kinematics(tree, &perturb(col, -1.0)).unwrap();
            let dpos = (plus.positions[body] - minus.positions[body]) / (2.0 * h);
            let drot = (plus.orientations[body] * minus.orientations[body].inverse()).scaled_axis()
                / (2.0 * h);
            for row in 0..3 {
                jac[(row, col)] = dpos[row];
                jac[(3 + row, col)] = drot[row];
            }
        }
        jac
    }

    #[test]
    fn non_ancestral_columns_are_zero() {
        let tree = g1();
        let mut rng = StdRng::seed_from_u64(3);
        let pose = random_pose(&tree, &mut rng);
        let wrist = tree.body_index("left_wrist_yaw_joint").unwrap();
        let jac = jacobian(&tree, &pose, wrist).unwrap();
        let ancestral = tree.ancestral_dofs(wrist);
        for dof in 0..tree.n_dof() {
            if !ancestral.contains(&dof) {
                let col = jac.column(6 + dof);
                assert!(col.norm() == 0.0, "dof {dof} should be zero");
            }
        }
    }

    #[test]
    fn root_translation_block_is_identity() {
        let tree = g1();
        let pose = tree.rest_pose();
        let jac = jacobian(&tree, &pose, tree.body_index("head").unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(jac[(r, c)], if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn clamp_is_idempotent_and_saturates() {
        let tree = g1();
        let mut pose = tree.rest_pose();
        pose.joint_angles.iter_mut().for_each(|a| *a = f64::INFINITY);
        let clamped = clamp_to_limits(&tree, &pose);
        let uppers: Vec<f64> = tree.limits().iter().map(|(_, u)| *u).collect();
        assert_eq!(clamped.joint_angles, uppers);
        assert_eq!(clamp_to_limits(&tree, &clamped), clamped);

        let in_range = tree.rest_pose();
        assert_eq!(clamp_to_limits(&tree, &in_range), in_range);
    }

    #[test]
    fn description_round_trips() {
        let tree = g1();
        let text = serialize_description(&tree);
        let tree2 = load_robot_description(&text).unwrap();
        assert_eq!(tree, tree2);
    }
}
