//! Transfer a human motion clip onto the robot: rest-pose alignment,
//! non-uniform local bone scaling with uniform root-translation scaling,
//! and a two-stage damped-least-squares differential IK solve per frame.

mod align;
mod driver;
mod motion;
mod scale;
mod solver;

use std::collections::BTreeMap;

use thiserror::Error;

pub use align::{align_rest_pose, RestAlignment};
pub use driver::{retarget_clip, RetargetReport};
pub use motion::{
    compute_root_velocities, parse_robot_motion, write_robot_motion, RobotFrame, RobotMotion,
};
pub use scale::{scale_source_motion, BodyTrajectories};
pub use solver::{stage1_solve, stage2_solve, FrameTargets, SolveReport, TargetSpec};

use crate::kinematics::{KinematicTree, TreeError};

#[derive(Debug, Error, PartialEq)]
pub enum RetargetError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("correspondence line {line}: {message}")]
    CorrespondenceParse { line: usize, message: String },
    #[error("correspondence needs at least one end-effector pair and one orientation-weighted pair")]
    DegenerateCorrespondence,
    #[error("correspondence weight for `{0}` must be finite and non-negative")]
    BadWeight(String),
    #[error("rest alignment needs at least 3 non-collinear correspondence points, found {0}")]
    UnderdeterminedAlignment(usize),
    #[error("bone `{0}` in the scale map does not exist on the source skeleton")]
    UnknownBone(String),
    #[error("scale for `{name}` must be positive, got {value}")]
    BadScale { name: String, value: f64 },
    #[error("solver produced a non-finite residual (bad targets?)")]
    NonFiniteResidual,
    #[error("motion has {0} frames; at least 2 are required")]
    TooFewFrames(usize),
    #[error("motion file is empty")]
    EmptyMotionFile,
    #[error("motion file: {0}")]
    MotionParse(String),
    #[error("clip is empty")]
    EmptyClip,
    #[error("frame {frame}: {source}")]
    AtFrame {
        frame: usize,
        #[source]
        source: Box<RetargetError>,
    },
}

/// One key-body pairing between the skeletons.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondencePair {
    pub human_body: String,
    pub robot_body: String,
    pub weight_position: f64,
    pub weight_orientation: f64,
    pub end_effector: bool,
}

/// The full key-body correspondence. Invariant: at least one end-effector
/// pair and one orientation-weighted pair, all weights finite and
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Correspondence {
    pub pairs: Vec<CorrespondencePair>,
}

impl Correspondence {
    pub fn new(pairs: Vec<CorrespondencePair>) -> Result<Self, RetargetError> {
        for p in &pairs {
            if !(p.weight_position.is_finite() && p.weight_position >= 0.0)
                || !(p.weight_orientation.is_finite() && p.weight_orientation >= 0.0)
            {
                return Err(RetargetError::BadWeight(p.human_body.clone()));
            }
        }
        let has_ee = pairs.iter().any(|p| p.end_effector);
        let has_ori = pairs.iter().any(|p| p.weight_orientation > 0.0);
        if !has_ee || !has_ori {
            return Err(RetargetError::DegenerateCorrespondence);
        }
        Ok(Correspondence { pairs })
    }

    /// Parse the correspondence file: lines of
    /// `human_body robot_body w_pos w_ori ee_flag`, `#` comments.
    pub fn parse(text: &str) -> Result<Self, RetargetError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 5 {
                return Err(RetargetError::CorrespondenceParse {
                    line,
                    message: format!("expected 5 fields, found {}", toks.len()),
                });
            }
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| RetargetError::CorrespondenceParse {
                        line,
                        message: format!("`{t}` is not a number"),
                    })
            };
            pairs.push(CorrespondencePair {
                human_body: toks[0].to_string(),
                robot_body: toks[1].to_string(),
                weight_position: num(toks[2])?,
                weight_orientation: num(toks[3])?,
                end_effector: toks[4] != "0",
            });
        }
        Correspondence::new(pairs)
    }

    /// Resolve body names against both trees.
    pub fn resolve(
        &self,
        human: &KinematicTree,
        robot: &KinematicTree,
    ) -> Result<Vec<ResolvedPair>, RetargetError> {
        self.pairs
            .iter()
            .map(|p| {
                Ok(ResolvedPair {
                    human_index: human.body_index(&p.human_body)?,
                    robot_index: robot.body_index(&p.robot_body)?,
                    weight_position: p.weight_position,
                    weight_orientation: p.weight_orientation,
                    end_effector: p.end_effector,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPair {
    pub human_index: usize,
    pub robot_index: usize,
    pub weight_position: f64,
    pub weight_orientation: f64,
    pub end_effector: bool,
}

/// Retargeting parameters. `local_scale_per_bone` is keyed by source-side
/// bone names (a bone is named after its child body); the root translation
/// scale is a single scalar by contract — the per-axis field exists only
/// for the foot-sliding ablation study.
#[derive(Debug, Clone, PartialEq)]
pub struct RetargetConfig {
    pub local_scale_per_bone: BTreeMap<String, f64>,
    pub root_translation_scale: f64,
    /// Ablation only: scales root displacement per axis instead of
    /// uniformly. Leave `None` for normal operation.
    pub root_translation_scale_per_axis: Option<[f64; 3]>,
    pub damping_lambda: f64,
    pub max_iterations_stage1: usize,
    pub max_iterations_stage2: usize,
    /// Residual-norm convergence threshold, meters.
    pub convergence_tol: f64,
    pub ground_height: f64,
}

impl Default for RetargetConfig {
    fn default() -> Self {
        RetargetConfig {
            local_scale_per_bone: BTreeMap::new(),
            root_translation_scale: 1.0,
            root_translation_scale_per_axis: None,
            damping_lambda: 1e-3,
            max_iterations_stage1: 50,
            max_iterations_stage2: 100,
            convergence_tol: 1e-4,
            ground_height: 0.0,
        }
    }
}

impl RetargetConfig {
    pub fn validate(&self) -> Result<(), RetargetError> {
        for (name, s) in &self.local_scale_per_bone {
            if !(s.is_finite() && *s > 0.0) {
                return Err(RetargetError::BadScale {
                    name: name.clone(),
                    value: *s,
                });
            }
        }
        if !(self.root_translation_scale.is_finite() && self.root_translation_scale > 0.0) {
            return Err(RetargetError::BadScale {
                name: "root_translation_scale".into(),
                value: self.root_translation_scale,
            });
        }
        if !(self.damping_lambda > 0.0) {
            return Err(RetargetError::BadScale {
                name: "damping_lambda".into(),
                value: self.damping_lambda,
            });
        }
        Ok(())
    }

    /// Fill bone scales and the root scale from the rest poses: each
    /// correspondence segment gets robot length / human length, and the
    /// root scale is the leg-length ratio.
    pub fn with_auto_scales(
        mut self,
        human: &KinematicTree,
        robot: &KinematicTree,
        correspondence: &Correspondence,
    ) -> Result<Self, RetargetError> {
        let pairs = correspondence.resolve(human, robot)?;
        let human_fk = crate::kinematics::forward_kinematics(human, &human.rest_pose())?;
        let robot_fk = crate::kinematics::forward_kinematics(robot, &robot.rest_pose())?;

        // nearest strict ancestor of a human body that is itself paired
        let paired_human: Vec<usize> = pairs.iter().map(|p| p.human_index).collect();
        for pair in &pairs {
            let mut cur = human.joints()[pair.human_index].parent;
            let mut path = vec![pair.human_index];
            let ancestor = loop {
                match cur {
                    None => break None,
                    Some(i) => {
                        if let Some(anc) = pairs.iter().find(|q| q.human_index == i) {
                            break Some(*anc);
                        }
                        path.push(i);
                        cur = human.joints()[i].parent;
                    }
                }
            };
            let Some(anc) = ancestor else { continue };
            let human_len =
                (human_fk.positions[pair.human_index] - human_fk.positions[anc.human_index]).norm();
            let robot_len =
                (robot_fk.positions[pair.robot_index] - robot_fk.positions[anc.robot_index]).norm();
            if human_len < 1e-9 {
                continue;
            }
            let s = robot_len / human_len;
            for &frame in &path {
                let name = base_name(&human.joints()[frame].name).to_string();
                self.local_scale_per_bone.entry(name).or_insert(s);
            }
        }
        let _ = paired_human;

        // root scale = robot leg length / human leg length, measured as the
        // rest drop from the root to the lowest paired body
        let human_root_z = human.rest_pose().root_position.z;
        let robot_root_z = robot.rest_pose().root_position.z;
        let human_low = pairs
            .iter()
            .map(|p| human_fk.positions[p.human_index].z)
            .fold(f64::MAX, f64::min);
        let robot_low = pairs
            .iter()
            .map(|p| robot_fk.positions[p.robot_index].z)
            .fold(f64::MAX, f64::min);
        let human_leg = human_root_z - human_low;
        let robot_leg = robot_root_z - robot_low;
        if human_leg > 1e-9 && robot_leg > 0.0 {
            self.root_translation_scale = robot_leg / human_leg;
        }
        Ok(self)
    }
}

/// Strip the `__r<k>` / `__base` suffix a BVH-derived frame carries, so
/// scale maps can be keyed by plain joint names.
pub(crate) fn base_name(frame_name: &str) -> &str {
    match frame_name.find("__") {
        Some(i) => &frame_name[..i],
        None => frame_name,
    }
}
