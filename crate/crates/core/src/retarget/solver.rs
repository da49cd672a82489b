//! Per-frame differential IK: damped least squares over the stacked
//! weighted residual, with limit clamping each iterate and a halving line
//! search so the residual norm never increases.
//!
//! Stage 1 stacks orientation residuals for every orientation-weighted
//! target plus position residuals for end effectors only. Stage 2 extends
//! the position residuals to every position-weighted target.

use nalgebra::{DMatrix, DVector, UnitQuaternion, Vector3};

use super::{RetargetConfig, RetargetError};
use crate::kinematics::{
    clamp_to_limits, forward_kinematics, jacobian_with_transforms, KinematicTree, Pose,
};

/// One body's targets for a single frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub body_index: usize,
    pub weight_position: f64,
    pub weight_orientation: f64,
    pub end_effector: bool,
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

/// All targets for one frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameTargets {
    pub targets: Vec<TargetSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    /// Residual norm after each accepted iterate, starting with the
    /// initial value. Non-increasing by construction.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    OrientationAndEndEffectors,
    AllKeyBodies,
}

/// Stage 1: orientation targets everywhere they are weighted, position
/// targets for end effectors only. A stable initialization for stage 2.
pub fn stage1_solve(
    tree: &KinematicTree,
    targets: &FrameTargets,
    warm_start: &Pose,
    config: &RetargetConfig,
) -> Result<(Pose, SolveReport), RetargetError> {
    solve(
        tree,
        targets,
        warm_start,
        config,
        config.max_iterations_stage1,
        Stage::OrientationAndEndEffectors,
    )
}

/// Stage 2: stage-1 terms plus position targets for all key bodies.
pub fn stage2_solve(
    tree: &KinematicTree,
    targets: &FrameTargets,
    init: &Pose,
    config: &RetargetConfig,
) -> Result<(Pose, SolveReport), RetargetError> {
    solve(
        tree,
        targets,
        init,
        config,
        config.max_iterations_stage2,
        Stage::AllKeyBodies,
    )
}

/// Residual norm of the stage-2 objective at an arbitrary pose. Used to
/// assert that stage 2 never degrades its own objective relative to its
/// initialization.
pub fn stage2_objective(
    tree: &KinematicTree,
    targets: &FrameTargets,
    pose: &Pose,
) -> Result<f64, RetargetError> {
    let fk = forward_kinematics(tree, pose)?;
    let r = residual(targets, &fk, Stage::AllKeyBodies)?;
    Ok(r.norm())
}

fn rows_for(stage: Stage, t: &TargetSpec) -> (bool, bool) {
    let ori = t.weight_orientation > 0.0;
    let pos = t.weight_position > 0.0
        && match stage {
            Stage::OrientationAndEndEffectors => t.end_effector,
            Stage::AllKeyBodies => true,
        };
    (ori, pos)
}

fn residual(
    targets: &FrameTargets,
    fk: &crate::kinematics::BodyTransforms,
    stage: Stage,
) -> Result<DVector<f64>, RetargetError> {
    let mut entries = Vec::new();
    for t in &targets.targets {
        let (ori, pos) = rows_for(stage, t);
        if ori {
            let err =
                (t.orientation * fk.orientations[t.body_index].inverse()).scaled_axis();
            entries.extend_from_slice((err * t.weight_orientation).as_slice());
        }
        if pos {
            let err = t.position - fk.positions[t.body_index];
            entries.extend_from_slice((err * t.weight_position).as_slice());
        }
    }
    let r = DVector::from_vec(entries);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(RetargetError::NonFiniteResidual);
    }
    Ok(r)
}

fn stacked_jacobian(
    tree: &KinematicTree,
    pose: &Pose,
    targets: &FrameTargets,
    fk: &crate::kinematics::BodyTransforms,
    stage: Stage,
) -> Result<DMatrix<f64>, RetargetError> {
    let n_cols = 6 + tree.n_dof();
    let mut rows: Vec<DMatrix<f64>> = Vec::new();
    for t in &targets.targets {
        let (ori, pos) = rows_for(stage, t);
        if !(ori || pos) {
            continue;
        }
        let body_jac = jacobian_with_transforms(tree, pose, fk, t.body_index)?;
        if ori {
            let mut block = DMatrix::zeros(3, n_cols);
            block.copy_from(&body_jac.rows(3, 3));
            block *= t.weight_orientation;
            rows.push(block);
        }
        if pos {
            let mut block = DMatrix::zeros(3, n_cols);
            block.copy_from(&body_jac.rows(0, 3));
            block *= t.weight_position;
            rows.push(block);
        }
    }
    let total: usize = rows.iter().map(|b| b.nrows()).sum();
    let mut jac = DMatrix::zeros(total, n_cols);
    let mut at = 0;
    for block in rows {
        jac.rows_mut(at, block.nrows()).copy_from(&block);
        at += block.nrows();
    }
    Ok(jac)
}

fn apply_step(tree: &KinematicTree, pose: &Pose, step: &DVector<f64>, alpha: f64) -> Pose {
    let mut out = pose.clone();
    if tree.root_free() {
        out.root_position += Vector3::new(step[0], step[1], step[2]) * alpha;
        let rot = UnitQuaternion::from_scaled_axis(
            Vector3::new(step[3], step[4], step[5]) * alpha,
        );
        out.root_orientation = rot * out.root_orientation;
    }
    for (i, angle) in out.joint_angles.iter_mut().enumerate() {
        *angle += alpha * step[6 + i];
    }
    clamp_to_limits(tree, &out)
}

fn solve(
    tree: &KinematicTree,
    targets: &FrameTargets,
    start: &Pose,
    config: &RetargetConfig,
    max_iterations: usize,
    stage: Stage,
) -> Result<(Pose, SolveReport), RetargetError> {
    config.validate()?;
    let lambda2 = config.damping_lambda * config.damping_lambda;
    let mut pose = clamp_to_limits(tree, start);
    let mut fk = forward_kinematics(tree, &pose)?;
    let mut r = residual(targets, &fk, stage)?;
    let mut rn = r.norm();
    let mut history = vec![rn];
    let mut converged = rn <= config.convergence_tol;
    let mut iterations = 0;

    while !converged && iterations < max_iterations {
        let jac = stacked_jacobian(tree, &pose, targets, &fk, stage)?;
        // normal-equations DLS: (J^T J + lambda^2 I) dq = J^T r
        let jt = jac.transpose();
        let mut a = &jt * &jac;
        for i in 0..a.nrows() {
            a[(i, i)] += lambda2;
        }
        let b = &jt * &r;
        let step = match a.cholesky() {
            Some(chol) => chol.solve(&b),
            None => break,
        };
        if step.iter().any(|v| !v.is_finite()) {
            return Err(RetargetError::NonFiniteResidual);
        }

        // halving line search keeps the residual norm non-increasing even
        // near singular configurations, where the lightly damped step can
        // overshoot by orders of magnitude
        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..24 {
            let cand = apply_step(tree, &pose, &step, alpha);
            let cand_fk = forward_kinematics(tree, &cand)?;
            let cand_r = residual(targets, &cand_fk, stage)?;
            let cand_rn = cand_r.norm();
            if cand_rn < rn {
                pose = cand;
                fk = cand_fk;
                r = cand_r;
                rn = cand_rn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break; // stationary under clamping: no step improves
        }
        history.push(rn);
        converged = rn <= config.convergence_tol;
    }

    Ok((
        pose,
        SolveReport {
            iterations,
            initial_residual: history[0],
            final_residual: rn,
            residual_history: history,
            converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::load_robot_description;

    /// Fixed-base 2-link planar arm in the xz plane, both joints about +y,
    /// unit links along +x.
    fn two_link() -> KinematicTree {
        load_robot_description(
            "root fixed\n\
             shoulder - 0 0 0 0 1 0 -6.3 6.3 0\n\
             elbow shoulder 1 0 0 0 1 0 -6.3 6.3 0\n\
             hand elbow 1 0 0 0 0 0 0 0 1\n",
        )
        .unwrap()
    }

    fn position_target(tree: &KinematicTree, body: &str, p: Vector3<f64>) -> FrameTargets {
        FrameTargets {
            targets: vec![TargetSpec {
                body_index: tree.body_index(body).unwrap(),
                weight_position: 1.0,
                weight_orientation: 0.0,
                end_effector: true,
                position: p,
                orientation: UnitQuaternion::identity(),
            }],
        }
    }

    #[test]
    fn fixed_point_returns_warm_start() {
        let tree = two_link();
        let mut warm = tree.rest_pose();
        warm.joint_angles = vec![0.3, -0.7];
        let fk = forward_kinematics(&tree, &warm).unwrap();
        let hand = tree.body_index("hand").unwrap();
        let mut targets = position_target(&tree, "hand", fk.positions[hand]);
        targets.targets[0].weight_orientation = 1.0;
        targets.targets[0].orientation = fk.orientations[hand];

        let (pose, report) = stage1_solve(&tree, &targets, &warm, &RetargetConfig::default()).unwrap();
        assert_eq!(pose, warm);
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
    }

    #[test]
    fn reachable_target_converges_to_analytic_elbow_solution() {
        let tree = two_link();
        // target at planar distance d: law of cosines gives the elbow angle
        let target: Vector3<f64> = Vector3::new(1.2, 0.0, 0.9);
        let d = (target.x * target.x + target.z * target.z).sqrt();
        let elbow_mag = std::f64::consts::PI
            - ((2.0 - d * d) / 2.0).clamp(-1.0, 1.0).acos(); // interior angle complement
        let targets = position_target(&tree, "hand", target);
        let mut config = RetargetConfig::default();
        config.convergence_tol = 1e-6;
        config.max_iterations_stage1 = 200;

        let warm = tree.rest_pose();
        let (pose, report) = stage1_solve(&tree, &targets, &warm, &config).unwrap();
        assert!(report.final_residual <= 1e-4, "residual {}", report.final_residual);

        let fk = forward_kinematics(&tree, &pose).unwrap();
        let hand = tree.body_index("hand").unwrap();
        assert!((fk.positions[hand] - target).norm() < 1e-4);
        // elbow magnitude matches the law-of-cosines oracle (sign depends
        // on which branch the solver lands on)
        assert!(
            (pose.joint_angles[1].abs() - elbow_mag.abs()).abs() < 1e-3,
            "elbow {} vs oracle {}",
            pose.joint_angles[1],
            elbow_mag
        );
    }

    #[test]
    fn unreachable_target_extends_arm_monotonically() {
        let tree = two_link();
        // 2x arm length away
        let targets = position_target(&tree, "hand", Vector3::new(4.0, 0.0, 0.0));
        let mut warm = tree.rest_pose();
        warm.joint_angles = vec![0.4, 0.8];
        let (pose, report) =
            stage1_solve(&tree, &targets, &warm, &RetargetConfig::default()).unwrap();

        for w in report.residual_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "residual increased: {w:?}");
        }
        assert!(pose.joint_angles.iter().all(|a| a.is_finite()));
        // fully extended toward the target: the arm straightens to its full
        // 2 m reach, pointing at the target
        let fk = forward_kinematics(&tree, &pose).unwrap();
        let hand = fk.positions[tree.body_index("hand").unwrap()];
        assert!(hand.norm() > 2.0 - 1e-3, "arm not extended: |hand| = {}", hand.norm());
        let dir_err = hand.normalize().cross(&Vector3::x()).norm();
        assert!(dir_err < 0.02, "hand direction off by {dir_err}");
    }

    #[test]
    fn near_singular_start_stays_finite() {
        let tree = two_link();
        // dead straight arm pointing at an on-axis target: Jacobian is
        // singular along the arm
        let targets = position_target(&tree, "hand", Vector3::new(2.5, 0.0, 0.0));
        let warm = tree.rest_pose(); // straight along +x
        let (pose, report) =
            stage1_solve(&tree, &targets, &warm, &RetargetConfig::default()).unwrap();
        assert!(pose.joint_angles.iter().all(|a| a.is_finite()));
        assert!(report.final_residual.is_finite());
    }

    #[test]
    fn zero_weight_pair_is_ignored() {
        let tree = two_link();
        let target = Vector3::new(1.0, 0.0, 1.0);
        let mut targets = position_target(&tree, "hand", target);
        targets.targets.push(TargetSpec {
            body_index: tree.body_index("elbow").unwrap(),
            weight_position: 0.0,
            weight_orientation: 0.0,
            end_effector: false,
            position: Vector3::new(100.0, 100.0, 100.0),
            orientation: UnitQuaternion::identity(),
        });
        let warm = tree.rest_pose();
        let config = RetargetConfig::default();
        let (with_zero, _) = stage2_solve(&tree, &targets, &warm, &config).unwrap();
        targets.targets.pop();
        let (without, _) = stage2_solve(&tree, &targets, &warm, &config).unwrap();
        assert_eq!(with_zero, without);
    }

    #[test]
    fn stage2_objective_never_degrades_from_its_init() {
        let tree = two_link();
        let mut targets = position_target(&tree, "hand", Vector3::new(0.9, 0.0, 1.1));
        targets.targets.push(TargetSpec {
            body_index: tree.body_index("elbow").unwrap(),
            weight_position: 1.0,
            weight_orientation: 0.0,
            end_effector: false,
            position: Vector3::new(0.6, 0.0, 0.6),
            orientation: UnitQuaternion::identity(),
        });
        let config = RetargetConfig::default();
        let warm = tree.rest_pose();
        let (s1, _) = stage1_solve(&tree, &targets, &warm, &config).unwrap();
        let (s2, report) = stage2_solve(&tree, &targets, &s1, &config).unwrap();
        let at_init = stage2_objective(&tree, &targets, &s1).unwrap();
        let at_out = stage2_objective(&tree, &targets, &s2).unwrap();
        assert!(at_out <= at_init + 1e-12);
        assert!((report.final_residual - at_out).abs() < 1e-12);
    }

    #[test]
    fn stage2_improves_mid_chain_position_over_stage1() {
        let tree = two_link();
        // bent-arm fixture: hand target reachable, elbow target off the
        // stage-1 solution
        let mut targets = position_target(&tree, "hand", Vector3::new(1.0, 0.0, 1.0));
        targets.targets.push(TargetSpec {
            body_index: tree.body_index("elbow").unwrap(),
            weight_position: 1.0,
            weight_orientation: 0.0,
            end_effector: false,
            position: Vector3::new(0.70, 0.0, 0.70),
            orientation: UnitQuaternion::identity(),
        });
        let config = RetargetConfig::default();
        let warm = tree.rest_pose();
        let (s1, _) = stage1_solve(&tree, &targets, &warm, &config).unwrap();
        let (s2, _) = stage2_solve(&tree, &targets, &s1, &config).unwrap();
        let elbow = tree.body_index("elbow").unwrap();
        let e1 = (forward_kinematics(&tree, &s1).unwrap().positions[elbow]
            - targets.targets[1].position)
            .norm();
        let e2 = (forward_kinematics(&tree, &s2).unwrap().positions[elbow]
            - targets.targets[1].position)
            .norm();
        assert!(e2 < e1, "stage2 elbow error {e2} !< stage1 {e1}");
    }

    #[test]
    fn weight_rescaling_leaves_converged_pose_unchanged() {
        let tree = two_link();
        let target = Vector3::new(1.1, 0.0, 0.8);
        let mut config = RetargetConfig::default();
        config.convergence_tol = 1e-12;
        config.max_iterations_stage1 = 500;

        let warm = tree.rest_pose();
        let mut targets = position_target(&tree, "hand", target);
        let (a, _) = stage1_solve(&tree, &targets, &warm, &config).unwrap();
        targets.targets[0].weight_position = 7.5;
        let (b, _) = stage1_solve(&tree, &targets, &warm, &config).unwrap();
        for (x, y) in a.joint_angles.iter().zip(&b.joint_angles) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}
