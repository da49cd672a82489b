//! Motion-processing toolkit for audio-driven humanoid gesture synthesis.
//!
//! The pipeline stages, in data-flow order:
//!
//! 1. [`motion_io`] — BVH motion capture and WAV audio ingest, clip resampling,
//!    plain-text interchange formats.
//! 2. [`kinematics`] — kinematic trees (a bundled 29-DoF humanoid description
//!    plus trees derived from BVH skeletons), forward kinematics, Jacobians.
//! 3. [`retarget`] — rest-pose alignment, non-uniform local scaling, and
//!    two-stage damped-least-squares inverse kinematics that transfers a human
//!    clip onto the robot.
//! 4. [`rvq`] — residual vector quantization of motion frames into token
//!    stacks (body and hand parts), and reconstruction back to channels.
//! 5. [`audio_features`] — MFCC, delta, chromagram, onset strength, and
//!    tempogram extraction, frame-aligned to the motion rate.
//! 6. [`generator`] — count-based autoregressive token model conditioned on
//!    audio tokens, keyword gesture retrieval, latent-level splicing.
//! 7. [`control_map`] — tanh-bounded residual PD target mapping.
//! 8. [`metrics`] — joint-wise RMSE, foot sliding, ground penetration,
//!    velocity spikes, sphere-proxy self-intersection.
//!
//! [`fixtures`] synthesizes deterministic demo data (skeletons, clips, WAV)
//! used by the test suite and the `gen-fixtures` CLI subcommand.

pub mod audio_features;
pub mod fixtures;
pub mod kinematics;
pub mod metrics;
pub mod motion_io;
pub mod retarget;
pub mod rvq;

pub use kinematics::{BodyTransforms, JointKind, JointSpec, KinematicTree, Pose};
pub use motion_io::{AudioBuffer, BvhDocument, BvhJoint, MotionClip};
pub use retarget::RobotMotion;
