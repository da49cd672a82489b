//! Motion capture and audio ingest: BVH parse/write, WAV decode, clip
//! resampling, and the plain-text clip interchange format.
//!
//! Everything past the parser works in radians and meters. BVH stores
//! rotations in degrees; the parser converts on ingest and the writer
//! converts back.

mod bvh;
mod clip;
mod wav;

pub use bvh::{parse_bvh, write_bvh, BvhChannel, BvhDocument, BvhError, BvhJoint, UnitPolicy};
pub use clip::{
    bvh_to_clip, clip_into_bvh, parse_clip, resample_clip, write_clip, ClipError, MotionClip,
};
pub use wav::{encode_wav_pcm16, read_wav, AudioBuffer, WavError};
