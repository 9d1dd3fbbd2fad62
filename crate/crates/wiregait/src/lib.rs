//! Computational core of a remote wire-driven quadruped.
//!
//! The robot walks on four two-link legs driven through long wires from a
//! detached motor unit. Power travels through a chain of decoupled joints
//! that bends freely without disturbing the wire lengths, and each body
//! side couples its front and back leg through one shared wire pair so that
//! a single trajectory drives both. This crate implements the pieces of
//! that system that are pure computation:
//!
//! - [`leg`]: planar forward/inverse kinematics of one leg;
//! - [`tendon`]: the linear wire-displacement model and the front/back
//!   coupling map it induces;
//! - [`gait`]: trot-gait plan construction and its invariants;
//! - [`optimize`]: constrained search for the coupling design parameters;
//! - [`chain`]: decoupled-joint chain geometry, path-length invariance and
//!   transmission-efficiency comparison against a tendon-sheath run;
//! - [`pipeline`]: velocity-limited, splined, time-scaled motor commands;
//! - [`config`]/[`export`]: strict TOML/JSON ingestion and CSV/JSON/SVG
//!   emission.

// validators use `!(x > 0.0)` so NaN fails them; spelling that through
// partial_cmp everywhere hurts more than it helps
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod config;
pub mod error;
pub mod export;
pub mod gait;
pub mod leg;
pub mod optimize;
pub mod pipeline;
pub mod tendon;

pub use error::{Error, Result};
