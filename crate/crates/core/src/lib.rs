//! Monte Carlo path tracing, atmosphere modelling, synthetic sensors and
//! inverse-rendering pose estimation for space scenes.
//!
//! The crate is organised by capability:
//!
//! - [`math`]: rays, rotations in classical Rodrigues parameters, poses and
//!   pinhole projection.
//! - [`geometry`] and [`accel`]: primitives, OBJ loading, procedural meshes
//!   and a bounding volume hierarchy.
//! - [`shading`], [`scene`] and [`render`]: materials, lights and the
//!   deterministic parallel path tracer.
//! - [`atmosphere`]: exponential shell atmosphere, sky radiance and
//!   refraction.
//! - [`sensors`]: depth maps, point clouds, contours and stereo
//!   triangulation.
//! - [`pose`]: analytic projection Jacobians and the Levenberg-Marquardt
//!   pose solver.
//! - [`scene_file`] and [`cli`]: TOML scene descriptions and the command
//!   line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod accel;
pub mod atmosphere;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod math;
pub mod pose;
pub mod render;
pub mod scene;
pub mod scene_file;
pub mod sensors;
pub mod shading;

pub use error::{Error, Result};
