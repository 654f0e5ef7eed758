//! Multi-bounce single-photon lidar: a deterministic transient simulator and
//! closed-form inverse toolkit.
//!
//! The forward model ([`render`]) renders multiplexed time-resolved
//! histograms for box rooms with primitive objects and wall mirrors. The
//! inverse side recovers depth, per-spot two-bounce time of flight, shadow
//! and specular masks ([`demux`]) and carves an occlusion-aware occupancy
//! grid ([`carve`]). [`metrics`] scores the results and [`io`] holds the
//! scene generator and file formats.

// `!(x > y)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carve;
pub mod demux;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod render;

pub use error::{Error, Result};
