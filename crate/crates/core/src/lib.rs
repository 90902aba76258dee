//! Toolkit for 360° video research: an objective video taxonomy (spherical
//! quality, camera motion, ROI dispersion), head/gaze trace analytics and
//! gaze-assisted viewport prediction for tile-based streaming.
//!
//! Coordinates are normalized equirectangular points: `x ∈ [0, 1)` is
//! longitude and wraps, `y ∈ [0, 1]` runs from the north pole down.

pub mod analytics;
pub mod commands;
pub mod data;
pub mod error;
pub mod frame;
pub mod geo;
pub mod par;
pub mod predict;
pub mod taxonomy;

pub use error::{Error, Result};
