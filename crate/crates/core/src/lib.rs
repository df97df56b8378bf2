//! Online calibration of optical see-through displays.
//!
//! - [`geometry`]: rotations, rigid transforms and pixel projection.
//! - [`display_model`]: the homography-corrected off-axis eye-display model
//!   and its viewpoint-shift update.
//! - [`registration`]: the rotation-constrained ICP that estimates the
//!   viewpoint shift from two hand clouds, plus the rigid ICP baseline and
//!   the rotation guard.
//! - [`simulation`]: synthetic trials and rotational-noise sweeps.

pub mod display_model;
pub mod error;
pub mod geometry;
pub mod registration;
pub mod simulation;

pub use error::{Error, Result};
