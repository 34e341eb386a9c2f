//! Mobility prediction for a wheeled bevameter.
//!
//! The crate covers the whole measurement-to-decision chain without touching
//! the file system:
//!
//! * [`soil`] is a seedable synthetic soil that answers load and slip queries
//!   the way a sandbox would.
//! * [`vision`] estimates sinkage, entry angle and exit angle from an image of
//!   a marker-equipped wheel, and renders ground-truth scenes for testing.
//! * [`probe`] runs the pressure-sinkage and shear protocols and fits the
//!   quadratic sinkage and slip predictors.
//! * [`traverse`] turns predictions into traversability scores and plans the
//!   safest path across a terrain grid.
//! * [`verification`] reproduces the probe-then-drive consistency experiment.
//!
//! Everything is `no_std` + `alloc`; file formats and the command-line
//! harness live in the `wheelprobe` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod linalg;
pub mod probe;
pub mod record;
pub mod seed;
pub mod soil;
pub mod traverse;
pub mod verification;
pub mod vision;

pub use record::MeasurementRecord;
pub use soil::{SoilError, SoilPresetLibrary, SoilResponse, WheelGeometry};

/// Standard gravity used to convert robot mass to wheel load, m/s².
pub const GRAVITY: f64 = 9.81;
