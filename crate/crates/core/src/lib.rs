//! Protective measurement of a qubit coupled to a spin environment.
//!
//! Two engines compute the same physics: [`exact`] enumerates a finite spin
//! environment branch by branch, and [`continuum`] integrates over a Gaussian
//! distribution of environment fields. [`ensemble`] samples the pointer
//! readout run by run, and [`planner`] converts Stern–Gerlach apparatus
//! parameters in SI units to the dimensionless model.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuum;
pub mod curves;
pub mod ensemble;
pub mod error;
pub mod exact;
pub mod field;
pub mod figures;
pub mod params;
pub mod phase;
pub mod planner;
pub mod pointer;
pub mod quadrature;
pub mod stats;
pub mod sweep;
pub mod units;
pub mod validate;

pub use error::{Error, RegimeWarning, Result};
pub use field::MeasurementGeometry;
pub use phase::{Phase, PhaseTreatment};
