//! Mean-field simulator of a phonon laser driven by cavity superradiance.
//!
//! Two tunnel-coupled optical cavities: one holds a mechanical membrane,
//! the other a transversely pumped condensate that undergoes the Dicke
//! superradiant transition. The crate computes the transition point,
//! analytic and time-domain steady states, the mechanical gain of the
//! membrane, lasing thresholds and pump powers, and tabulates them over
//! parameter sweeps.
//!
//! Module layout:
//! - [`params`]: raw inputs and derived quantities (all rates in rad/s)
//! - [`config`]: the sectioned `key_unit = value` parameter file
//! - [`dicke`]: critical coupling and closed-form steady states
//! - [`dynamics`]: mean-field equations of motion and their integration
//! - [`gain`]: population inversion, mechanical gain, threshold, pump power
//! - [`sweep`]: parameter sweeps, threshold reports and dynamics validation

// Guards are written `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod dicke;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod gain;
pub mod numeric;
pub mod params;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{derive, DerivedParams, RawParams};
