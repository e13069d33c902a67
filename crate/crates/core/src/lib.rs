//! Models for wave-controlled reconfigurable intelligent surfaces.
//!
//! A single biasing transmission line carries low-frequency standing waves;
//! a peak-detecting rectifier at every element tap turns the local standing
//! wave into a dc bias, each varactor-tuned unit cell maps its bias to a
//! reflection coefficient at the carrier, and the reflection profile sets the
//! scattered far-field pattern.
//!
//! The crate is `no_std` (with `alloc`) and every operation is a pure
//! function of its inputs. File formats, the command line and parallel scans
//! live in the `wavectl` companion crate.
//!
//! Modules follow the signal chain:
//!
//! * [`btl`]: standing waves, rectified bias, line input impedance.
//! * [`unitcell`]: varactor table, surface impedance, reflection, circuit fit.
//! * [`radiation`]: normalized array factor and pattern metrics.
//! * [`steering`]: operating-point evaluation and parameter-space search.
//! * [`cascade`]: loaded-line phasor solver used to validate the ideal model.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod btl;
pub mod cascade;
pub mod consts;
mod error;
pub mod math;
pub mod radiation;
pub mod reference;
pub mod steering;
pub mod unitcell;
mod validate;

pub use error::{Error, FitError, Result};
pub use num_complex::Complex64;
pub use validate::{Validate, Violation};
