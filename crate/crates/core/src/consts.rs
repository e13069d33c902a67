//! Physical constants (SI).

use core::f64::consts::PI;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 4.0e-7 * PI;

/// Free-space wave impedance used by the reflection model, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 377.0;
