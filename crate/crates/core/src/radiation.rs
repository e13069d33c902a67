//! Normalized array factor of the linear array and pattern metrics.
//!
//! `F(theta) = (1/M) sum_m R_m exp(j (m k d sin(theta) + alpha_m))` with
//! isotropic elements and normal incidence.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::consts::SPEED_OF_LIGHT;
use crate::math::{parabolic_vertex, stepped_axis, to_db, wrap_phase};
use crate::unitcell::ReflectionProfile;
use crate::validate::{check_positive, push, Validate, Violation};
use crate::{Error, Result};

/// Floor applied when magnitudes are reported in dB.
pub const DB_FLOOR: f64 = -60.0;
/// Default angular step of the pattern grid, degrees.
pub const DEFAULT_STEP_DEG: f64 = 0.05;

/// Carrier, element spacing and the angles to evaluate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternRequest {
    /// Hz.
    pub carrier_frequency: f64,
    /// m.
    pub element_spacing: f64,
    /// rad, strictly increasing within `[-pi/2, pi/2]`.
    pub theta_grid: Vec<f64>,
}

impl PatternRequest {
    /// Request over the default `-90..=90` degree grid.
    pub fn new(carrier_frequency: f64, element_spacing: f64) -> Self {
        PatternRequest {
            carrier_frequency,
            element_spacing,
            theta_grid: default_theta_grid(),
        }
    }

    pub fn with_grid(mut self, theta_grid: Vec<f64>) -> Self {
        self.theta_grid = theta_grid;
        self
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Free-space wavenumber times the element spacing.
    pub fn phase_step(&self) -> f64 {
        2.0 * PI * self.element_spacing / self.wavelength()
    }
}

impl Validate for PatternRequest {
    fn validate_into(&self, path: &str, out: &mut Vec<Violation>) {
        check_positive(out, path, "carrier_frequency", self.carrier_frequency);
        check_positive(out, path, "element_spacing", self.element_spacing);
        if self.theta_grid.is_empty() {
            push(out, path, "theta_grid", "must not be empty");
        }
        let half = PI / 2.0 + 1e-12;
        if self.theta_grid.iter().any(|t| !(t.abs() <= half)) {
            push(out, path, "theta_grid", "angles must lie in [-pi/2, pi/2]");
        }
        if self.theta_grid.windows(2).any(|w| !(w[1] > w[0])) {
            push(out, path, "theta_grid", "angles must strictly increase");
        }
    }
}

/// `-90..=90` degrees in 0.05 degree steps, in radians.
pub fn default_theta_grid() -> Vec<f64> {
    theta_grid_deg(-90.0, 90.0, DEFAULT_STEP_DEG)
}

/// Inclusive grid given in degrees, returned in radians.
pub fn theta_grid_deg(start: f64, stop: f64, step: f64) -> Vec<f64> {
    stepped_axis(start, stop, step).into_iter().map(f64::to_radians).collect()
}

/// Summary figures of a pattern. Angles in radians, levels linear.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternMetrics {
    pub peak_angle: f64,
    pub peak_value: f64,
    /// `|F(0)|`, absent when the grid does not contain broadside.
    pub specular_value: Option<f64>,
    /// Highest local maximum outside the half-power mainlobe.
    pub highest_sidelobe: Option<f64>,
    /// Width between the -3 dB crossings around the peak.
    pub half_power_beamwidth: Option<f64>,
}

/// Sampled `|F(theta)|` with its metrics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadiationPattern {
    pub theta: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub metrics: PatternMetrics,
}

impl RadiationPattern {
    pub fn magnitude_db(&self) -> impl Iterator<Item = f64> + '_ {
        self.magnitude.iter().map(|&m| to_db(m, DB_FLOOR))
    }

    /// Rows of `(theta_deg, linear, dB)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta
            .iter()
            .zip(&self.magnitude)
            .map(|(&t, &m)| (t.to_degrees(), m, to_db(m, DB_FLOOR)))
    }
}

/// Complex array factor at a single angle. `phase_step` is `k d`.
pub fn array_factor_at(profile: &ReflectionProfile, phase_step: f64, theta: f64) -> Complex64 {
    let m = profile.elements.len();
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let psi = phase_step * theta.sin();
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, e) in profile.elements.iter().enumerate() {
        sum += Complex64::from_polar(e.magnitude, i as f64 * psi + e.phase);
    }
    sum / m as f64
}

/// Sample `|F|` over the request grid and compute its metrics.
pub fn array_factor(profile: &ReflectionProfile, req: &PatternRequest) -> Result<RadiationPattern> {
    if profile.is_empty() {
        return Err(Error::InvalidInput("reflection profile is empty"));
    }
    if !req.is_valid() {
        return Err(Error::InvalidInput("invalid pattern request"));
    }
    let step = req.phase_step();
    let magnitude = req
        .theta_grid
        .iter()
        .map(|&t| array_factor_at(profile, step, t).norm())
        .collect();
    pattern_from_samples(req.theta_grid.clone(), magnitude)
}

/// Wrap sampled magnitudes into a pattern, computing metrics.
pub fn pattern_from_samples(theta: Vec<f64>, magnitude: Vec<f64>) -> Result<RadiationPattern> {
    if theta.is_empty() || theta.len() != magnitude.len() {
        return Err(Error::InvalidInput("pattern samples must be non-empty and of equal length"));
    }
    let metrics = pattern_metrics(&theta, &magnitude);
    Ok(RadiationPattern {
        theta,
        magnitude,
        metrics,
    })
}

/// Peak with three-point refinement, broadside level, highest sidelobe and
/// half-power beamwidth.
pub fn pattern_metrics(theta: &[f64], magnitude: &[f64]) -> PatternMetrics {
    let n = magnitude.len();
    let mut ip = 0;
    for (i, &v) in magnitude.iter().enumerate() {
        if v > magnitude[ip] {
            ip = i;
        }
    }
    let (mut peak_angle, mut peak_value) = (theta[ip], magnitude[ip]);
    if ip > 0 && ip + 1 < n {
        let (delta, value) = parabolic_vertex(magnitude[ip - 1], magnitude[ip], magnitude[ip + 1]);
        let h = if delta < 0.0 {
            theta[ip] - theta[ip - 1]
        } else {
            theta[ip + 1] - theta[ip]
        };
        peak_angle = theta[ip] + delta * h;
        peak_value = value.max(magnitude[ip]);
    }

    let specular_value = theta.iter().position(|&t| t.abs() < 1e-12).map(|i| magnitude[i]);

    let half = magnitude[ip] / 2f64.sqrt();
    let mut lo = ip;
    while lo > 0 && magnitude[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = ip;
    while hi + 1 < n && magnitude[hi + 1] >= half {
        hi += 1;
    }
    let left = (lo > 0).then(|| crossing(theta[lo - 1], magnitude[lo - 1], theta[lo], magnitude[lo], half));
    let right = (hi + 1 < n).then(|| crossing(theta[hi], magnitude[hi], theta[hi + 1], magnitude[hi + 1], half));
    let half_power_beamwidth = match (left, right) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };

    let mut highest_sidelobe: Option<f64> = None;
    for i in (0..n).filter(|&i| i < lo || i > hi) {
        let left_ok = i == 0 || magnitude[i - 1] <= magnitude[i];
        let right_ok = i + 1 == n || magnitude[i + 1] <= magnitude[i];
        let interior = i > 0 && i + 1 < n;
        if left_ok && right_ok && interior {
            highest_sidelobe = Some(highest_sidelobe.map_or(magnitude[i], |s| s.max(magnitude[i])));
        }
    }

    PatternMetrics {
        peak_angle,
        peak_value,
        specular_value,
        highest_sidelobe,
        half_power_beamwidth,
    }
}

fn crossing(t0: f64, m0: f64, t1: f64, m1: f64, level: f64) -> f64 {
    if m1 == m0 {
        return t0;
    }
    t0 + (level - m0) * (t1 - t0) / (m1 - m0)
}

/// Linear progressive phase steering a beam to `theta_p`:
/// `alpha_m = alpha_0 - 2 pi m d sin(theta_p) / lambda`, principal values.
pub fn ideal_phase_gradient(theta_p: f64, spacing: f64, carrier_frequency: f64, count: usize, alpha_0: f64) -> Vec<f64> {
    let step = 2.0 * PI * spacing * theta_p.sin() * carrier_frequency / SPEED_OF_LIGHT;
    (0..count).map(|m| wrap_phase(alpha_0 - m as f64 * step)).collect()
}
