//! Single-frequency reflective control: evaluate an operating point
//! `(f_b, W_b)` through the whole chain, search the parameter plane for a
//! steering or specular-null objective, and map the objective landscape.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::btl::{single_tone_bias, BiasPattern, BtlDesign};
use crate::consts::SPEED_OF_LIGHT;
use crate::math::{golden_section_max, stepped_axis};
use crate::radiation::{array_factor, array_factor_at, default_theta_grid, PatternRequest, RadiationPattern};
use crate::unitcell::{profile_from_bias, ElementModel, ReflectionProfile};
use crate::validate::{check_positive, push, Validate, Violation};
use crate::{Error, Result};

/// Biasing line, element model and carrier bundled for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline<E> {
    pub design: BtlDesign,
    pub model: E,
    /// Hz.
    pub carrier_frequency: f64,
}

impl<E: ElementModel> Pipeline<E> {
    pub fn new(design: BtlDesign, model: E, carrier_frequency: f64) -> Self {
        Pipeline {
            design,
            model,
            carrier_frequency,
        }
    }

    pub fn bias(&self, f_b: f64, w_b: f64, w0: f64) -> BiasPattern {
        single_tone_bias(&self.design, f_b, w_b, w0)
    }

    pub fn profile(&self, f_b: f64, w_b: f64, w0: f64) -> Result<ReflectionProfile> {
        profile_from_bias(&self.model, &self.bias(f_b, w_b, w0))
    }

    fn phase_step(&self) -> f64 {
        2.0 * PI * self.design.spacing * self.carrier_frequency / SPEED_OF_LIGHT
    }

    /// `|F(theta)|` at one operating point and angle.
    pub fn response_at(&self, f_b: f64, w_b: f64, w0: f64, theta: f64) -> Result<f64> {
        let profile = self.profile(f_b, w_b, w0)?;
        Ok(array_factor_at(&profile, self.phase_step(), theta).norm())
    }

    /// Full pattern of the operating point over `theta_grid` (radians).
    pub fn evaluate(&self, f_b: f64, w_b: f64, w0: f64, theta_grid: &[f64]) -> Result<RadiationPattern> {
        let profile = self.profile(f_b, w_b, w0)?;
        let req = PatternRequest {
            carrier_frequency: self.carrier_frequency,
            element_spacing: self.design.spacing,
            theta_grid: theta_grid.to_vec(),
        };
        array_factor(&profile, &req)
    }

    /// Value of `objective` at an operating point; larger is better.
    pub fn score(&self, objective: Objective, f_b: f64, w_b: f64, w0: f64) -> Result<f64> {
        let v = self.response_at(f_b, w_b, w0, objective.probe_angle())?;
        Ok(match objective {
            Objective::MaximizeAt(_) => v,
            Objective::MinimizeSpecular => -v,
        })
    }
}

/// What the search optimizes.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Objective {
    /// Maximize `|F(theta_p)|`, angle in radians.
    MaximizeAt(f64),
    /// Minimize `|F(0)|`.
    MinimizeSpecular,
}

impl Objective {
    pub fn probe_angle(&self) -> f64 {
        match *self {
            Objective::MaximizeAt(theta) => theta,
            Objective::MinimizeSpecular => 0.0,
        }
    }

    /// Convert a score back to the reported `|F|`.
    pub fn magnitude(&self, score: f64) -> f64 {
        match self {
            Objective::MaximizeAt(_) => score,
            Objective::MinimizeSpecular => -score,
        }
    }
}

/// Inclusive, uniformly stepped search axis.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Axis { start, stop, step }
    }

    pub fn values(&self) -> Vec<f64> {
        if !self.is_valid() {
            return Vec::new();
        }
        stepped_axis(self.start, self.stop, self.step)
    }
}

impl Validate for Axis {
    fn validate_into(&self, path: &str, out: &mut Vec<Violation>) {
        check_positive(out, path, "step", self.step);
        if !self.start.is_finite() || !self.stop.is_finite() || !(self.start <= self.stop) {
            push(out, path, "stop", "range must be finite and non-empty");
        }
    }
}

/// Search plane, fixed dc offset, refinement switch and objective.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchSpec {
    /// Biasing frequency axis, Hz.
    pub frequency: Axis,
    /// Standing-wave amplitude axis, V.
    pub amplitude: Axis,
    /// `W0`, V.
    pub dc_offset: f64,
    pub refine: bool,
    pub objective: Objective,
}

/// Refinement resolution on the frequency axis, Hz.
pub const FREQUENCY_RESOLUTION: f64 = 1e3;
/// Refinement resolution on the amplitude axis, V.
pub const AMPLITUDE_RESOLUTION: f64 = 0.01;
/// Coordinate sweeps performed by the refinement.
pub const REFINE_ROUNDS: usize = 2;

impl SearchSpec {
    /// 0.1..=30 MHz by 0.1 MHz, 0..=12 V by 0.1 V, `W0 = 4 V`, refined.
    pub fn new(objective: Objective) -> Self {
        SearchSpec {
            frequency: Axis::new(0.1e6, 30e6, 0.1e6),
            amplitude: Axis::new(0.0, 12.0, 0.1),
            dc_offset: 4.0,
            refine: true,
            objective,
        }
    }
}

impl Validate for SearchSpec {
    fn validate_into(&self, path: &str, out: &mut Vec<Violation>) {
        let sub = |field: &str| {
            if path.is_empty() {
                alloc::string::String::from(field)
            } else {
                alloc::format!("{path}.{field}")
            }
        };
        self.frequency.validate_into(&sub("frequency"), out);
        self.amplitude.validate_into(&sub("amplitude"), out);
        if self.frequency.is_valid() && !(self.frequency.start > 0.0) {
            push(out, &sub("frequency"), "start", "biasing frequency must be positive");
        }
        if !self.dc_offset.is_finite() {
            push(out, path, "dc_offset", "must be finite");
        }
        if let Objective::MaximizeAt(theta) = self.objective {
            if !(theta.abs() <= PI / 2.0) {
                push(out, path, "objective", "steering angle must lie within +-90 degrees");
            }
        }
    }
}

/// Best operating point found by a search.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteeringSolution {
    /// Hz.
    pub f_b: f64,
    /// V.
    pub w_b: f64,
    /// V.
    pub dc_offset: f64,
    pub objective: Objective,
    /// `|F|` at the probe angle.
    pub objective_value: f64,
    /// Best value on the coarse grid, before refinement.
    pub coarse_value: f64,
    pub achieved_pattern: RadiationPattern,
}

/// Objective scores over the search plane, frequency-major.
pub fn coarse_scores<E: ElementModel>(pipeline: &Pipeline<E>, spec: &SearchSpec) -> Result<Vec<f64>> {
    let fs = spec.frequency.values();
    let ws = spec.amplitude.values();
    let mut out = Vec::with_capacity(fs.len() * ws.len());
    for &f in &fs {
        for &w in &ws {
            out.push(pipeline.score(spec.objective, f, w, spec.dc_offset)?);
        }
    }
    Ok(out)
}

/// Index of the best score. Only strict improvements replace the incumbent,
/// so ties resolve to the lowest frequency, then the lowest amplitude.
pub fn best_index(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        if best.map_or(true, |b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Coordinate-wise golden-section polish of `(f_b, W_b)` within one grid step
/// of the starting point. Returns the improved point and score; the score is
/// never below `start_score`.
pub fn refine<E: ElementModel>(
    pipeline: &Pipeline<E>,
    spec: &SearchSpec,
    f_b: f64,
    w_b: f64,
    start_score: f64,
) -> (f64, f64, f64) {
    let obj = spec.objective;
    let w0 = spec.dc_offset;
    let eval = |f: f64, w: f64| pipeline.score(obj, f, w, w0).unwrap_or(f64::NEG_INFINITY);
    let f_lo = (f_b - spec.frequency.step).max(spec.frequency.start);
    let f_hi = (f_b + spec.frequency.step).min(spec.frequency.stop);
    let w_lo = (w_b - spec.amplitude.step).max(spec.amplitude.start);
    let w_hi = (w_b + spec.amplitude.step).min(spec.amplitude.stop);
    let (mut f, mut w, mut best) = (f_b, w_b, start_score);
    for _ in 0..REFINE_ROUNDS {
        let (x, v) = golden_section_max(|x| eval(x, w), f_lo, f_hi, FREQUENCY_RESOLUTION);
        if v > best {
            f = x;
            best = v;
        }
        let (x, v) = golden_section_max(|x| eval(f, x), w_lo, w_hi, AMPLITUDE_RESOLUTION);
        if v > best {
            w = x;
            best = v;
        }
    }
    (f, w, best)
}

/// Complete a search from precomputed coarse scores (frequency-major).
pub fn solve_from_scores<E: ElementModel>(
    pipeline: &Pipeline<E>,
    spec: &SearchSpec,
    scores: &[f64],
) -> Result<SteeringSolution> {
    let fs = spec.frequency.values();
    let ws = spec.amplitude.values();
    if fs.is_empty() || ws.is_empty() || scores.len() != fs.len() * ws.len() {
        return Err(Error::InvalidInput("empty search space"));
    }
    let idx = best_index(scores).ok_or(Error::Degenerate("objective undefined on the whole grid"))?;
    let (f0, w0v) = (fs[idx / ws.len()], ws[idx % ws.len()]);
    let coarse = scores[idx];
    let (f, w, s) = if spec.refine {
        refine(pipeline, spec, f0, w0v, coarse)
    } else {
        (f0, w0v, coarse)
    };
    let achieved_pattern = pipeline.evaluate(f, w, spec.dc_offset, &default_theta_grid())?;
    Ok(SteeringSolution {
        f_b: f,
        w_b: w,
        dc_offset: spec.dc_offset,
        objective: spec.objective,
        objective_value: spec.objective.magnitude(s),
        coarse_value: spec.objective.magnitude(coarse),
        achieved_pattern,
    })
}

/// Exhaustive grid search followed by optional refinement.
pub fn optimize_single_beam<E: ElementModel>(pipeline: &Pipeline<E>, spec: &SearchSpec) -> Result<SteeringSolution> {
    if !spec.is_valid() {
        return Err(Error::InvalidInput("invalid search specification"));
    }
    let scores = coarse_scores(pipeline, spec)?;
    solve_from_scores(pipeline, spec, &scores)
}

/// Biasing frequency whose half-wavelength spans the phase cycle needed to
/// steer toward `theta_p`: `f_c |sin theta_p| / (4 n_slow)`.
///
/// Broadside is degenerate; it returns `(0, true)`.
pub fn large_angle_frequency(theta_p: f64, carrier_frequency: f64, slowness: f64) -> (f64, bool) {
    if theta_p == 0.0 {
        return (0.0, true);
    }
    (carrier_frequency * theta_p.sin().abs() / (4.0 * slowness), false)
}

/// Phase excursion needed across the array for a linear gradient toward
/// `theta_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WrapBudget {
    /// rad.
    pub total_span: f64,
    /// Span below one full turn, so no phase wrapping is needed.
    pub within_budget: bool,
}

pub fn phase_wrap_budget(theta_p: f64, spacing: f64, carrier_frequency: f64, count: usize) -> WrapBudget {
    let lambda = SPEED_OF_LIGHT / carrier_frequency;
    let total_span = 2.0 * PI * count.saturating_sub(1) as f64 * spacing * theta_p.sin().abs() / lambda;
    WrapBudget {
        total_span,
        within_budget: total_span < 2.0 * PI,
    }
}

/// `|F(theta_probe)|` maps over the search plane.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScanGrid {
    /// Hz.
    pub f_axis: Vec<f64>,
    /// V.
    pub w_axis: Vec<f64>,
    /// V.
    pub dc_offset: f64,
    /// rad.
    pub probes: Vec<f64>,
    /// One matrix per probe, each `f_axis.len()` rows of `w_axis.len()`.
    pub values: Vec<Vec<Vec<f64>>>,
}

impl ScanGrid {
    /// Assemble from per-point probe vectors listed frequency-major.
    pub fn from_points(f_axis: Vec<f64>, w_axis: Vec<f64>, dc_offset: f64, probes: Vec<f64>, points: &[Vec<f64>]) -> Self {
        let nw = w_axis.len();
        let values = (0..probes.len())
            .map(|p| {
                (0..f_axis.len())
                    .map(|i| (0..nw).map(|j| points[i * nw + j][p]).collect())
                    .collect()
            })
            .collect();
        ScanGrid {
            f_axis,
            w_axis,
            dc_offset,
            probes,
            values,
        }
    }

    /// Long-form rows `(f_hz, w_volts, probe_deg, magnitude)`, probe-major,
    /// then frequency, then amplitude.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        self.probes.iter().enumerate().flat_map(move |(p, &probe)| {
            self.f_axis.iter().enumerate().flat_map(move |(i, &f)| {
                self.w_axis
                    .iter()
                    .enumerate()
                    .map(move |(j, &w)| (f, w, probe.to_degrees(), self.values[p][i][j]))
            })
        })
    }
}

/// `|F|` at every probe angle for one operating point.
pub fn scan_point<E: ElementModel>(pipeline: &Pipeline<E>, f_b: f64, w_b: f64, w0: f64, probes: &[f64]) -> Result<Vec<f64>> {
    let profile = pipeline.profile(f_b, w_b, w0)?;
    let step = pipeline.phase_step();
    Ok(probes.iter().map(|&t| array_factor_at(&profile, step, t).norm()).collect())
}

/// Dense `|F(theta_probe)|` maps over the search plane of `spec`.
pub fn specular_scan<E: ElementModel>(pipeline: &Pipeline<E>, spec: &SearchSpec, probes: &[f64]) -> Result<ScanGrid> {
    if !spec.is_valid() {
        return Err(Error::InvalidInput("invalid search specification"));
    }
    if probes.iter().any(|t| !(t.abs() <= PI / 2.0)) {
        return Err(Error::InvalidInput("probe angles must lie within +-90 degrees"));
    }
    let fs = spec.frequency.values();
    let ws = spec.amplitude.values();
    let mut points = Vec::with_capacity(fs.len() * ws.len());
    for &f in &fs {
        for &w in &ws {
            points.push(scan_point(pipeline, f, w, spec.dc_offset, probes)?);
        }
    }
    Ok(ScanGrid::from_points(fs, ws, spec.dc_offset, probes.to_vec(), &points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btl::{fundamental_frequency, Termination};
    use crate::reference;
    use crate::unitcell::{LinearPhaseElement, VaractorCell};

    fn varactor_pipeline(termination: Termination) -> Pipeline<VaractorCell> {
        Pipeline::new(
            reference::btl_design_with(27, termination),
            VaractorCell::new(reference::cell_circuit(), reference::varactor_table(), reference::CARRIER_FREQUENCY),
            reference::CARRIER_FREQUENCY,
        )
    }

    fn linear_pipeline(termination: Termination) -> Pipeline<LinearPhaseElement> {
        Pipeline::new(
            reference::btl_design_with(27, termination),
            LinearPhaseElement {
                bias_min: reference::BIAS_MIN,
                bias_max: reference::BIAS_MAX,
            },
            reference::CARRIER_FREQUENCY,
        )
    }

    #[test]
    fn zero_amplitude_is_broadside() {
        let p = varactor_pipeline(Termination::Short);
        for f in [1e6, 7e6, 23e6] {
            let pat = p.evaluate(f, 0.0, 4.0, &default_theta_grid()).unwrap();
            assert!(pat.metrics.peak_angle.abs() < 1e-9);
            assert!((pat.metrics.peak_value - pat.metrics.specular_value.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn broadside_target_picks_zero_amplitude() {
        let p = linear_pipeline(Termination::Short);
        let mut spec = SearchSpec::new(Objective::MaximizeAt(0.0));
        spec.frequency = Axis::new(1e6, 10e6, 1e6);
        spec.amplitude = Axis::new(0.0, 6.0, 0.5);
        let s = optimize_single_beam(&p, &spec).unwrap();
        assert_eq!(s.w_b, 0.0);
        assert_eq!(s.f_b, 1e6);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_never_loses() {
        let p = varactor_pipeline(Termination::Short);
        let mut spec = SearchSpec::new(Objective::MaximizeAt((-8f64).to_radians()));
        spec.frequency = Axis::new(4e6, 8e6, 0.5e6);
        spec.amplitude = Axis::new(0.0, 6.0, 0.5);
        let s = optimize_single_beam(&p, &spec).unwrap();
        assert!(s.objective_value >= s.coarse_value);
        assert!((s.f_b - 4e6) >= 0.0 && s.f_b <= 8e6);
    }

    #[test]
    fn search_is_deterministic() {
        let p = varactor_pipeline(Termination::Open);
        let mut spec = SearchSpec::new(Objective::MinimizeSpecular);
        spec.frequency = Axis::new(5e6, 9e6, 1e6);
        spec.amplitude = Axis::new(2.0, 6.0, 1.0);
        assert_eq!(optimize_single_beam(&p, &spec).unwrap(), optimize_single_beam(&p, &spec).unwrap());
    }

    #[test]
    fn ties_go_to_lowest_point() {
        assert_eq!(best_index(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(best_index(&[f64::NAN, 0.5]), Some(1));
        assert_eq!(best_index(&[]), None);
    }

    #[test]
    fn empty_space_is_rejected() {
        let p = linear_pipeline(Termination::Short);
        let mut spec = SearchSpec::new(Objective::MinimizeSpecular);
        spec.amplitude = Axis::new(3.0, 1.0, 0.1);
        assert!(optimize_single_beam(&p, &spec).is_err());
        assert_eq!(spec.validate("SearchSpec")[0].path, "SearchSpec.amplitude.stop");
    }

    #[test]
    fn large_angle_frequency_values() {
        let (f, flag) = large_angle_frequency(13.6f64.to_radians(), 2.45e9, 19.34);
        assert!(!flag);
        // 2.45e9 sin(13.6 deg) / 77.36
        assert!((f - 7.447_02e6).abs() < 50.0, "{f}");
        let (f, _) = large_angle_frequency(PI / 2.0, 2.45e9, 19.34);
        assert!((f - 2.45e9 / (4.0 * 19.34)).abs() < 1e-6);
        assert_eq!(large_angle_frequency(0.0, 2.45e9, 19.34), (0.0, true));
    }

    #[test]
    fn wrap_budget_values() {
        let b = phase_wrap_budget(12f64.to_radians(), 0.02, 2.45e9, 27);
        assert!((b.total_span.to_degrees() - 318.075_439_632).abs() < 1e-8, "{}", b.total_span.to_degrees());
        assert!(b.within_budget);
        let b = phase_wrap_budget(6f64.to_radians(), 0.02, 2.45e9, 60);
        assert!((b.total_span.to_degrees() - 362.881_188_393).abs() < 1e-8);
        assert!(!b.within_budget);
        assert_eq!(phase_wrap_budget(0.0, 0.02, 2.45e9, 27).total_span, 0.0);
    }

    #[test]
    fn scan_zero_amplitude_row_is_flat() {
        let p = varactor_pipeline(Termination::Short);
        let mut spec = SearchSpec::new(Objective::MinimizeSpecular);
        spec.frequency = Axis::new(1e6, 20e6, 1e6);
        spec.amplitude = Axis::new(0.0, 2.0, 1.0);
        let g = specular_scan(&p, &spec, &[0.0, 0.1]).unwrap();
        assert_eq!(g.values.len(), 2);
        assert_eq!(g.values[0].len(), 20);
        let first = g.values[0][0][0];
        assert!(g.values[0].iter().all(|row| row[0] == first));
        assert_eq!(g.rows().count(), 2 * 20 * 3);
    }

    #[test]
    fn linear_element_steers_with_gradient_frequency() {
        // Short line, low frequency: bias rises monotonically toward the generator.
        let p = linear_pipeline(Termination::Short);
        let f0 = fundamental_frequency(&p.design);
        let bias = p.bias(f0, 11.0, 4.0);
        assert!(bias.voltages.windows(2).all(|w| w[1] >= w[0]));
    }
}
