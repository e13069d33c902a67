//! Command implementations. Each validates its inputs, runs the models and
//! writes its artifacts plus `report.json` into the output directory.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use wavectl_core::btl::{
    fundamental_frequency, rectified_bias_with, single_tone_bias, standing_wave_amplitude, BiasPattern, Excitation,
    Rectifier,
};
use wavectl_core::cascade::{build_network, compare, rectified_from_phasors, solve_taps, Components, RectifierSpec, TapLoad};
use wavectl_core::radiation::{array_factor, default_theta_grid, theta_grid_deg, PatternRequest};
use wavectl_core::steering::{Axis, Objective, Pipeline, SearchSpec};
use wavectl_core::unitcell::{
    fit_circuit_model, profile_from_bias, BiasedResponse, ElementModel, LinearPhaseElement, VaractorCell,
};
use wavectl_core::{Error, Validate};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{self, MetricsReport, ScanMatrices};
use crate::parallel;
use crate::report::{Recorder, RunReport};
use crate::touchstone;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Loaded configuration and the bytes it was read from.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub config_bytes: Vec<u8>,
    pub format: Format,
}

impl Context {
    fn recorder(&self, command: &str) -> Result<Recorder> {
        Recorder::new(command, &self.config_bytes, &self.config.output_dir)
    }
}

/// Operating point of the biasing signal.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Operating {
    /// Biasing frequency, Hz.
    pub fb: Option<f64>,
    /// Multiple of the line's fundamental, used when `fb` is absent.
    pub harmonic: Option<u32>,
    /// Standing-wave amplitude, V; derived from the generator when absent.
    pub wb: Option<f64>,
    /// dc offset, V; the configured offset when absent.
    pub w0: Option<f64>,
    pub diode_drop: f64,
}

fn positive(what: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            min: 0.0,
            max: f64::INFINITY,
        }
        .into())
    }
}

fn non_negative(what: &'static str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            min: 0.0,
            max: f64::INFINITY,
        }
        .into())
    }
}

impl Operating {
    fn frequency(&self, cfg: &RunConfig) -> Result<Option<f64>> {
        match (self.fb, self.harmonic) {
            (Some(f), _) => positive("biasing frequency", f).map(Some),
            (None, Some(0)) => Err(Error::InvalidInput("harmonic must be >= 1").into()),
            (None, Some(n)) => Ok(Some(n as f64 * fundamental_frequency(&cfg.design))),
            (None, None) => Ok(None),
        }
    }

    fn dc_offset(&self, cfg: &RunConfig) -> Result<f64> {
        non_negative("dc offset", self.w0.unwrap_or(cfg.excitation.dc_offset))
    }

    /// Single tone when a frequency is given, otherwise the configured
    /// multi-tone excitation.
    pub fn bias(&self, cfg: &RunConfig) -> Result<BiasPattern> {
        let w0 = self.dc_offset(cfg)?;
        let drop = non_negative("diode drop", self.diode_drop)?;
        let rect = Rectifier { diode_drop: drop };
        match self.frequency(cfg)? {
            Some(f) => {
                let wb = match self.wb {
                    Some(w) => non_negative("standing-wave amplitude", w)?,
                    None => standing_wave_amplitude(&cfg.design, &cfg.excitation, f)?,
                };
                let mut p = single_tone_bias(&cfg.design, f, wb, w0);
                for v in &mut p.voltages {
                    *v = rect.output(w0, *v - w0);
                }
                Ok(p)
            }
            None => {
                let mut exc = cfg.excitation.clone();
                exc.dc_offset = w0;
                Ok(rectified_bias_with(&cfg.design, &exc, rect))
            }
        }
    }
}

/// Element model selected on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyElement {
    Varactor(VaractorCell),
    Linear(LinearPhaseElement),
}

impl ElementModel for AnyElement {
    fn respond(&self, bias: f64) -> wavectl_core::Result<BiasedResponse> {
        match self {
            AnyElement::Varactor(e) => e.respond(bias),
            AnyElement::Linear(e) => e.respond(bias),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElementChoice {
    #[default]
    Varactor,
    Linear,
}

impl ElementChoice {
    pub fn build(self, cfg: &RunConfig) -> AnyElement {
        match self {
            ElementChoice::Varactor => AnyElement::Varactor(VaractorCell::new(
                cfg.cell,
                cfg.varactors.clone(),
                cfg.carrier_frequency,
            )),
            ElementChoice::Linear => {
                let (lo, hi) = cfg.varactors.bias_range();
                AnyElement::Linear(LinearPhaseElement {
                    bias_min: lo,
                    bias_max: hi,
                })
            }
        }
    }
}

fn pipeline(cfg: &RunConfig, element: ElementChoice) -> Pipeline<AnyElement> {
    Pipeline::new(cfg.design.clone(), element.build(cfg), cfg.carrier_frequency)
}

pub fn cmd_bias(ctx: &Context, op: &Operating) -> Result<RunReport> {
    let mut rec = ctx.recorder("bias")?;
    let pattern = op.bias(&ctx.config)?;
    match ctx.format {
        Format::Csv => io::write_csv(&rec.output("bias.csv"), &io::BIAS_HEADER, io::bias_rows(&pattern))?,
        Format::Json => io::write_json(&rec.output("bias.json"), &pattern)?,
    }
    rec.finish()
}

#[derive(Serialize)]
struct PatternJson<'a> {
    theta_deg: Vec<f64>,
    magnitude_linear: &'a [f64],
    magnitude_db: Vec<f64>,
    metrics: MetricsReport,
}

pub fn cmd_pattern(ctx: &Context, op: &Operating, element: ElementChoice, theta_step_deg: Option<f64>) -> Result<RunReport> {
    let cfg = &ctx.config;
    let mut rec = ctx.recorder("pattern")?;
    let bias = op.bias(cfg)?;
    let profile = profile_from_bias(&element.build(cfg), &bias)?;
    for &m in &profile.clamped {
        rec.warn(format!(
            "element {m}: bias {:.4} V outside the varactor table, clamped",
            bias.voltages[m]
        ));
    }
    let grid = match theta_step_deg {
        Some(step) => theta_grid_deg(-90.0, 90.0, positive("theta step", step)?),
        None => default_theta_grid(),
    };
    let req = PatternRequest {
        carrier_frequency: cfg.carrier_frequency,
        element_spacing: cfg.design.spacing,
        theta_grid: grid,
    };
    let pattern = array_factor(&profile, &req)?;
    match ctx.format {
        Format::Csv => {
            io::write_csv(&rec.output("pattern.csv"), &io::PATTERN_HEADER, io::pattern_rows(&pattern))?;
            io::write_json(&rec.output("pattern_metrics.json"), &MetricsReport::new(&pattern))?;
        }
        Format::Json => {
            let body = PatternJson {
                theta_deg: pattern.theta.iter().map(|t| t.to_degrees()).collect(),
                magnitude_linear: &pattern.magnitude,
                magnitude_db: pattern.magnitude_db().collect(),
                metrics: MetricsReport::new(&pattern),
            };
            io::write_json(&rec.output("pattern.json"), &body)?;
        }
    }
    rec.finish()
}

/// Search-plane flags; unset fields keep the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridArgs {
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub f_step: Option<f64>,
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
    pub w_step: Option<f64>,
    pub no_refine: bool,
}

impl GridArgs {
    pub fn spec(&self, objective: Objective, w0: f64) -> Result<SearchSpec> {
        let mut s = SearchSpec::new(objective);
        let f = s.frequency;
        s.frequency = Axis::new(
            self.f_min.unwrap_or(f.start),
            self.f_max.unwrap_or(f.stop),
            self.f_step.unwrap_or(f.step),
        );
        let w = s.amplitude;
        s.amplitude = Axis::new(
            self.w_min.unwrap_or(w.start),
            self.w_max.unwrap_or(w.stop),
            self.w_step.unwrap_or(w.step),
        );
        s.dc_offset = w0;
        s.refine = !self.no_refine;
        let v = s.validate("search");
        if !v.is_empty() {
            return Err(CliError::Invalid(v));
        }
        Ok(s)
    }
}

#[derive(Serialize)]
struct SteerJson {
    f_b_hz: f64,
    w_b_volts: f64,
    dc_offset_volts: f64,
    objective: &'static str,
    theta_p_deg: Option<f64>,
    objective_value: f64,
    coarse_value: f64,
    metrics: MetricsReport,
}

/// `theta_deg = None` minimizes the specular level.
pub fn cmd_steer(
    ctx: &Context,
    theta_deg: Option<f64>,
    w0: Option<f64>,
    grid: &GridArgs,
    element: ElementChoice,
) -> Result<RunReport> {
    let cfg = &ctx.config;
    let mut rec = ctx.recorder("steer")?;
    let objective = match theta_deg {
        Some(t) => Objective::MaximizeAt(t.to_radians()),
        None => Objective::MinimizeSpecular,
    };
    let spec = grid.spec(objective, w0.unwrap_or(cfg.excitation.dc_offset))?;
    let p = pipeline(cfg, element);
    let sol = parallel::with_pool(|| parallel::optimize_single_beam(&p, &spec))??;
    let body = SteerJson {
        f_b_hz: sol.f_b,
        w_b_volts: sol.w_b,
        dc_offset_volts: sol.dc_offset,
        objective: match objective {
            Objective::MaximizeAt(_) => "maximize_at",
            Objective::MinimizeSpecular => "minimize_specular",
        },
        theta_p_deg: theta_deg,
        objective_value: sol.objective_value,
        coarse_value: sol.coarse_value,
        metrics: MetricsReport::new(&sol.achieved_pattern),
    };
    io::write_json(&rec.output("steer.json"), &body)?;
    if ctx.format == Format::Csv {
        io::write_csv(
            &rec.output("steer_pattern.csv"),
            &io::PATTERN_HEADER,
            io::pattern_rows(&sol.achieved_pattern),
        )?;
    }
    rec.finish()
}

pub fn cmd_scan(
    ctx: &Context,
    probes_deg: &[f64],
    w0: Option<f64>,
    grid: &GridArgs,
    element: ElementChoice,
) -> Result<RunReport> {
    let cfg = &ctx.config;
    let mut rec = ctx.recorder("scan")?;
    let probes: Vec<f64> = if probes_deg.is_empty() {
        vec![0.0]
    } else {
        probes_deg.iter().map(|d| d.to_radians()).collect()
    };
    let spec = grid.spec(Objective::MinimizeSpecular, w0.unwrap_or(cfg.excitation.dc_offset))?;
    let p = pipeline(cfg, element);
    let scan = parallel::with_pool(|| parallel::specular_scan(&p, &spec, &probes))??;
    match ctx.format {
        Format::Csv => io::write_csv(&rec.output("scan.csv"), &io::SCAN_HEADER, io::scan_rows(&scan))?,
        Format::Json => io::write_json(&rec.output("scan.json"), &ScanMatrices::new(&scan))?,
    }
    rec.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Touchstone,
}

impl InputFormat {
    /// `.s1p` files are Touchstone, anything else CSV.
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("s1p") => InputFormat::Touchstone,
            _ => InputFormat::Csv,
        }
    }
}

pub fn cmd_fit(input: &Path, thickness: f64, format: Option<InputFormat>, out_dir: &Path) -> Result<RunReport> {
    let bytes = std::fs::read(input).map_err(|e| CliError::io(input, e))?;
    let mut rec = Recorder::new("fit", &bytes, out_dir)?;
    let text = String::from_utf8_lossy(&bytes);
    let samples = match format.unwrap_or_else(|| InputFormat::detect(input)) {
        InputFormat::Csv => io::parse_impedance_csv(&text)?,
        InputFormat::Touchstone => touchstone::parse_s1p(&text).map_err(|e| CliError::Parse(e.to_string()))?,
    };
    let cell = fit_circuit_model(&samples, thickness)?;
    io::write_json(&rec.output("cell.json"), &cell)?;
    rec.finish()
}

/// Cascade flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeArgs {
    /// Tap load, ohms (resistive); infinite removes the loads. The
    /// configured rectifier load when absent.
    pub zrect: Option<f64>,
    pub loss_db: f64,
    pub vg: Option<f64>,
    pub zg: Option<f64>,
    pub ideal_components: bool,
}

impl Default for CascadeArgs {
    fn default() -> Self {
        CascadeArgs {
            zrect: None,
            loss_db: 0.0,
            vg: None,
            zg: None,
            ideal_components: false,
        }
    }
}

pub fn cmd_cascade(ctx: &Context, op: &Operating, args: &CascadeArgs) -> Result<RunReport> {
    let cfg = &ctx.config;
    let mut rec = ctx.recorder("cascade")?;
    let f = op
        .frequency(cfg)?
        .ok_or(Error::InvalidInput("cascade needs --fb or --harmonic"))?;
    let vg = args.vg.unwrap_or(cfg.excitation.generator_voltage);
    let zg = positive("generator impedance", args.zg.unwrap_or(cfg.excitation.generator_impedance))?;
    let mut comps = if args.ideal_components {
        Components::ideal(vg, zg)
    } else {
        Components::new(vg, zg)
    };
    comps.total_loss_db = non_negative("loss", args.loss_db)?;
    let rectifier = match args.zrect {
        Some(z) if z.is_infinite() && z > 0.0 => RectifierSpec {
            tap_load: TapLoad::Unloaded,
            ..cfg.rectifier.clone()
        },
        Some(z) => RectifierSpec {
            tap_load: TapLoad::resistive(positive("tap load", z)?),
            ..cfg.rectifier.clone()
        },
        None => cfg.rectifier.clone(),
    };
    let w0 = op.dc_offset(cfg)?;
    let drop = non_negative("diode drop", op.diode_drop)?;
    let net = build_network(&cfg.design, &cfg.microstrip, &rectifier, &comps, f)?;
    let nodes = solve_taps(&net)?;
    let loaded = rectified_from_phasors(&nodes, w0, drop);
    let exc = Excitation::single_tone(w0, f, 1.0).with_generator(vg, zg);
    let wb = standing_wave_amplitude(&cfg.design, &exc, f)?;
    let ideal = rectified_bias_with(
        &cfg.design,
        &Excitation::single_tone(w0, f, wb),
        Rectifier { diode_drop: drop },
    );
    let rows = compare(&ideal, &loaded);
    match ctx.format {
        Format::Csv => io::write_csv(&rec.output("cascade.csv"), &io::COMPARISON_HEADER, io::comparison_rows(&rows))?,
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                frequency_hz: f64,
                input_phasor: Complex64,
                rows: &'a [wavectl_core::cascade::ComparisonRow],
            }
            io::write_json(
                &rec.output("cascade.json"),
                &Body {
                    frequency_hz: f,
                    input_phasor: nodes.input,
                    rows: &rows,
                },
            )?;
        }
    }
    rec.finish()
}

/// Default output directory for config-less commands.
pub fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
