//! Command-line definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavectl_core::btl::Termination;

use crate::commands::{
    self, CascadeArgs, Context, ElementChoice, Format, GridArgs, InputFormat, Operating,
};
use crate::config::{self, Overrides};
use crate::error::Result;
use crate::report::RunReport;

#[derive(Debug, Parser)]
#[command(name = "wavectl", version, about = "Standing-wave biased RIS simulation and steering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TerminationArg {
    Short,
    Open,
    Matched,
}

impl From<TerminationArg> for Termination {
    fn from(t: TerminationArg) -> Self {
        match t {
            TerminationArg::Short => Termination::Short,
            TerminationArg::Open => Termination::Open,
            TerminationArg::Matched => Termination::Matched,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum FormatArg {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Default)]
pub enum ElementArg {
    #[default]
    Varactor,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormatArg {
    Csv,
    Touchstone,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration JSON; the bundled reference design when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub termination: Option<TerminationArg>,
    /// Number of elements (rectifier taps).
    #[arg(long)]
    pub elements: Option<usize>,
    /// Output directory, overriding the configured one.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct OperatingArgs {
    /// Biasing frequency, Hz.
    #[arg(long)]
    pub fb: Option<f64>,
    /// Biasing frequency as a multiple of the line fundamental.
    #[arg(long, conflicts_with = "fb")]
    pub harmonic: Option<u32>,
    /// Standing-wave amplitude W_b, V; derived from the generator when omitted.
    #[arg(long)]
    pub wb: Option<f64>,
    /// dc offset W0, V.
    #[arg(long)]
    pub w0: Option<f64>,
    /// Rectifier diode drop, V.
    #[arg(long, default_value_t = 0.0)]
    pub diode_drop: f64,
}

#[derive(Debug, Args)]
pub struct GridFlags {
    /// Lowest biasing frequency, Hz.
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long)]
    pub f_step: Option<f64>,
    /// Lowest standing-wave amplitude, V.
    #[arg(long)]
    pub w_min: Option<f64>,
    #[arg(long)]
    pub w_max: Option<f64>,
    #[arg(long)]
    pub w_step: Option<f64>,
    /// Skip the golden-section polish of the best grid point.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rectified bias at every tap.
    Bias {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatingArgs,
    },
    /// Far-field pattern of an operating point.
    Pattern {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatingArgs,
        #[arg(long, value_enum, default_value_t)]
        element_model: ElementArg,
        /// Angular step of the pattern grid, degrees.
        #[arg(long)]
        theta_step: Option<f64>,
    },
    /// Search (f_b, W_b) for a beam at --theta, or for the lowest specular
    /// level when --theta is omitted.
    Steer {
        #[command(flatten)]
        common: Common,
        /// Steering angle, degrees.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        w0: Option<f64>,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, value_enum, default_value_t)]
        element_model: ElementArg,
    },
    /// |F| maps over the (f_b, W_b) plane at one or more probe angles.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Probe angle, degrees; repeatable. Broadside when omitted.
        #[arg(long = "probe", allow_hyphen_values = true)]
        probes: Vec<f64>,
        #[arg(long)]
        w0: Option<f64>,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, value_enum, default_value_t)]
        element_model: ElementArg,
    },
    /// Fit the unit-cell circuit to an impedance sweep.
    Fit {
        /// Impedance CSV (`f_hz,re_z,im_z`) or Touchstone `.s1p`.
        #[arg(long)]
        input: PathBuf,
        /// Substrate thickness D, m.
        #[arg(long, default_value_t = 1.27e-3)]
        thickness: f64,
        #[arg(long, value_enum)]
        input_format: Option<InputFormatArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loaded-line solve compared against the ideal bias pattern.
    Cascade {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        op: OperatingArgs,
        /// Resistive tap load, ohms; `inf` removes the loads.
        #[arg(long)]
        zrect: Option<f64>,
        /// Total line loss spread along the axis, dB.
        #[arg(long, default_value_t = 0.0)]
        loss_db: f64,
        /// Generator amplitude, V.
        #[arg(long)]
        vg: Option<f64>,
        /// Generator impedance, ohms.
        #[arg(long)]
        zg: Option<f64>,
        /// Treat the coupling capacitor as a short and the choke as open.
        #[arg(long)]
        ideal_components: bool,
    },
}

impl Common {
    fn context(&self) -> Result<Context> {
        let overrides = Overrides {
            termination: self.termination.map(Into::into),
            elements: self.elements,
            output_dir: self.out.clone(),
        };
        let (config, config_bytes) = config::load(self.config.as_deref(), &overrides)?;
        Ok(Context {
            config,
            config_bytes,
            format: match self.format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            },
        })
    }
}

impl From<&OperatingArgs> for Operating {
    fn from(a: &OperatingArgs) -> Self {
        Operating {
            fb: a.fb,
            harmonic: a.harmonic,
            wb: a.wb,
            w0: a.w0,
            diode_drop: a.diode_drop,
        }
    }
}

impl From<&GridFlags> for GridArgs {
    fn from(g: &GridFlags) -> Self {
        GridArgs {
            f_min: g.f_min,
            f_max: g.f_max,
            f_step: g.f_step,
            w_min: g.w_min,
            w_max: g.w_max,
            w_step: g.w_step,
            no_refine: g.no_refine,
        }
    }
}

fn element(e: ElementArg) -> ElementChoice {
    match e {
        ElementArg::Varactor => ElementChoice::Varactor,
        ElementArg::Linear => ElementChoice::Linear,
    }
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> Result<RunReport> {
    match &cli.command {
        Command::Bias { common, op } => commands::cmd_bias(&common.context()?, &op.into()),
        Command::Pattern {
            common,
            op,
            element_model,
            theta_step,
        } => commands::cmd_pattern(&common.context()?, &op.into(), element(*element_model), *theta_step),
        Command::Steer {
            common,
            theta,
            w0,
            grid,
            element_model,
        } => commands::cmd_steer(&common.context()?, *theta, *w0, &grid.into(), element(*element_model)),
        Command::Scan {
            common,
            probes,
            w0,
            grid,
            element_model,
        } => commands::cmd_scan(&common.context()?, probes, *w0, &grid.into(), element(*element_model)),
        Command::Fit {
            input,
            thickness,
            input_format,
            out,
        } => commands::cmd_fit(
            input,
            *thickness,
            input_format.map(|f| match f {
                InputFormatArg::Csv => InputFormat::Csv,
                InputFormatArg::Touchstone => InputFormat::Touchstone,
            }),
            out.as_deref().unwrap_or(&commands::default_out_dir()),
        ),
        Command::Cascade {
            common,
            op,
            zrect,
            loss_db,
            vg,
            zg,
            ideal_components,
        } => commands::cmd_cascade(
            &common.context()?,
            &op.into(),
            &CascadeArgs {
                zrect: *zrect,
                loss_db: *loss_db,
                vg: *vg,
                zg: *zg,
                ideal_components: *ideal_components,
            },
        ),
    }
}
