//! CSV and JSON artifacts.
//!
//! Output numbers use nine significant digits in scientific notation so
//! that identical runs produce identical bytes. Impedance CSV files are a
//! data-exchange format and keep full round-trip precision.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;
use wavectl_core::btl::BiasPattern;
use wavectl_core::cascade::ComparisonRow;
use wavectl_core::consts::FREE_SPACE_IMPEDANCE;
use wavectl_core::radiation::RadiationPattern;
use wavectl_core::steering::ScanGrid;
use wavectl_core::unitcell::{ImpedancePoint, ImpedanceSamples};

use crate::error::{CliError, Result};

pub const BIAS_HEADER: [&str; 3] = ["m", "x_m_m", "w_volts"];
pub const PATTERN_HEADER: [&str; 3] = ["theta_deg", "magnitude_linear", "magnitude_db"];
pub const SCAN_HEADER: [&str; 4] = ["f_hz", "w_volts", "probe_deg", "magnitude"];
pub const IMPEDANCE_HEADER: [&str; 3] = ["f_hz", "re_z", "im_z"];
pub const COMPARISON_HEADER: [&str; 4] = ["m", "ideal_v", "cascade_v", "delta_v"];

/// Nine significant digits, scientific notation.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.8e}")
}

/// Round to nine significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    fmt_f(x).parse().unwrap_or(x)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// Write a header and rows of preformatted fields.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round9(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to nine significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Parse(e.to_string()))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn bias_rows(pattern: &BiasPattern) -> Vec<Vec<String>> {
    pattern
        .rows()
        .map(|(m, x, w)| vec![m.to_string(), fmt_f(x), fmt_f(w)])
        .collect()
}

pub fn pattern_rows(pattern: &RadiationPattern) -> Vec<Vec<String>> {
    pattern
        .rows()
        .map(|(t, lin, db)| vec![fmt_f(t), fmt_f(lin), fmt_f(db)])
        .collect()
}

pub fn scan_rows(grid: &ScanGrid) -> Vec<Vec<String>> {
    grid.rows()
        .map(|(f, w, p, m)| vec![fmt_f(f), fmt_f(w), fmt_f(p), fmt_f(m)])
        .collect()
}

pub fn comparison_rows(rows: &[ComparisonRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| vec![r.m.to_string(), fmt_f(r.ideal), fmt_f(r.cascade), fmt_f(r.delta)])
        .collect()
}

/// Pattern metrics sidecar, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub peak_angle_deg: f64,
    pub peak_value: f64,
    pub specular_value: Option<f64>,
    pub specular_on_grid: bool,
    pub highest_sidelobe: Option<f64>,
    pub half_power_beamwidth_deg: Option<f64>,
}

impl MetricsReport {
    pub fn new(p: &RadiationPattern) -> Self {
        let m = &p.metrics;
        MetricsReport {
            peak_angle_deg: m.peak_angle.to_degrees(),
            peak_value: m.peak_value,
            specular_value: m.specular_value,
            specular_on_grid: m.specular_value.is_some(),
            highest_sidelobe: m.highest_sidelobe,
            half_power_beamwidth_deg: m.half_power_beamwidth.map(f64::to_degrees),
        }
    }
}

/// Matrix form of a scan for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanMatrices<'a> {
    pub f_axis_hz: &'a [f64],
    pub w_axis_volts: &'a [f64],
    pub dc_offset: f64,
    pub probes_deg: Vec<f64>,
    /// `[probe][f][w]`.
    pub values: &'a [Vec<Vec<f64>>],
}

impl<'a> ScanMatrices<'a> {
    pub fn new(g: &'a ScanGrid) -> Self {
        ScanMatrices {
            f_axis_hz: &g.f_axis,
            w_axis_volts: &g.w_axis,
            dc_offset: g.dc_offset,
            probes_deg: g.probes.iter().map(|p| p.to_degrees()).collect(),
            values: &g.values,
        }
    }
}

/// Write `f_hz,re_z,im_z` with round-trip precision.
pub fn write_impedance_csv(path: &Path, samples: &ImpedanceSamples) -> Result<()> {
    let rows = samples.points.iter().map(|p| {
        vec![
            format!("{:e}", p.frequency),
            format!("{:e}", p.impedance.re),
            format!("{:e}", p.impedance.im),
        ]
    });
    write_csv(path, &IMPEDANCE_HEADER, rows)
}

/// Parse `f_hz,re_z,im_z` text.
pub fn parse_impedance_csv(text: &str) -> Result<ImpedanceSamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::Parse(format!("impedance csv: {e}")))?;
    if header.iter().collect::<Vec<_>>() != IMPEDANCE_HEADER {
        return Err(CliError::Parse(format!(
            "impedance csv line 1: expected header {}",
            IMPEDANCE_HEADER.join(",")
        )));
    }
    let mut points: Vec<ImpedancePoint> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Parse(format!("impedance csv line {line}: {e}")))?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Parse(format!("impedance csv line {line}: column {} is not a number", k + 1)))
        };
        let (f, re, im) = (num(0)?, num(1)?, num(2)?);
        if let Some(prev) = points.last() {
            if !(f > prev.frequency) {
                return Err(CliError::Parse(format!(
                    "impedance csv line {line}: frequencies must strictly increase"
                )));
            }
        }
        points.push(ImpedancePoint {
            frequency: f,
            impedance: Complex64::new(re, im),
        });
    }
    Ok(ImpedanceSamples {
        reference_impedance: FREE_SPACE_IMPEDANCE,
        points,
    })
}
