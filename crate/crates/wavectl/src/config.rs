//! Run configuration: one JSON document keyed by model type names, SI units
//! throughout.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavectl_core::btl::{slowness_factor, BtlDesign, Excitation, MicrostripSpec, Termination};
use wavectl_core::cascade::RectifierSpec;
use wavectl_core::unitcell::{CellCircuit, VaractorTable};
use wavectl_core::{Validate, Violation};

use crate::error::{CliError, Result};

/// The bundled reference design.
pub const REFERENCE_DESIGN: &str = include_str!("../data/reference-design.json");

/// Line description as written in a config; `slowness` is derived from the
/// microstrip when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub element_count: usize,
    pub spacing: f64,
    pub left_extension: f64,
    pub right_extension: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slowness: Option<f64>,
    pub characteristic_impedance: f64,
    pub termination: Termination,
    #[serde(default)]
    pub attenuation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct ConfigFile {
    pub BtlDesign: DesignSection,
    pub MicrostripSpec: MicrostripSpec,
    pub CellCircuit: CellCircuit,
    pub VaractorTable: VaractorTable,
    pub Excitation: Excitation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub RectifierSpec: Option<RectifierSpec>,
    #[serde(default = "default_carrier")]
    pub carrier_frequency: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_carrier() -> f64 {
    2.45e9
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub design: BtlDesign,
    pub microstrip: MicrostripSpec,
    pub cell: CellCircuit,
    pub varactors: VaractorTable,
    pub excitation: Excitation,
    pub rectifier: RectifierSpec,
    pub carrier_frequency: f64,
    pub output_dir: PathBuf,
}

/// Overrides applied from the command line before validation.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub termination: Option<Termination>,
    pub elements: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

/// Parse config text, reporting the JSON path of the first type error.
pub fn parse(text: &str) -> Result<ConfigFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse(format!("config {path}: {}", e.into_inner()))
    })
}

/// Read, parse, apply overrides and validate. Without a path the bundled
/// design is used. Returns the configuration and the bytes it was read from.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<(RunConfig, Vec<u8>)> {
    let bytes = match path {
        Some(p) => std::fs::read(p).map_err(|e| CliError::io(p, e))?,
        None => REFERENCE_DESIGN.as_bytes().to_vec(),
    };
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(format!("config is not UTF-8: {e}")))?;
    let file = parse(text)?;
    Ok((resolve(file, overrides)?, bytes))
}

/// Apply overrides, derive the slowness if needed and validate everything.
pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<RunConfig> {
    let mut out = Vec::new();
    let mut d = file.BtlDesign;
    if let Some(t) = overrides.termination {
        d.termination = t;
    }
    if let Some(m) = overrides.elements {
        d.element_count = m;
    }
    file.MicrostripSpec.validate_into("MicrostripSpec", &mut out);
    let slowness = match d.slowness {
        Some(s) => s,
        None if file.MicrostripSpec.is_valid() => slowness_factor(&file.MicrostripSpec, d.spacing).unwrap_or(f64::NAN),
        None => f64::NAN,
    };
    let design = BtlDesign {
        element_count: d.element_count,
        spacing: d.spacing,
        left_extension: d.left_extension,
        right_extension: d.right_extension,
        slowness,
        characteristic_impedance: d.characteristic_impedance,
        termination: d.termination,
        attenuation: d.attenuation,
    };
    design.validate_into("BtlDesign", &mut out);
    file.CellCircuit.validate_into("CellCircuit", &mut out);
    file.VaractorTable.validate_into("VaractorTable", &mut out);
    file.Excitation.validate_into("Excitation", &mut out);
    let rectifier = file.RectifierSpec.unwrap_or_default();
    rectifier.validate_into("RectifierSpec", &mut out);
    if !(file.carrier_frequency > 0.0) || !file.carrier_frequency.is_finite() {
        out.push(Violation {
            path: "carrier_frequency".into(),
            message: format!("must be finite and > 0 (got {})", file.carrier_frequency),
        });
    }
    if !out.is_empty() {
        return Err(CliError::Invalid(out));
    }
    Ok(RunConfig {
        design,
        microstrip: file.MicrostripSpec,
        cell: file.CellCircuit,
        varactors: file.VaractorTable,
        excitation: file.Excitation,
        rectifier,
        carrier_frequency: file.carrier_frequency,
        output_dir: overrides.output_dir.clone().unwrap_or(file.output_dir),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavectl_core::reference;

    #[test]
    fn bundled_design_matches_reference() {
        let (cfg, _) = load(None, &Overrides::default()).unwrap();
        assert_eq!(cfg.design, reference::btl_design());
        assert_eq!(cfg.microstrip, reference::microstrip());
        assert_eq!(cfg.cell, reference::cell_circuit());
        assert_eq!(cfg.varactors, reference::varactor_table());
        assert_eq!(cfg.carrier_frequency, reference::CARRIER_FREQUENCY);
    }

    #[test]
    fn overrides_apply_before_validation() {
        let o = Overrides {
            termination: Some(Termination::Open),
            elements: Some(0),
            output_dir: None,
        };
        match load(None, &o) {
            Err(CliError::Invalid(v)) => assert_eq!(v[0].path, "BtlDesign.element_count"),
            other => panic!("{other:?}"),
        }
    }
}
