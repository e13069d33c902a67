//! The reference 27-element design: RO3010 meander biasing line, varactor
//! tuned dual-patch cell on RT5880LZ, and a 2.45 GHz carrier.

use alloc::vec::Vec;

use crate::btl::{slowness_factor, BtlDesign, MicrostripSpec, Termination};
use crate::unitcell::{CellCircuit, VaractorRow, VaractorTable};

pub const CARRIER_FREQUENCY: f64 = 2.45e9;
pub const DC_OFFSET: f64 = 4.0;
pub const GENERATOR_VOLTAGE: f64 = 10.0;
pub const GENERATOR_IMPEDANCE: f64 = 50.0;
pub const LINE_IMPEDANCE: f64 = 19.23;
/// Unit-cell substrate thickness, m.
pub const CELL_SUBSTRATE_THICKNESS: f64 = 1.27e-3;
pub const RECTIFIER_RESISTANCE: f64 = 10e3;
pub const RECTIFIER_CAPACITANCE: f64 = 200e-12;
pub const COUPLING_CAPACITANCE: f64 = 1e-6;
pub const DECOUPLING_INDUCTANCE: f64 = 680e-6;
/// Varactor bias window, V.
pub const BIAS_MIN: f64 = 4.0;
pub const BIAS_MAX: f64 = 15.0;

pub fn microstrip() -> MicrostripSpec {
    MicrostripSpec {
        relative_permittivity: 11.2,
        substrate_thickness: 0.64e-3,
        trace_width: 2.6e-3,
        path_length_per_cell: 131.42e-3,
    }
}

/// Reference line with `n_slow` derived from [`microstrip`].
pub fn btl_design() -> BtlDesign {
    btl_design_with(27, Termination::Short)
}

pub fn btl_design_with(element_count: usize, termination: Termination) -> BtlDesign {
    let spacing = 0.02;
    BtlDesign {
        element_count,
        spacing,
        left_extension: 0.5 * spacing,
        right_extension: 0.5 * spacing,
        slowness: slowness_factor(&microstrip(), spacing).expect("positive spacing"),
        characteristic_impedance: LINE_IMPEDANCE,
        termination,
        attenuation: 0.0,
    }
}

pub fn cell_circuit() -> CellCircuit {
    CellCircuit {
        patch_resistance: 0.17,
        patch_capacitance: 0.74e-12,
        patch_inductance: 1.64e-9,
        substrate_inductance: 1.60e-9,
    }
}

/// SMV1231 varactor: `(V, C_v [F], R_v [ohm])` with 2.34 nH series
/// inductance.
pub fn varactor_table() -> VaractorTable {
    const ROWS: [(f64, f64, f64); 12] = [
        (4.0, 0.802e-12, 0.509),
        (5.0, 0.697e-12, 0.340),
        (6.0, 0.626e-12, 0.221),
        (7.0, 0.578e-12, 0.142),
        (8.0, 0.544e-12, 0.091),
        (9.0, 0.519e-12, 0.058),
        (10.0, 0.501e-12, 0.037),
        (11.0, 0.488e-12, 0.024),
        (12.0, 0.478e-12, 0.016),
        (13.0, 0.471e-12, 0.011),
        (14.0, 0.465e-12, 0.007),
        (15.0, 0.460e-12, 0.005),
    ];
    VaractorTable {
        series_inductance: 2.34e-9,
        rows: ROWS
            .iter()
            .map(|&(v, c, r)| VaractorRow {
                bias_voltage: v,
                capacitance: c,
                resistance: r,
            })
            .collect::<Vec<_>>(),
    }
}
