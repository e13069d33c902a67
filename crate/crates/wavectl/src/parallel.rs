//! Rayon-backed versions of the grid searches. Results are assembled in grid
//! order, so they match the sequential versions exactly.

use rayon::prelude::*;
use wavectl_core::steering::{solve_from_scores, Pipeline, ScanGrid, SearchSpec, SteeringSolution};
use wavectl_core::unitcell::ElementModel;
use wavectl_core::{steering, Error, Validate};

use crate::error::{CliError, Result};

pub const THREADS_ENV: &str = "WAVECTL_THREADS";

/// Run `f` on a pool capped by `WAVECTL_THREADS` when it is set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Parse(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn coarse_scores<E: ElementModel + Sync>(pipeline: &Pipeline<E>, spec: &SearchSpec) -> Result<Vec<f64>, Error> {
    let fs = spec.frequency.values();
    let ws = spec.amplitude.values();
    let nw = ws.len();
    (0..fs.len() * nw)
        .into_par_iter()
        .map(|i| pipeline.score(spec.objective, fs[i / nw], ws[i % nw], spec.dc_offset))
        .collect()
}

pub fn optimize_single_beam<E: ElementModel + Sync>(
    pipeline: &Pipeline<E>,
    spec: &SearchSpec,
) -> Result<SteeringSolution, Error> {
    if !spec.is_valid() {
        return Err(Error::InvalidInput("invalid search specification"));
    }
    let scores = coarse_scores(pipeline, spec)?;
    solve_from_scores(pipeline, spec, &scores)
}

pub fn specular_scan<E: ElementModel + Sync>(
    pipeline: &Pipeline<E>,
    spec: &SearchSpec,
    probes: &[f64],
) -> Result<ScanGrid, Error> {
    if !spec.is_valid() {
        return Err(Error::InvalidInput("invalid search specification"));
    }
    if probes.iter().any(|t| !(t.abs() <= std::f64::consts::FRAC_PI_2)) {
        return Err(Error::InvalidInput("probe angles must lie within +-90 degrees"));
    }
    let fs = spec.frequency.values();
    let ws = spec.amplitude.values();
    let nw = ws.len();
    let points = (0..fs.len() * nw)
        .into_par_iter()
        .map(|i| steering::scan_point(pipeline, fs[i / nw], ws[i % nw], spec.dc_offset, probes))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(ScanGrid::from_points(fs, ws, spec.dc_offset, probes.to_vec(), &points))
}
