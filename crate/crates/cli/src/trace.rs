//! Per-iteration trace CSV.

use std::path::Path;

use smoothprox_core::RunTrace;

use crate::CliError;

pub const TRACE_COLUMNS: [&str; 6] = [
    "iter",
    "objective",
    "best_objective",
    "rel_step",
    "elapsed_s",
    "rank_estimate",
];

/// Writes the header and one row per record. Floats use shortest
/// round-trip formatting; `rank_estimate` is empty when the run has no
/// spectral term.
pub fn write_trace(path: &Path, trace: &RunTrace) -> Result<(), CliError> {
    let to_err = |e: csv::Error| CliError::parse(path, None, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(TRACE_COLUMNS).map_err(to_err)?;
    for r in &trace.records {
        w.write_record([
            r.iter.to_string(),
            format!("{:e}", r.objective),
            format!("{:e}", r.best_objective),
            format!("{:e}", r.rel_step),
            format!("{:.6}", r.elapsed_s),
            r.rank_estimate.map(|k| k.to_string()).unwrap_or_default(),
        ])
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
