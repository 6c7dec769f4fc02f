//! Step records shared by the PDM and GSM drivers, and their CSV form.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// One greedy step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Cell id for PDM, sample index for GSM.
    pub selected_cell: u64,
    pub err: f64,
    /// Division size (PDM) or sample set size (GSM) at selection time.
    pub n_cells: usize,
    pub distinct_points: usize,
    pub total_evals: u64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// The selected error dropped to the tolerance.
    Converged,
    MaxIters,
    /// Every sample of a GSM set is already in the configuration.
    Exhausted,
    Failed(String),
}

impl RunStatus {
    pub fn as_str(&self) -> &str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Exhausted => "exhausted",
            RunStatus::Failed(_) => "failed",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Failed(msg) => write!(f, "failed: {msg}"),
            other => f.write_str(other.as_str()),
        }
    }
}

/// Result of a greedy run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub gamma: Vec<Vec<f64>>,
    pub trace: Vec<StepRecord>,
    pub status: RunStatus,
}

pub const TRACE_SCHEMA: &str = "pdm-trace/v1";
pub const TRACE_COLUMNS: &str = "step,selected_cell,err,n_cells,distinct_points,total_evals,wall_ms";

/// Writes the trace as CSV: a `#` comment line with schema, seed and the
/// optional single-line `config`, the header, one row per step. With
/// `timing == false` the `wall_ms` column is written as `0` so that
/// identical runs produce identical bytes.
pub fn write_trace_csv<W: Write>(
    mut out: W,
    trace: &[StepRecord],
    seed: u64,
    config: Option<&str>,
    timing: bool,
) -> io::Result<()> {
    match config {
        Some(c) => writeln!(out, "# schema={TRACE_SCHEMA} seed={seed} config={c}")?,
        None => writeln!(out, "# schema={TRACE_SCHEMA} seed={seed}")?,
    }
    writeln!(out, "{TRACE_COLUMNS}")?;
    for r in trace {
        let ms = if timing { r.wall_ms } else { 0.0 };
        writeln!(
            out,
            "{},{},{:e},{},{},{},{:.3}",
            r.step, r.selected_cell, r.err, r.n_cells, r.distinct_points, r.total_evals, ms
        )?;
    }
    Ok(())
}
