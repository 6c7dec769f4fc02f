//! The polytope division method driver.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::division::Division;
use crate::error::{Error, Result};
use crate::geometry::{CellId, ParamBox};
use crate::objectives::Objective;
use crate::trace::{RunOutcome, RunStatus, StepRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdmConfig {
    pub tol: f64,
    pub max_iters: usize,
    /// Defaults to the box center.
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    /// Re-evaluate `J` at every barycenter each step. When false, only new
    /// cells are evaluated and older values are reused as they are.
    #[serde(default = "default_true")]
    pub reevaluate_all: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PdmConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 1000,
            initial_point: None,
            seed: 0,
            reevaluate_all: true,
        }
    }
}

impl PdmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(Error::invalid(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Configuration, trace and final division of a PDM run.
#[derive(Debug)]
pub struct PdmRun {
    pub outcome: RunOutcome,
    pub division: Division,
}

/// Smallest id among the cells with the largest value.
pub fn select_max(div: &Division, values: &BTreeMap<CellId, f64>) -> Result<CellId> {
    let mut best: Option<(CellId, f64)> = None;
    for id in div.ids() {
        let v = *values
            .get(&id)
            .ok_or_else(|| Error::invalid(format!("no value for cell {id}")))?;
        if v.is_nan() {
            return Err(Error::Objective(format!("NaN value for cell {id}")));
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((id, v)),
        }
    }
    best.map(|(id, _)| id).ok_or(Error::EmptyDivision)
}

/// Runs the method on a fresh objective (`γ = ∅`).
///
/// Each step evaluates `J` at the barycenters, picks the cell with the
/// largest value and records it. If that value is at most `tol` the run
/// stops; otherwise the barycenter joins `γ` and the cell is facet-linked
/// at it. An objective failure ends the run with status `Failed` and the
/// partial trace.
pub fn pdm_run(objective: &mut Objective, root: &ParamBox, cfg: &PdmConfig) -> Result<PdmRun> {
    cfg.validate()?;
    if !objective.configuration().is_empty() {
        return Err(Error::invalid("objective must start from an empty configuration"));
    }
    let root = Arc::new(root.clone());
    let p = cfg.initial_point.clone().unwrap_or_else(|| root.center());
    let mut division = Division::new(Arc::clone(&root), &p)?;
    let mut trace = Vec::new();
    if let Err(e) = objective.notify_appended(&p) {
        return Ok(finish(objective, division, trace, RunStatus::Failed(e.to_string())));
    }
    let mut status = RunStatus::MaxIters;
    for step in 1..=cfg.max_iters {
        let t0 = Instant::now();
        let todo: Vec<CellId> = division
            .ids()
            .filter(|id| cfg.reevaluate_all || !division.values().contains_key(id))
            .collect();
        let points: Vec<Vec<f64>> = todo
            .iter()
            .map(|id| division.barycenter(*id).expect("barycenter").to_vec())
            .collect();
        let values = match objective.evaluate_many(&points) {
            Ok(v) => v,
            Err(e) => {
                status = RunStatus::Failed(e.to_string());
                break;
            }
        };
        for (id, v) in todo.iter().zip(values) {
            division.set_value(*id, v);
        }
        let selected = select_max(&division, division.values())?;
        let err = division.values()[&selected];
        let n_cells = division.len();
        let mut record = StepRecord {
            step,
            selected_cell: selected.0,
            err,
            n_cells,
            distinct_points: objective.distinct_points(),
            total_evals: objective.evaluations(),
            wall_ms: 0.0,
        };
        if err <= cfg.tol {
            record.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
            trace.push(record);
            status = RunStatus::Converged;
            break;
        }
        let b = division.barycenter(selected).expect("barycenter").to_vec();
        let appended = objective
            .notify_appended(&b)
            .and_then(|_| division.refine(selected).map(|_| ()));
        record.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        trace.push(record);
        if let Err(e) = appended {
            status = RunStatus::Failed(e.to_string());
            break;
        }
    }
    Ok(finish(objective, division, trace, status))
}

fn finish(
    objective: &Objective,
    division: Division,
    trace: Vec<StepRecord>,
    status: RunStatus,
) -> PdmRun {
    PdmRun {
        outcome: RunOutcome {
            gamma: objective.configuration().points().to_vec(),
            trace,
            status,
        },
        division,
    }
}
