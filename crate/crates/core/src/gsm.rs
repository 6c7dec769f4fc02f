//! Greedy sampling over a fixed random or Latin hypercube sample set.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ParamBox;
use crate::numerics::{lhs_sample, uniform_sample, Rng};
use crate::objectives::Objective;
use crate::trace::{RunOutcome, RunStatus, StepRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Random,
    Lhs,
}

impl Sampler {
    pub fn as_str(self) -> &'static str {
        match self {
            Sampler::Random => "random",
            Sampler::Lhs => "lhs",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmConfig {
    pub sampler: Sampler,
    pub sample_size: usize,
    pub tol: f64,
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GsmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(Error::invalid("sample_size must be at least 1"));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(Error::invalid(format!("tol must be finite and >= 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// The sample set `S` of a run, drawn from the `"gsm-samples"` stream of
/// the configured seed.
pub fn draw_samples(root: &ParamBox, cfg: &GsmConfig) -> Vec<Vec<f64>> {
    let mut rng = Rng::new(cfg.seed).split("gsm-samples");
    match cfg.sampler {
        Sampler::Random => uniform_sample(&mut rng, cfg.sample_size, root),
        Sampler::Lhs => lhs_sample(&mut rng, cfg.sample_size, root),
    }
}

pub fn gsm_run(objective: &mut Objective, root: &ParamBox, cfg: &GsmConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let samples = draw_samples(root, cfg);
    gsm_run_on(objective, &samples, cfg)
}

/// Greedy loop over a given sample set, continuing from whatever `γ` the
/// objective already holds.
///
/// Each step evaluates `J` on all of `S` and selects the largest value
/// among samples not yet in `γ` (smallest index on ties). The run stops
/// when that value is at most `tol`, when `S ⊂ γ`, or after `max_iters`
/// steps.
pub fn gsm_run_on(
    objective: &mut Objective,
    samples: &[Vec<f64>],
    cfg: &GsmConfig,
) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut status = RunStatus::MaxIters;
    for step in 1..=cfg.max_iters {
        let t0 = Instant::now();
        let open: Vec<usize> = (0..samples.len())
            .filter(|&i| !objective.configuration().contains(&samples[i]))
            .collect();
        if open.is_empty() {
            status = RunStatus::Exhausted;
            break;
        }
        let values = match objective.evaluate_many(samples) {
            Ok(v) => v,
            Err(e) => {
                status = RunStatus::Failed(e.to_string());
                break;
            }
        };
        let mut best = open[0];
        for &i in &open[1..] {
            if values[i] > values[best] {
                best = i;
            }
        }
        let err = values[best];
        let mut record = StepRecord {
            step,
            selected_cell: best as u64,
            err,
            n_cells: samples.len(),
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
        let appended = objective.notify_appended(&samples[best]);
        record.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        trace.push(record);
        if let Err(e) = appended {
            status = RunStatus::Failed(e.to_string());
            break;
        }
    }
    Ok(RunOutcome {
        gamma: objective.configuration().points().to_vec(),
        trace,
        status,
    })
}
