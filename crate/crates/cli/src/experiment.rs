//! Builds objectives from a resolved config and runs PDM or GSM on them,
//! including the two-phase EIM → RB workflow for the Gaussian source.

use std::sync::Arc;

use pdm_core::eim::{EimBasis, GaussianSourceFamily, ParamFunctionFamily};
use pdm_core::gsm::{gsm_run, GsmConfig};
use pdm_core::numerics::uniform_sample;
use pdm_core::objectives::{verification_curve, Objective, VerifyPoint};
use pdm_core::pdm::{pdm_run, PdmConfig};
use pdm_core::rbm::{
    CachedProvider, EimAffinePoisson, GaussianPoissonModel, SnapshotProvider, ThermalBlockModel,
};
use pdm_core::{Division, ParamBox, Rng, RunOutcome};

use crate::config::{ExperimentConfig, Method, ObjectiveId};
use crate::error::CliResult;

/// One greedy run and what it leaves behind.
pub struct RunArtifacts {
    pub method: Method,
    pub outcome: RunOutcome,
    /// PDM only.
    pub division: Option<Division>,
    pub final_n_basis: usize,
    pub distinct_points: usize,
    pub total_evals: u64,
    pub objective: Objective,
    /// Snapshot source of RB objectives.
    pub provider: Option<Arc<dyn SnapshotProvider>>,
}

/// Both phases of an `rb-gaussian` run with `eim_tol`.
pub struct Experiment {
    pub main: RunArtifacts,
    pub eim: Option<(RunArtifacts, EimBasis)>,
}

pub fn pdm_config(cfg: &ExperimentConfig, tol: f64) -> PdmConfig {
    PdmConfig {
        tol,
        max_iters: cfg.max_iters,
        initial_point: cfg.pdm.initial_point.clone(),
        seed: cfg.seed,
        reevaluate_all: cfg.pdm.reevaluate_all,
    }
}

pub fn gsm_config(cfg: &ExperimentConfig, tol: f64) -> GsmConfig {
    GsmConfig {
        sampler: cfg.gsm.sampler,
        sample_size: cfg.sample_size(),
        tol,
        max_iters: cfg.max_iters,
        seed: cfg.seed,
    }
}

/// Runs `method` on `objective` until `tol`.
pub fn drive(
    method: Method,
    mut objective: Objective,
    root: &ParamBox,
    cfg: &ExperimentConfig,
    tol: f64,
    provider: Option<Arc<dyn SnapshotProvider>>,
) -> CliResult<RunArtifacts> {
    let (outcome, division) = match method {
        Method::Pdm => {
            let run = pdm_run(&mut objective, root, &pdm_config(cfg, tol))?;
            (run.outcome, Some(run.division))
        }
        Method::Gsm => (gsm_run(&mut objective, root, &gsm_config(cfg, tol))?, None),
    };
    Ok(RunArtifacts {
        method,
        final_n_basis: objective.basis_size(),
        distinct_points: objective.distinct_points(),
        total_evals: objective.evaluations(),
        outcome,
        division,
        objective,
        provider,
    })
}

/// EIM basis of the Gaussian source over `γ`, in insertion order.
pub fn eim_basis_for(family: &GaussianSourceFamily, gamma: &[Vec<f64>]) -> CliResult<EimBasis> {
    let mut basis = EimBasis::new();
    for p in gamma {
        basis.extend(&family.evaluate(p)?)?;
    }
    Ok(basis)
}

/// Runs the experiment described by a resolved config with `method`.
pub fn execute(cfg: &ExperimentConfig, method: Method) -> CliResult<Experiment> {
    let root = cfg.root();
    let d = root.dim();
    let grid = cfg.grid();
    match cfg.objective.id {
        ObjectiveId::Fill => {
            let obj = Objective::fill_distance(&root);
            Ok(Experiment {
                main: drive(method, obj, &root, cfg, cfg.tol, None)?,
                eim: None,
            })
        }
        ObjectiveId::RbThermal => {
            let provider: Arc<dyn SnapshotProvider> =
                Arc::new(CachedProvider::new(ThermalBlockModel::with_params(d, grid)?));
            let obj = Objective::reduced_basis(Arc::clone(&provider));
            Ok(Experiment {
                main: drive(method, obj, &root, cfg, cfg.tol, Some(provider))?,
                eim: None,
            })
        }
        ObjectiveId::EimGaussian => {
            let family = Arc::new(GaussianSourceFamily::new(grid)?);
            let obj = Objective::eim(family);
            Ok(Experiment {
                main: drive(method, obj, &root, cfg, cfg.tol, None)?,
                eim: None,
            })
        }
        ObjectiveId::RbGaussian => {
            let model = GaussianPoissonModel::new(grid)?;
            let Some(eim_tol) = cfg.objective.eim_tol else {
                let provider: Arc<dyn SnapshotProvider> = Arc::new(CachedProvider::new(model));
                let obj = Objective::reduced_basis(Arc::clone(&provider));
                return Ok(Experiment {
                    main: drive(method, obj, &root, cfg, cfg.tol, Some(provider))?,
                    eim: None,
                });
            };
            let family = Arc::new(model.family().clone());
            let phase1 = drive(
                method,
                Objective::eim(Arc::clone(&family) as Arc<dyn ParamFunctionFamily>),
                &root,
                cfg,
                eim_tol,
                None,
            )?;
            let basis = eim_basis_for(&family, &phase1.outcome.gamma)?;
            let affine = EimAffinePoisson::new(model, basis.clone())?;
            let provider: Arc<dyn SnapshotProvider> = Arc::new(CachedProvider::new(affine));
            let obj = Objective::reduced_basis(Arc::clone(&provider));
            let main = drive(method, obj, &root, cfg, cfg.tol, Some(provider))?;
            Ok(Experiment {
                main,
                eim: Some((phase1, basis)),
            })
        }
    }
}

/// The seeded verification sample: `n` uniform points from stream
/// `"verify"`, independent of the method's own draws.
pub fn verification_sample(cfg: &ExperimentConfig, n: usize) -> Vec<Vec<f64>> {
    let mut rng = Rng::new(cfg.seed).split("verify");
    uniform_sample(&mut rng, n, &cfg.root())
}

/// `max J` over the verification sample after each prefix of `γ`.
pub fn verify(run: &RunArtifacts, sample: &[Vec<f64>]) -> CliResult<Vec<VerifyPoint>> {
    Ok(verification_curve(&run.objective, &run.outcome.gamma, sample)?)
}
