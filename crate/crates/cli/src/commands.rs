//! The `run`, `compare`, `check-division` and `snapshot-svg` verbs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use pdm_core::division::DivisionRecord;
use pdm_core::oracle::{brute_force_facets, geometry_facet_sets, MAX_DIM, MAX_POINTS};
use pdm_core::rbm::write_snapshots;
use pdm_core::trace::write_trace_csv;
use pdm_core::{Division, Rng, RunStatus};
use serde_json::json;

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, CliResult};
use crate::experiment::{execute, verification_sample, verify, RunArtifacts};
use crate::svg::render_division;

pub const SUMMARY_SCHEMA: &str = "pdm-summary/v1";
pub const COMPARE_SCHEMA: &str = "pdm-compare/v1";
pub const VERIFY_SCHEMA: &str = "pdm-verify/v1";
pub const COMPARE_COLUMNS: &str =
    "dim,method,distinct_points,total_evals,final_n_basis,gamma_size,status,verify_max_err";

/// Options shared by `run` and `compare`.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub verify: Option<usize>,
    pub timing: bool,
}

fn load_resolved(opts: &RunOptions) -> CliResult<(ExperimentConfig, String)> {
    let (mut cfg, text) = ExperimentConfig::load(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(v) = opts.verify {
        cfg.verify = v;
    }
    let origin = opts.config.display().to_string();
    let resolved = cfg
        .resolve()
        .map_err(|e| ExperimentConfig::locate(e, &text, &origin))?;
    Ok((resolved, text))
}

/// `--out-dir`, then `PDM_OUT_DIR`, then the config, then `pdm-out`.
fn out_dir(opts: &RunOptions, cfg: &ExperimentConfig) -> PathBuf {
    opts.out_dir
        .clone()
        .or_else(|| std::env::var_os("PDM_OUT_DIR").map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("pdm-out"))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn write_trace(path: &Path, run: &RunArtifacts, cfg: &ExperimentConfig, timing: bool) -> CliResult<()> {
    let mut f = create(path)?;
    write_trace_csv(&mut f, &run.outcome.trace, cfg.seed, Some(&cfg.embed()), timing)?;
    f.flush()?;
    Ok(())
}

fn write_verify(path: &Path, run: &RunArtifacts, cfg: &ExperimentConfig) -> CliResult<Option<f64>> {
    if cfg.verify == 0 {
        return Ok(None);
    }
    let sample = verification_sample(cfg, cfg.verify);
    let curve = verify(run, &sample)?;
    let mut f = create(path)?;
    writeln!(
        f,
        "# schema={VERIFY_SCHEMA} seed={} samples={} config={}",
        cfg.seed,
        cfg.verify,
        cfg.embed()
    )?;
    writeln!(f, "n_points,n_basis,max_err")?;
    for c in &curve {
        writeln!(f, "{},{},{:e}", c.n_points, c.n_basis, c.max_err)?;
    }
    f.flush()?;
    Ok(curve.last().map(|c| c.max_err))
}

fn summary(run: &RunArtifacts, cfg: &ExperimentConfig, timing: bool) -> serde_json::Value {
    let mut s = json!({
        "schema": SUMMARY_SCHEMA,
        "seed": cfg.seed,
        "method": run.method.as_str(),
        "objective": cfg.objective.id,
        "status": run.outcome.status.as_str(),
        "steps": run.outcome.trace.len(),
        "gamma_size": run.outcome.gamma.len(),
        "distinct_points": run.distinct_points,
        "total_evals": run.total_evals,
        "final_n_basis": run.final_n_basis,
        "final_err": run.outcome.trace.last().map(|r| r.err),
        "gamma": run.outcome.gamma,
        "config": cfg,
    });
    if let RunStatus::Failed(msg) = &run.outcome.status {
        s["error"] = json!(msg);
    }
    match run.method {
        Method::Gsm => {
            s["sampler"] = json!(cfg.gsm.sampler);
            s["sample_size"] = json!(cfg.sample_size());
        }
        Method::Pdm => {
            if let Some(div) = &run.division {
                s["n_cells"] = json!(div.len());
            }
        }
    }
    if timing {
        let ms: f64 = run.outcome.trace.iter().map(|r| r.wall_ms).sum();
        s["wall_ms"] = json!(ms);
    }
    s
}

fn division_record(run: &RunArtifacts, cfg: &ExperimentConfig) -> Option<DivisionRecord> {
    run.division.as_ref().map(|div| {
        let mut rec = div.to_record(&run.outcome.gamma);
        rec.meta = Some(json!({ "seed": cfg.seed, "config": cfg }));
        rec
    })
}

/// Rebuilds the division after each refinement from the recorded history
/// and renders one SVG per step.
fn write_step_svgs(dir: &Path, run: &RunArtifacts) -> CliResult<usize> {
    let Some(div) = &run.division else {
        return Ok(0);
    };
    let gamma = &run.outcome.gamma;
    let mut replay = Division::new(div.root().clone(), &gamma[0])?;
    let mut written = 0;
    let mut emit = |replay: &Division, k: usize| -> CliResult<()> {
        let svg = render_division(&replay.to_record(&gamma[..k]))?;
        write_text(&dir.join(format!("step_{:04}.svg", k - 1)), &svg)?;
        written += 1;
        Ok(())
    };
    emit(&replay, 1)?;
    for (j, event) in div.history().iter().enumerate() {
        replay.refine(event.parent)?;
        emit(&replay, j + 2)?;
    }
    Ok(written)
}

fn write_run_outputs(dir: &Path, run: &RunArtifacts, cfg: &ExperimentConfig, timing: bool, prefix: &str) -> CliResult<Option<f64>> {
    write_trace(&dir.join(format!("{prefix}trace.csv")), run, cfg, timing)?;
    if let Some(rec) = division_record(run, cfg) {
        write_text(&dir.join(format!("{prefix}division.json")), &rec.to_json())?;
    }
    let verified = write_verify(&dir.join(format!("{prefix}verify.csv")), run, cfg)?;
    let mut s = summary(run, cfg, timing);
    if let Some(v) = verified {
        s["verify_max_err"] = json!(v);
    }
    write_text(
        &dir.join(format!("{prefix}summary.json")),
        &(serde_json::to_string_pretty(&s).expect("json") + "\n"),
    )?;
    Ok(verified)
}

pub fn cmd_run(opts: &RunOptions) -> CliResult<()> {
    let (cfg, text) = load_resolved(opts)?;
    let Some(method) = cfg.method else {
        return Err(ExperimentConfig::locate(
            crate::config::KeyError {
                key: "method",
                msg: "required for run".into(),
            },
            &text,
            &opts.config.display().to_string(),
        ));
    };
    let dir = out_dir(opts, &cfg);
    fs::create_dir_all(&dir)?;
    let exp = execute(&cfg, method)?;
    if let Some((phase1, basis)) = &exp.eim {
        let mut eim_cfg = cfg.clone();
        eim_cfg.verify = 0;
        write_run_outputs(&dir, phase1, &eim_cfg, opts.timing, "eim_")?;
        write_text(&dir.join("eim_basis.json"), &basis.to_json())?;
    }
    let run = &exp.main;
    write_run_outputs(&dir, run, &cfg, opts.timing, "")?;
    if cfg.output.svg && cfg.root().dim() == 2 {
        write_step_svgs(&dir.join("steps"), run)?;
    }
    if cfg.output.snapshots {
        if let Some(provider) = &run.provider {
            let snaps = run
                .outcome
                .gamma
                .iter()
                .map(|p| provider.snapshot(p).map(|u| u.to_vec()))
                .collect::<pdm_core::Result<Vec<_>>>()?;
            let mut f = create(&dir.join("snapshots.bin"))?;
            write_snapshots(&mut f, &snaps)?;
            f.flush()?;
        }
    }
    println!(
        "{} {}: status={} |gamma|={} distinct={} evals={} basis={} -> {}",
        method.as_str(),
        serde_json::to_string(&cfg.objective.id).expect("json").trim_matches('"'),
        run.outcome.status,
        run.outcome.gamma.len(),
        run.distinct_points,
        run.total_evals,
        run.final_n_basis,
        dir.display()
    );
    match run.outcome.status {
        RunStatus::Converged => Ok(()),
        ref other => Err(CliError::Check(format!("run did not converge: {other}"))),
    }
}

/// One row of the comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub dim: usize,
    pub method: Method,
    pub distinct_points: usize,
    pub total_evals: u64,
    pub final_n_basis: usize,
    pub gamma_size: usize,
    pub status: String,
    pub verify_max_err: Option<f64>,
}

pub fn cmd_compare(opts: &RunOptions) -> CliResult<Vec<CompareRow>> {
    let (cfg, text) = load_resolved(opts)?;
    let origin = opts.config.display().to_string();
    let Some(sweep) = cfg.compare.clone() else {
        return Err(CliError::Config(format!("{origin}: compare: section required")));
    };
    let dir = out_dir(opts, &cfg);
    fs::create_dir_all(&dir)?;
    let mut raw = ExperimentConfig::load(&opts.config)?.0;
    raw.seed = cfg.seed;
    raw.verify = cfg.verify;
    let mut rows = Vec::new();
    let mut failures = 0;
    for &d in &sweep.dims {
        let per_dim = match raw.with_dim(d).resolve() {
            Ok(c) => c,
            Err(e) => return Err(ExperimentConfig::locate(e, &text, &origin)),
        };
        for &method in &sweep.methods {
            let prefix = format!("d{d}_{}_", method.as_str());
            let row = match execute(&per_dim, method) {
                Ok(exp) => {
                    let run = &exp.main;
                    let verified = write_run_outputs(&dir.join("runs"), run, &per_dim, opts.timing, &prefix)?;
                    if matches!(run.outcome.status, RunStatus::Failed(_)) {
                        failures += 1;
                    }
                    CompareRow {
                        dim: d,
                        method,
                        distinct_points: run.distinct_points,
                        total_evals: run.total_evals,
                        final_n_basis: run.final_n_basis,
                        gamma_size: run.outcome.gamma.len(),
                        status: run.outcome.status.as_str().to_string(),
                        verify_max_err: verified,
                    }
                }
                Err(e) => {
                    eprintln!("d={d} {}: {e}", method.as_str());
                    failures += 1;
                    CompareRow {
                        dim: d,
                        method,
                        distinct_points: 0,
                        total_evals: 0,
                        final_n_basis: 0,
                        gamma_size: 0,
                        status: "failed".into(),
                        verify_max_err: None,
                    }
                }
            };
            println!(
                "d={} {}: status={} distinct={} evals={} basis={}",
                row.dim,
                row.method.as_str(),
                row.status,
                row.distinct_points,
                row.total_evals,
                row.final_n_basis
            );
            rows.push(row);
        }
    }
    let mut f = create(&dir.join("compare.csv"))?;
    writeln!(f, "# schema={COMPARE_SCHEMA} seed={} config={}", cfg.seed, cfg.embed())?;
    writeln!(f, "{COMPARE_COLUMNS}")?;
    for r in &rows {
        let v = r.verify_max_err.map(|v| format!("{v:e}")).unwrap_or_default();
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            r.dim,
            r.method.as_str(),
            r.distinct_points,
            r.total_evals,
            r.final_n_basis,
            r.gamma_size,
            r.status,
            v
        )?;
    }
    f.flush()?;
    if failures > 0 {
        return Err(CliError::Check(format!("{failures} comparison run(s) failed")));
    }
    Ok(rows)
}

fn read_division(path: &Path) -> CliResult<(DivisionRecord, Division)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rec = DivisionRecord::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let div = Division::from_record(&rec)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok((rec, div))
}

/// Facet mismatches between the closed forms and the brute-force oracle,
/// over the cells small enough for the oracle. Returns (checked, mismatched).
pub fn oracle_check(div: &Division) -> CliResult<(usize, usize)> {
    let (mut checked, mut bad) = (0, 0);
    if div.dim() > MAX_DIM {
        return Ok((0, 0));
    }
    for cell in div.cells() {
        let verts = cell.shape.vertices();
        if verts.len() > MAX_POINTS {
            continue;
        }
        checked += 1;
        let ours = geometry_facet_sets(&cell.shape)?;
        if brute_force_facets(&verts).ok().as_ref() != Some(&ours) {
            eprintln!("cell {}: facets disagree with the oracle", cell.id);
            bad += 1;
        }
    }
    Ok((checked, bad))
}

pub fn cmd_check_division(path: &Path, samples: usize, seed: u64, oracle: bool) -> CliResult<()> {
    if samples == 0 {
        return Err(CliError::Config("--samples must be at least 1".into()));
    }
    let (_, div) = read_division(path)?;
    let report = div.check_proper(&mut Rng::new(seed).split("check-division"), samples)?;
    let mut out = json!({
        "volume_sum_rel_err": report.volume_sum_rel_err,
        "mc_points": report.mc_points,
        "uncovered": report.uncovered,
        "multiply_covered_interior": report.multiply_covered_interior,
        "cells": div.len(),
        "seed": seed,
    });
    let mut ok = report.is_proper(1e-8);
    if oracle {
        let (checked, bad) = oracle_check(&div)?;
        out["oracle_checked"] = json!(checked);
        out["oracle_mismatches"] = json!(bad);
        ok &= bad == 0;
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    if ok {
        Ok(())
    } else {
        Err(CliError::Check("division is not proper".into()))
    }
}

pub fn cmd_snapshot_svg(path: &Path, out: &Path) -> CliResult<()> {
    let (rec, _) = read_division(path)?;
    let svg = render_division(&rec).map_err(|e| CliError::Config(e.to_string()))?;
    write_text(out, &svg)
}
