//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each and exits non-zero if any failed.

use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use pdm_cli::commands::{cmd_compare, RunOptions};
use pdm_cli::config::{gaussian_box, Method};
use pdm_core::eim::{EimBasis, GaussianSourceFamily, ParamFunctionFamily};
use pdm_core::gsm::{gsm_run, GsmConfig, Sampler};
use pdm_core::numerics::uniform_sample;
use pdm_core::objectives::Objective;
use pdm_core::oracle::{brute_force_facets, geometry_facet_sets};
use pdm_core::pdm::{pdm_run, PdmConfig, PdmRun};
use pdm_core::rbm::{thermal_block_solve, CachedProvider, GaussianPoissonModel, ThermalBlockModel};
use pdm_core::{Division, ParamBox, Rng, Shape};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fill_pdm(d: usize, steps: usize) -> PdmRun {
    let root = ParamBox::unit(d);
    let mut obj = Objective::fill_distance(&root);
    let cfg = PdmConfig {
        tol: 0.0,
        max_iters: steps,
        ..PdmConfig::default()
    };
    pdm_run(&mut obj, &root, &cfg).expect("pdm run")
}

fn expected_facets(shape: &Shape) -> usize {
    let d = shape.dim();
    match shape {
        Shape::Simplex(_) => d + 1,
        Shape::Boundary(b) => {
            let n = b.apexes().len();
            n + 2 * (d - n)
        }
    }
}

fn c1_facet_lemmas() -> Outcome {
    let t0 = Instant::now();
    let mut rng = Rng::new(1).split("facet-lemmas");
    let (mut checked, mut mismatched, mut boundary) = (0, 0, 0);
    for d in [2, 3, 4] {
        let mut per_dim = 0;
        while per_dim < 200 {
            let p: Vec<f64> = (0..d).map(|_| rng.uniform_in(0.2, 0.8)).collect();
            let mut div = Division::new(Arc::new(ParamBox::unit(d)), &p).unwrap();
            for _ in 0..rng.below(15) {
                let ids: Vec<_> = div.ids().collect();
                div.refine(ids[rng.below(ids.len())]).unwrap();
            }
            let cells: Vec<_> = div.cells().cloned().collect();
            for _ in 0..4 {
                let cell = &cells[rng.below(cells.len())];
                let ours = geometry_facet_sets(&cell.shape).unwrap();
                let oracle = brute_force_facets(&cell.shape.vertices());
                if oracle.as_ref().ok() != Some(&ours) {
                    mismatched += 1;
                }
                boundary += usize::from(!cell.shape.is_simplex());
                checked += 1;
                per_dim += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        mismatched == 0 && secs < 60.0,
        format!("{checked} cells ({boundary} boundary polytopes), {mismatched} mismatches, {secs:.1}s"),
    )
}

fn c2_facet_bound() -> Outcome {
    let mut bad = 0;
    let mut checked = 0;
    for d in 2..=6 {
        let run = fill_pdm(d, 500);
        let gamma = &run.outcome.gamma;
        let mut replay = Division::new(run.division.root().clone(), &gamma[0]).unwrap();
        let mut check = |shape: &Shape| {
            let f = shape.facets().len();
            checked += 1;
            if f > 2 * d || f != expected_facets(shape) {
                bad += 1;
            }
        };
        for cell in replay.cells() {
            check(&cell.shape);
        }
        for event in run.division.history() {
            let children = replay.refine(event.parent).unwrap();
            for id in children {
                check(&replay.cell(id).unwrap().shape);
            }
        }
    }
    outcome(bad == 0, format!("{checked} cells over d=2..6 x 500 steps, {bad} violations"))
}

fn c3_proper_division() -> Outcome {
    let t0 = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for d in [2, 3, 5] {
        let run = fill_pdm(d, 100);
        let report = run
            .division
            .check_proper(&mut Rng::new(d as u64).split("proper"), 100_000)
            .unwrap();
        pass &= report.volume_sum_rel_err <= 1e-8
            && report.uncovered == 0
            && report.multiply_covered_interior == 0;
        details.push(format!(
            "d={d}: {} cells rel_err={:.1e} uncovered={} multi={}",
            run.division.len(),
            report.volume_sum_rel_err,
            report.uncovered,
            report.multiply_covered_interior
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(pass && secs < 120.0, format!("{}; {secs:.1}s", details.join("; ")))
}

fn c4_linear_scaling() -> Outcome {
    let j = 50;
    let mut pass = true;
    let mut parts = Vec::new();
    for d in 2..=10 {
        // The record of step j + 1 is taken after j refinements.
        let run = fill_pdm(d, j + 1);
        let rec = &run.outcome.trace[j];
        let ok = rec.distinct_points <= 1 + 2 * d * (j + 1) && rec.n_cells <= 2 * d + j * (2 * d - 1);
        pass &= ok;
        parts.push(format!("d={d}:{}/{}", rec.distinct_points, rec.n_cells));
    }
    outcome(pass, format!("distinct/cells after {j} steps: {}", parts.join(" ")))
}

fn c5_gsm_monotone() -> Outcome {
    let root = ParamBox::cube(4, 1.0, 10.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for sampler in [Sampler::Random, Sampler::Lhs] {
        let model = ThermalBlockModel::with_params(4, 33).unwrap();
        let mut obj = Objective::reduced_basis(Arc::new(CachedProvider::new(model)));
        let cfg = GsmConfig {
            sampler,
            sample_size: 16,
            tol: 0.0,
            max_iters: 16,
            seed: 5,
        };
        let out = gsm_run(&mut obj, &root, &cfg).unwrap();
        let worst = out
            .trace
            .windows(2)
            .map(|w| w[1].err - w[0].err)
            .fold(f64::NEG_INFINITY, f64::max);
        pass &= worst <= 1e-12;
        parts.push(format!(
            "{}: {} steps, largest increase {worst:.1e}",
            sampler.as_str(),
            out.trace.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c6_eim() -> Outcome {
    let family = GaussianSourceFamily::new(41).unwrap();
    let mut rng = Rng::new(6).split("eim-training");
    let params = uniform_sample(&mut rng, 30, &gaussian_box());
    let snaps: Vec<Vec<f64>> = params.iter().map(|p| family.evaluate(p).unwrap()).collect();
    let mut basis = EimBasis::new();
    for s in &snaps {
        basis.extend(s).unwrap();
    }
    let mut train = 0.0f64;
    let mut at_magic = 0.0f64;
    for s in &snaps {
        let approx = basis.interpolate(s).unwrap();
        for (a, b) in s.iter().zip(&approx) {
            train = train.max((a - b).abs());
        }
        for &i in &basis.indices {
            at_magic = at_magic.max((s[i] - approx[i]).abs());
        }
    }
    let mut b_ok = true;
    for (k, row) in basis.b.iter().enumerate() {
        b_ok &= row.len() == k + 1 && row[k] == 1.0 && row.iter().all(|x| x.abs() <= 1.0);
    }
    outcome(
        train <= 1e-10 && at_magic <= 1e-12 && b_ok,
        format!(
            "M={} train residual {train:.1e}, magic residual {at_magic:.1e}, B unit lower-triangular and bounded: {b_ok}",
            basis.len()
        ),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn c7_samples_vs_dimension(tmp: &Path) -> Outcome {
    let t0 = Instant::now();
    let config = write_config(
        tmp,
        "compare.json",
        r#"{
  "schema": "pdm-config/v1",
  "objective": { "id": "rb-thermal", "grid": 17 },
  "tol": 1e-4,
  "max_iters": 500,
  "seed": 0,
  "compare": { "dims": [4, 6, 8], "methods": ["pdm", "gsm"] }
}"#,
    );
    let opts = RunOptions {
        config,
        out_dir: Some(tmp.join("compare")),
        timing: false,
        ..RunOptions::default()
    };
    let rows = match cmd_compare(&opts) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("compare failed: {e}")),
    };
    let get = |d: usize, m: Method| {
        rows.iter()
            .find(|r| r.dim == d && r.method == m)
            .map_or(0, |r| r.distinct_points)
    };
    let (p4, p8) = (get(4, Method::Pdm), get(8, Method::Pdm));
    let (g4, g8) = (get(4, Method::Gsm), get(8, Method::Gsm));
    let secs = t0.elapsed().as_secs_f64();
    let pdm_growth = p8 as f64 / p4 as f64;
    outcome(
        p8 < g8 && pdm_growth < 4.0 && g8 == 16 * g4 && secs < 600.0,
        format!(
            "PDM {p4}->{}->{p8} (x{pdm_growth:.2}), GSM {g4}->{}->{g8}; {secs:.1}s",
            get(6, Method::Pdm),
            get(6, Method::Gsm)
        ),
    )
}

fn c8_replay(tmp: &Path) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, method) in [("pdm", "pdm"), ("gsm", "gsm")] {
        let body = format!(
            r#"{{
  "schema": "pdm-config/v1",
  "method": "{method}",
  "objective": {{ "id": "rb-thermal", "grid": 17 }},
  "dim": 4,
  "tol": 1e-6,
  "max_iters": 200,
  "seed": 11
}}"#
        );
        let config = write_config(tmp, &format!("replay_{name}.json"), &body);
        let mut bytes = Vec::new();
        for k in 0..2 {
            let out = tmp.join(format!("replay_{name}_{k}"));
            let code = pdm_cli::run_cli([
                "pdm",
                "run",
                "--config",
                config.to_str().unwrap(),
                "--out-dir",
                out.to_str().unwrap(),
                "--no-timing",
            ]);
            pass &= code == 0;
            bytes.push(fs::read(out.join("trace.csv")).unwrap_or_default());
        }
        let same = !bytes[0].is_empty() && bytes[0] == bytes[1];
        pass &= same;
        parts.push(format!("{name}: {} bytes identical={same}", bytes[0].len()));
    }
    outcome(pass, parts.join("; "))
}

fn node(u: &[f64], n: usize, i: usize, j: usize) -> f64 {
    u[(j - 1) * (n - 2) + (i - 1)]
}

fn c9_pde() -> Outcome {
    let mut pass = true;
    let one = thermal_block_solve(&[1.0; 4], 33).unwrap();
    let c = 7.0;
    let scaled = thermal_block_solve(&[c; 4], 33).unwrap();
    let scale_err = one
        .iter()
        .zip(&scaled)
        .fold(0.0f64, |m, (a, b)| m.max((a / c - b).abs()));
    pass &= scale_err <= 1e-9;

    let model = ThermalBlockModel::with_params(4, 33).unwrap();
    let op = model.operator(&[2.0, 9.0, 4.5, 1.2]).unwrap();
    let u = op.solve(&vec![1.0; op.unknowns()]).unwrap();
    let (energy, load) = op.energy_terms(&u);
    let energy_rel = (energy - load).abs() / load;
    pass &= energy_rel <= 1e-8;

    let mut rng = Rng::new(2024).split("grid-convergence");
    let mut ratios = Vec::new();
    for _ in 0..3 {
        let p: Vec<f64> = (0..4).map(|_| rng.uniform_in(1.0, 10.0)).collect();
        let u = [17, 33, 65].map(|n| thermal_block_solve(&p, n).unwrap());
        let (mut coarse, mut fine) = (0.0, 0.0);
        for j in 1..16 {
            for i in 1..16 {
                let a = node(&u[0], 17, i, j);
                let b = node(&u[1], 33, 2 * i, 2 * j);
                let c = node(&u[2], 65, 4 * i, 4 * j);
                coarse += (a - b).powi(2);
                fine += (b - c).powi(2);
            }
        }
        ratios.push((coarse / fine).sqrt());
    }
    pass &= ratios.iter().all(|r| (3.5..=4.5).contains(r));

    let n = 41;
    let g = GaussianPoissonModel::new(n).unwrap();
    let mut min_u = f64::INFINITY;
    let mut asym = 0.0f64;
    for p in [[0.0, 0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 2.5, 2.5, 0.0], [0.4, -0.7, 1.2, 2.8, -0.6]] {
        let u = g.solve(&p).unwrap();
        min_u = u.iter().fold(min_u, |m, &v| m.min(v));
        if p[0] == 0.0 && p[1] == 0.0 && p[2] == p[3] && p[4] == 0.0 {
            for j in 1..n - 1 {
                for i in 1..n - 1 {
                    asym = asym.max((node(&u, n, i, j) - node(&u, n, j, i)).abs());
                }
            }
        }
    }
    pass &= min_u >= 0.0 && asym <= 1e-9;
    outcome(
        pass,
        format!(
            "scaling {scale_err:.1e}, energy rel {energy_rel:.1e}, ratios {:?}, min u {min_u:.1e}, x<->y {asym:.1e}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn read_verify(path: &Path) -> Vec<(usize, f64)> {
    fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n_points"))
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Some((f.get(1)?.parse().ok()?, f.get(2)?.parse().ok()?))
        })
        .collect()
}

fn c10_two_phase(tmp: &Path) -> Outcome {
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for method in ["pdm", "gsm"] {
        let body = format!(
            r#"{{
  "schema": "pdm-config/v1",
  "method": "{method}",
  "objective": {{ "id": "rb-gaussian", "grid": 41, "eim_tol": 1e-3 }},
  "tol": 1e-6,
  "max_iters": 300,
  "seed": 10,
  "gsm": {{ "sampler": "random", "sample_size": 256 }},
  "verify": 300
}}"#
        );
        let config = write_config(tmp, &format!("gaussian_{method}.json"), &body);
        let out = tmp.join(format!("gaussian_{method}"));
        let code = pdm_cli::run_cli([
            "pdm",
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--no-timing",
        ]);
        let curve = read_verify(&out.join("verify.csv"));
        let eim: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("eim_summary.json")).unwrap_or_default())
                .unwrap_or_default();
        let ok_run = code == 0 && !curve.is_empty() && out.join("eim_basis.json").exists();
        let mono = curve.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 >= w[0].0);
        pass &= ok_run && (method != "gsm" || mono);
        parts.push(format!(
            "{method}: exit {code}, EIM M={}, RB basis {}, verify {:.2e} -> {:.2e}, nonincreasing={mono}",
            eim["final_n_basis"],
            curve.last().map_or(0, |c| c.0),
            curve.first().map_or(f64::NAN, |c| c.1),
            curve.last().map_or(f64::NAN, |c| c.1)
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    outcome(pass, format!("{}; {secs:.1}s", parts.join("; ")))
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; ignore them.
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 facet lemmas vs brute-force oracle (d=2,3,4)", Box::new(c1_facet_lemmas)),
        ("2 |facets| <= 2d, exact counts per cell type", Box::new(c2_facet_bound)),
        ("3 proper division after 100 steps (d=2,3,5)", Box::new(c3_proper_division)),
        ("4 linear growth of evaluated points and cells", Box::new(c4_linear_scaling)),
        ("5 GSM max training error nonincreasing (RB thermal d=4)", Box::new(c5_gsm_monotone)),
        ("6 EIM exactness and magic-point property", Box::new(c6_eim)),
        ("7 PDM vs GSM evaluated points across d=4,6,8", Box::new(|| c7_samples_vs_dimension(tmp.path()))),
        ("8 byte-identical trace CSV on replay", Box::new(|| c8_replay(tmp.path()))),
        ("9 PDE solver sanity", Box::new(c9_pde)),
        ("10 two-phase EIM -> RB Gaussian workflow", Box::new(|| c10_two_phase(tmp.path()))),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (name, run) in &criteria {
        let t0 = Instant::now();
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!out.pass);
        println!(
            "[{tag}] criterion {name} ({:.1}s): {}",
            t0.elapsed().as_secs_f64(),
            out.detail
        );
    }
    let elapsed: Duration = total.elapsed();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        elapsed.as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
