use std::sync::Arc;

use pdm_core::gsm::{gsm_run, GsmConfig, Sampler};
use pdm_core::objectives::Objective;
use pdm_core::pdm::{pdm_run, PdmConfig};
use pdm_core::rbm::{CachedProvider, ThermalBlockModel};
use pdm_core::{CellId, Containment, Division, ParamBox, Rng, RunStatus};

fn thermal(d: usize, n: usize) -> Objective {
    let model = ThermalBlockModel::with_params(d, n).unwrap();
    Objective::reduced_basis(Arc::new(CachedProvider::new(model)))
}

#[test]
fn fill_first_step_ties_resolve_to_cell_zero() {
    let root = ParamBox::unit(2);
    let div = Division::new(Arc::new(root.clone()), &[0.5, 0.5]).unwrap();
    let mut bary: Vec<Vec<f64>> = div.barycenters().values().cloned().collect();
    bary.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let third = 1.0 / 6.0;
    let expected = [
        [third, 0.5],
        [0.5, third],
        [0.5, 1.0 - third],
        [1.0 - third, 0.5],
    ];
    for (b, e) in bary.iter().zip(&expected) {
        assert!((b[0] - e[0]).abs() < 1e-15 && (b[1] - e[1]).abs() < 1e-15);
    }
    let mut obj = Objective::fill_distance(&root);
    obj.notify_appended(&[0.5, 0.5]).unwrap();
    let values: Vec<f64> = div
        .barycenters()
        .values()
        .map(|b| obj.evaluate(b).unwrap())
        .collect();
    assert!(values.iter().all(|&v| v == values[0]));
    assert_eq!(div.barycenter(CellId(0)).unwrap(), &[third, 0.5]);

    let mut obj = Objective::fill_distance(&root);
    let cfg = PdmConfig {
        tol: 0.0,
        max_iters: 1,
        ..PdmConfig::default()
    };
    let run = pdm_run(&mut obj, &root, &cfg).unwrap();
    assert_eq!(run.outcome.trace[0].selected_cell, 0);
}

#[test]
fn pdm_selected_points_are_new_and_interior() {
    let root = ParamBox::cube(3, -1.0, 2.0).unwrap();
    let mut obj = Objective::fill_distance(&root);
    let cfg = PdmConfig {
        tol: 0.0,
        max_iters: 60,
        ..PdmConfig::default()
    };
    let run = pdm_run(&mut obj, &root, &cfg).unwrap();
    let tol = 1e-9 * root.diameter();
    for (k, p) in run.outcome.gamma.iter().enumerate() {
        assert!(root.contains_strictly(p, tol));
        assert!(run.outcome.gamma[..k].iter().all(|q| q != p));
    }
    for (j, rec) in run.outcome.trace.iter().enumerate() {
        assert!(rec.distinct_points <= 1 + 2 * 3 * (j + 2));
    }
}

#[test]
fn pdm_thermal_replay_is_bit_exact() {
    let root = ParamBox::cube(4, 1.0, 10.0).unwrap();
    let cfg = PdmConfig {
        tol: 1e-6,
        max_iters: 40,
        ..PdmConfig::default()
    };
    let a = pdm_run(&mut thermal(4, 17), &root, &cfg).unwrap();
    let b = pdm_run(&mut thermal(4, 17), &root, &cfg).unwrap();
    assert_eq!(a.outcome.gamma, b.outcome.gamma);
    let bits = |r: &pdm_core::pdm::PdmRun| -> Vec<(u64, u64)> {
        r.outcome
            .trace
            .iter()
            .map(|s| (s.selected_cell, s.err.to_bits()))
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
    let ids_a: Vec<_> = a.division.ids().collect();
    let ids_b: Vec<_> = b.division.ids().collect();
    assert_eq!(ids_a, ids_b);
}

#[test]
fn gsm_rb_error_is_nonincreasing() {
    let root = ParamBox::cube(4, 1.0, 10.0).unwrap();
    for sampler in [Sampler::Random, Sampler::Lhs] {
        let cfg = GsmConfig {
            sampler,
            sample_size: 16,
            tol: 1e-14,
            max_iters: 16,
            seed: 3,
        };
        let out = gsm_run(&mut thermal(4, 17), &root, &cfg).unwrap();
        assert!(out.trace.len() > 3);
        for w in out.trace.windows(2) {
            assert!(w[1].err <= w[0].err + 1e-12, "{} -> {}", w[0].err, w[1].err);
        }
        assert!(out.trace.iter().all(|r| r.distinct_points == 16));
    }
}

#[test]
fn incremental_state_matches_rebuild() {
    let root = ParamBox::cube(4, 1.0, 10.0).unwrap();
    let mut obj = thermal(4, 17);
    let mut rng = Rng::new(9);
    let pick = |rng: &mut Rng| -> Vec<f64> { (0..4).map(|_| rng.uniform_in(1.0, 10.0)).collect() };
    for _ in 0..6 {
        let p = pick(&mut rng);
        obj.notify_appended(&p).unwrap();
    }
    let rebuilt = obj.rebuilt().unwrap();
    for _ in 0..100 {
        let q = pick(&mut rng);
        let a = obj.evaluate(&q).unwrap();
        let b = rebuilt.evaluate(&q).unwrap();
        assert!((a - b).abs() <= 1e-10, "{a} {b}");
    }
    assert!(root.contains_closed(&obj.configuration().points()[0]));
}

#[test]
fn division_stays_proper_through_pdm() {
    let root = ParamBox::unit(3);
    let mut obj = Objective::fill_distance(&root);
    let cfg = PdmConfig {
        tol: 0.0,
        max_iters: 50,
        ..PdmConfig::default()
    };
    let run = pdm_run(&mut obj, &root, &cfg).unwrap();
    assert_eq!(run.outcome.status, RunStatus::MaxIters);
    let report = run.division.check_proper(&mut Rng::new(1), 20_000).unwrap();
    assert!(report.is_proper(1e-8), "{report:?}");
    for cell in run.division.cells() {
        let b = run.division.barycenter(cell.id).unwrap();
        assert_eq!(cell.shape.contains(b, run.division.tol()).unwrap(), Containment::Interior);
    }
}
