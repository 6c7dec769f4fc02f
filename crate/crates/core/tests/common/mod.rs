#![allow(dead_code)]

use std::sync::Arc;

use pdm_core::{Division, ParamBox, Rng};

/// Unit-box division grown by refining uniformly chosen cells, starting
/// from a random interior point.
pub fn random_division(d: usize, steps: usize, rng: &mut Rng) -> Division {
    let p: Vec<f64> = (0..d).map(|_| rng.uniform_in(0.2, 0.8)).collect();
    let mut div = Division::new(Arc::new(ParamBox::unit(d)), &p).unwrap();
    for _ in 0..steps {
        let ids: Vec<_> = div.ids().collect();
        let id = ids[rng.below(ids.len())];
        div.refine(id).unwrap();
    }
    div
}
