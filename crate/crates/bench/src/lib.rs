//! Benchmark fixtures shared by the criterion benches.

use std::sync::Arc;

use pdm_core::{Division, ParamBox, Rng};

/// A division of `[0,1]^d` after `steps` refinements of randomly chosen
/// cells at random interior points.
pub fn random_division(d: usize, steps: usize, seed: u64) -> Division {
    let mut rng = Rng::new(seed).split("bench-division");
    let center = ParamBox::unit(d).center();
    let mut div = Division::new(Arc::new(ParamBox::unit(d)), &center).expect("division");
    for _ in 0..steps {
        let ids: Vec<_> = div.ids().collect();
        div.refine(ids[rng.below(ids.len())]).expect("refine");
    }
    div
}
