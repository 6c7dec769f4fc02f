use crate::geometry::ParamBox;

use super::rng::Rng;

/// `n` i.i.d. uniform points in `bounds`.
pub fn uniform_sample(rng: &mut Rng, n: usize, bounds: &ParamBox) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
                .collect()
        })
        .collect()
}

/// Plain Latin hypercube: every axis is cut into `n` equal strata, each
/// stratum receives exactly one point, strata are permuted independently per
/// axis and points are placed uniformly inside their stratum.
pub fn lhs_sample(rng: &mut Rng, n: usize, bounds: &ParamBox) -> Vec<Vec<f64>> {
    let d = bounds.dim();
    let mut points = vec![vec![0.0; d]; n];
    let nf = n as f64;
    for axis in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut strata);
        let (lo, hi) = (bounds.lower()[axis], bounds.upper()[axis]);
        for (point, &k) in points.iter_mut().zip(&strata) {
            let top = (k + 1) as f64 / nf;
            // k + u may round up to k + 1 when u is within an ulp of 1.
            let t = ((k as f64 + rng.uniform()) / nf).min(top.next_down());
            point[axis] = lo + (hi - lo) * t;
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_in_box() {
        let b = ParamBox::unit(2);
        let pts = lhs_sample(&mut Rng::new(1), 1, &b);
        assert_eq!(pts.len(), 1);
        assert!(pts[0].iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn four_strata_one_each() {
        let b = ParamBox::unit(1);
        let pts = lhs_sample(&mut Rng::new(5), 4, &b);
        let mut hits = [0usize; 4];
        for p in &pts {
            let k = (0..4)
                .find(|&k| p[0] >= k as f64 * 0.25 && p[0] < (k + 1) as f64 * 0.25)
                .unwrap();
            hits[k] += 1;
        }
        assert_eq!(hits, [1, 1, 1, 1]);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let b = ParamBox::unit(2);
        let a = lhs_sample(&mut Rng::new(42), 3, &b);
        let c = lhs_sample(&mut Rng::new(42), 3, &b);
        let bits = |v: &Vec<Vec<f64>>| -> Vec<u64> { v.iter().flatten().map(|x| x.to_bits()).collect() };
        assert_eq!(bits(&a), bits(&c));
    }

    #[test]
    fn mapped_into_box() {
        let b = ParamBox::new(vec![1.0, -2.0], vec![10.0, 3.0]).unwrap();
        for p in uniform_sample(&mut Rng::new(2), 200, &b)
            .into_iter()
            .chain(lhs_sample(&mut Rng::new(2), 200, &b))
        {
            assert!(b.contains_closed(&p));
        }
    }
}
