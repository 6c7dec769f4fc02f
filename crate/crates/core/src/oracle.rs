//! Brute-force geometric oracles for testing: facet enumeration of small
//! point sets from first principles and Monte-Carlo volumes.
//!
//! Nothing here reuses the hyperplane or determinant routines of
//! [`crate::numerics`], so agreement with [`crate::geometry`] is a real
//! cross-check.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::{Containment, ParamBox, Shape};
use crate::numerics::Rng;

pub const MAX_POINTS: usize = 16;
pub const MAX_DIM: usize = 5;
/// Strict-side tolerance (absolute; fixtures are unit scale).
pub const SIDE_TOL: f64 = 1e-9;

/// Laplace expansion along the first row. Only used for `n ≤ 4`.
fn cofactor_det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &x)| x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][j] * cofactor_det(&minor)
            })
            .sum(),
    }
}

/// Generalized cross product of `d − 1` vectors in `ℝ^d`.
fn cross(vs: &[Vec<f64>], d: usize) -> Vec<f64> {
    (0..d)
        .map(|k| {
            let minor: Vec<Vec<f64>> = vs
                .iter()
                .map(|v| {
                    v.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * cofactor_det(&minor)
        })
        .collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Facets of `Conv(points)` as sorted index sets, sorted.
///
/// Every `d`-subset spanning a hyperplane is grown to all points on that
/// hyperplane; the result is a facet when every other point lies strictly
/// on one side.
pub fn brute_force_facets(points: &[Vec<f64>]) -> Result<Vec<Vec<usize>>> {
    let d = points.first().map_or(0, Vec::len);
    if d < 2 || d > MAX_DIM {
        return Err(Error::invalid(format!("oracle supports 2 <= d <= {MAX_DIM}, got {d}")));
    }
    if points.len() > MAX_POINTS {
        return Err(Error::invalid(format!(
            "oracle supports at most {MAX_POINTS} points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points of mixed dimension"));
    }
    if points.len() <= d {
        return Err(Error::degenerate("fewer than d + 1 points"));
    }
    let mut facets = BTreeSet::new();
    for subset in combinations(points.len(), d) {
        let p0 = &points[subset[0]];
        let diffs: Vec<Vec<f64>> = subset[1..]
            .iter()
            .map(|&i| points[i].iter().zip(p0).map(|(a, b)| a - b).collect())
            .collect();
        let normal = cross(&diffs, d);
        let nn = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale: f64 = diffs
            .iter()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .product();
        if !(nn > 1e-12 * scale) {
            continue;
        }
        let unit: Vec<f64> = normal.iter().map(|x| x / nn).collect();
        let offset: f64 = unit.iter().zip(p0).map(|(a, b)| a * b).sum();
        let side: Vec<f64> = points
            .iter()
            .map(|x| unit.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - offset)
            .collect();
        let on: Vec<usize> = (0..points.len()).filter(|&i| side[i].abs() <= SIDE_TOL).collect();
        if on.len() == points.len() {
            return Err(Error::degenerate("points lie on one hyperplane"));
        }
        let above = side.iter().any(|&s| s > SIDE_TOL);
        let below = side.iter().any(|&s| s < -SIDE_TOL);
        if above != below {
            facets.insert(on);
        }
    }
    if facets.is_empty() {
        return Err(Error::degenerate("no facets found"));
    }
    Ok(facets.into_iter().collect())
}

/// Facets reported by [`Shape::facets`] as sorted index sets into
/// [`Shape::vertices`], sorted. Vertices are matched by exact coordinates.
pub fn geometry_facet_sets(shape: &Shape) -> Result<Vec<Vec<usize>>> {
    let verts = shape.vertices();
    let mut sets = BTreeSet::new();
    for facet in shape.facets() {
        let mut idx = facet
            .vertices
            .iter()
            .map(|v| {
                verts
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::invalid("facet vertex is not a cell vertex"))
            })
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        sets.insert(idx);
    }
    Ok(sets.into_iter().collect())
}

/// Hit-or-miss volume of `shape` with `n` uniform points from `enclosing`.
/// Returns the estimate and its binomial standard error.
pub fn mc_volume(shape: &Shape, enclosing: &ParamBox, rng: &mut Rng, n: usize) -> Result<(f64, f64)> {
    if n < 1000 {
        return Err(Error::invalid("mc_volume needs at least 1000 samples"));
    }
    let halfspaces = shape.halfspaces()?;
    let tol = 1e-12 * enclosing.diameter();
    let d = enclosing.dim();
    let mut y = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..n {
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = rng.uniform_in(enclosing.lower()[k], enclosing.upper()[k]);
        }
        if halfspaces.classify(&y, tol) != Containment::Outside {
            hits += 1;
        }
    }
    let frac = hits as f64 / n as f64;
    let vol = enclosing.volume();
    let stderr = vol * (frac * (1.0 - frac) / n as f64).sqrt();
    Ok((frac * vol, stderr))
}
