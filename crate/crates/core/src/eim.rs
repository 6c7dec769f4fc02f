//! Empirical interpolation: greedy basis with magic points.
//!
//! Each accepted snapshot contributes the residual of the current
//! interpolant, scaled to 1 at its largest entry (the new magic point). The
//! interpolation matrix `B[k][m] = Q_m[I_k]` is then unit lower-triangular.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual entries at most this fraction of `|snapshot|_∞` are treated as
/// numerically dependent.
pub const REJECT_REL: f64 = 1e-12;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EimBasis {
    /// Basis vectors `Q_m`, each of length `N`.
    pub q: Vec<Vec<f64>>,
    /// Magic point indices `I_m` into `0..N`.
    pub indices: Vec<usize>,
    /// Row `k` holds `B[k][0..=k]`.
    pub b: Vec<Vec<f64>>,
}

impl EimBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Length `N` of the basis vectors; `None` while empty.
    pub fn n(&self) -> Option<usize> {
        self.q.first().map(Vec::len)
    }

    /// Coefficients `c` with `B c = values_at_i` by forward substitution.
    pub fn coefficients(&self, values_at_i: &[f64]) -> Result<Vec<f64>> {
        if values_at_i.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values_at_i.len(),
            });
        }
        let mut c = Vec::with_capacity(self.len());
        for (k, row) in self.b.iter().enumerate() {
            let s: f64 = row[..k].iter().zip(&c).map(|(bkm, cm)| bkm * cm).sum();
            c.push(values_at_i[k] - s);
        }
        Ok(c)
    }

    /// `Σ c_m Q_m` for the coefficients interpolating `values_at_i`.
    pub fn apply(&self, values_at_i: &[f64], n: usize) -> Result<Vec<f64>> {
        let c = self.coefficients(values_at_i)?;
        let mut out = vec![0.0; n];
        for (cm, qm) in c.iter().zip(&self.q) {
            if qm.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: qm.len(),
                });
            }
            for (o, v) in out.iter_mut().zip(qm) {
                *o += cm * v;
            }
        }
        Ok(out)
    }

    /// Interpolant of a full snapshot (only its values at the magic points
    /// are used).
    pub fn interpolate(&self, snapshot: &[f64]) -> Result<Vec<f64>> {
        let at_i: Vec<f64> = self.indices.iter().map(|&i| snapshot[i]).collect();
        self.apply(&at_i, snapshot.len())
    }

    /// Tries to add `snapshot`; returns whether it was accepted.
    pub fn extend(&mut self, snapshot: &[f64]) -> Result<bool> {
        if let Some(n) = self.n() {
            if snapshot.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: snapshot.len(),
                });
            }
        }
        if snapshot.is_empty() {
            return Err(Error::invalid("empty snapshot"));
        }
        let approx = self.interpolate(snapshot)?;
        let r: Vec<f64> = snapshot.iter().zip(&approx).map(|(s, a)| s - a).collect();
        let mut i_star = 0;
        for (i, v) in r.iter().enumerate() {
            if v.abs() > r[i_star].abs() {
                i_star = i;
            }
        }
        let scale = snapshot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pivot = r[i_star];
        if !(pivot.abs() > REJECT_REL * scale) {
            return Ok(false);
        }
        let qnew: Vec<f64> = r.iter().map(|v| v / pivot).collect();
        // New row k: B[k][m] = Q_m[i*]; new column entries B[j][k] = Q_k[I_j]
        // vanish because the residual is zero at earlier magic points.
        let mut row: Vec<f64> = self.q.iter().map(|qm| qm[i_star]).collect();
        row.push(1.0);
        self.q.push(qnew);
        self.indices.push(i_star);
        self.b.push(row);
        Ok(true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("eim basis serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::invalid(format!("eim basis json: {e}")))
    }
}

pub fn eim_extend(basis: &EimBasis, snapshot: &[f64]) -> Result<(EimBasis, bool)> {
    let mut next = basis.clone();
    let accepted = next.extend(snapshot)?;
    Ok((next, accepted))
}

pub fn eim_apply(basis: &EimBasis, values_at_i: &[f64], n: usize) -> Result<Vec<f64>> {
    basis.apply(values_at_i, n)
}

/// Bivariate normal density with mean `(μ₁, μ₂)`, standard deviations
/// `(σ₁, σ₂)` and correlation `ρ`, for `p = (μ₁, μ₂, σ₁, σ₂, ρ)`.
pub fn gaussian_source(x: [f64; 2], p: &[f64]) -> Result<f64> {
    if p.len() != 5 {
        return Err(Error::DimensionMismatch {
            expected: 5,
            got: p.len(),
        });
    }
    let (mu1, mu2, s1, s2, rho) = (p[0], p[1], p[2], p[3], p[4]);
    if !(rho.abs() < 1.0) {
        return Err(Error::invalid(format!("|rho| must be < 1, got {rho}")));
    }
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::invalid("sigmas must be positive"));
    }
    let one_m = 1.0 - rho * rho;
    let norm = 1.0 / (2.0 * PI * s1 * s2 * one_m.sqrt());
    let z1 = (x[0] - mu1) / s1;
    let z2 = (x[1] - mu2) / s2;
    let q = z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2;
    Ok(norm * (-q / (2.0 * one_m)).exp())
}

/// A map `p ↦ s(p) ∈ ℝ^N` over a fixed spatial grid.
pub trait ParamFunctionFamily: Send + Sync {
    fn len(&self) -> usize;
    fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>>;

    /// Values at selected grid indices only.
    fn evaluate_at(&self, p: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
        let full = self.evaluate(p)?;
        Ok(indices.iter().map(|&i| full[i]).collect())
    }
}

/// The Gaussian heat source sampled on a uniform `n × n` node grid over
/// `[-1, 1]²`, boundary nodes included, x fastest.
#[derive(Clone, Debug)]
pub struct GaussianSourceFamily {
    n: usize,
    points: Vec<[f64; 2]>,
}

impl GaussianSourceFamily {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("grid needs at least 3 nodes per axis"));
        }
        let h = 2.0 / (n - 1) as f64;
        let points = (0..n)
            .flat_map(|j| (0..n).map(move |i| [-1.0 + i as f64 * h, -1.0 + j as f64 * h]))
            .collect();
        Ok(Self { n, points })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }
}

impl ParamFunctionFamily for GaussianSourceFamily {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn evaluate(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.points.iter().map(|&x| gaussian_source(x, p)).collect()
    }

    fn evaluate_at(&self, p: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
        indices
            .iter()
            .map(|&i| gaussian_source(self.points[i], p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn first_extension() {
        let s = vec![0.5, -2.0, 1.0];
        let (b, ok) = eim_extend(&EimBasis::new(), &s).unwrap();
        assert!(ok);
        assert_eq!(b.indices, vec![1]);
        assert_eq!(b.q[0], vec![-0.25, 1.0, -0.5]);
        assert_eq!(b.b, vec![vec![1.0]]);
    }

    #[test]
    fn dependent_snapshot_rejected() {
        let mut b = EimBasis::new();
        b.extend(&[1.0, 0.0, 2.0, 1.0]).unwrap();
        b.extend(&[0.0, 1.0, 1.0, 3.0]).unwrap();
        let combo: Vec<f64> = b.q[0].iter().zip(&b.q[1]).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        assert!(!b.extend(&combo).unwrap());
        assert_eq!(b.len(), 2);
        assert!(!EimBasis::new().extend(&[0.0, 0.0]).unwrap());
    }

    #[test]
    fn extension_reproduces_snapshot() {
        let mut b = EimBasis::new();
        let snaps = [
            vec![1.0, 0.3, -0.2, 0.7, 0.1],
            vec![0.2, 1.1, 0.4, -0.5, 0.9],
            vec![-0.3, 0.2, 0.8, 0.1, 0.6],
        ];
        for s in &snaps {
            assert!(b.extend(s).unwrap());
            let r: Vec<f64> = s.iter().zip(b.interpolate(s).unwrap()).map(|(a, c)| a - c).collect();
            assert!(sup(&r) <= 1e-10);
        }
    }

    #[test]
    fn apply_cases() {
        let empty = EimBasis::new();
        assert_eq!(eim_apply(&empty, &[], 3).unwrap(), vec![0.0; 3]);
        let mut b = EimBasis::new();
        b.extend(&[2.0, 4.0, 1.0]).unwrap();
        assert_eq!(eim_apply(&b, &[3.0], 3).unwrap(), vec![1.5, 3.0, 0.75]);
        b.extend(&[1.0, 0.0, 5.0]).unwrap();
        let vals = [0.7, -1.3];
        let out = eim_apply(&b, &vals, 3).unwrap();
        for (k, &i) in b.indices.iter().enumerate() {
            assert_abs_diff_eq!(out[i], vals[k], epsilon = 1e-12);
        }
        assert!(eim_apply(&b, &[1.0], 3).is_err());
    }

    #[test]
    fn gaussian_at_center() {
        let g = gaussian_source([0.0, 0.0], &[0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(g, 1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(g, 0.1591549, epsilon = 1e-7);
    }

    #[test]
    fn gaussian_point_symmetry() {
        let p = [0.3, -0.4, 1.5, 2.5, 0.6];
        let a = gaussian_source([0.3 + 0.7, -0.4 - 0.2], &p).unwrap();
        let b = gaussian_source([0.3 - 0.7, -0.4 + 0.2], &p).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        assert!(gaussian_source([0.0, 0.0], &[0.0, 0.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn gaussian_integrates_to_one() {
        // Midpoint rule on [-30, 30]² with σ up to 3 and |ρ| = 0.8.
        let p = [0.5, -0.5, 3.0, 1.0, -0.8];
        let (lo, hi, m) = (-30.0, 30.0, 1200usize);
        let h = (hi - lo) / m as f64;
        let mut total = 0.0;
        for j in 0..m {
            for i in 0..m {
                let x = [lo + (i as f64 + 0.5) * h, lo + (j as f64 + 0.5) * h];
                total += gaussian_source(x, &p).unwrap();
            }
        }
        assert_abs_diff_eq!(total * h * h, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn json_roundtrip() {
        let mut b = EimBasis::new();
        b.extend(&[1.0, 2.0, 3.0]).unwrap();
        b.extend(&[3.0, 1.0, 0.5]).unwrap();
        assert_eq!(EimBasis::from_json(&b.to_json()).unwrap(), b);
    }
}
