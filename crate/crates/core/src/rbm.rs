//! Snapshot providers (finite-difference heat models) and reduced basis
//! projection.

use std::collections::HashMap;
use std::io::{self, Read, Write};
use std::sync::{Arc, Mutex};

use crate::eim::{EimBasis, GaussianSourceFamily, ParamFunctionFamily};
use crate::error::{Error, Result};
use crate::numerics::{cg_solve, dot, orthogonalize_against};

pub const CG_TOL: f64 = 1e-10;

/// Deterministic map `p ↦ u(p) ∈ ℝ^N`.
pub trait SnapshotProvider: Send + Sync {
    /// Parameter dimension.
    fn param_dim(&self) -> usize;
    /// Snapshot length `N`.
    fn len(&self) -> usize;
    fn snapshot(&self, p: &[f64]) -> Result<Arc<Vec<f64>>>;
    /// Weight `w` of the discrete norm `|u|² = w Σ uᵢ²`.
    fn norm_weight(&self) -> f64 {
        1.0
    }
}

/// Orthonormal (Euclidean) basis of the span of accepted snapshots.
/// Errors are reported in the weighted norm `weight · |·|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedBasis {
    vectors: Vec<Vec<f64>>,
    weight: f64,
}

impl ReducedBasis {
    pub fn new(weight: f64) -> Self {
        Self {
            vectors: Vec::new(),
            weight,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Gram-Schmidt with re-orthogonalization; `u` is dropped when its
    /// residual is below `1e-10 |u|`. Returns whether it was added.
    pub fn extend(&mut self, u: &[f64]) -> Result<bool> {
        if let Some(first) = self.vectors.first() {
            if first.len() != u.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: u.len(),
                });
            }
        }
        let un = dot(u, u).sqrt();
        let mut r = u.to_vec();
        let rn = orthogonalize_against(&self.vectors, &mut r);
        if !(rn >= 1e-10 * un) || rn == 0.0 {
            return Ok(false);
        }
        r.iter_mut().for_each(|x| *x /= rn);
        self.vectors.push(r);
        Ok(true)
    }

    /// `weight · (|u|² − Σ ⟨u, ξ_k⟩²)`, clamped at zero.
    pub fn projection_error_sq(&self, u: &[f64]) -> f64 {
        let total = dot(u, u);
        let captured: f64 = self.vectors.iter().map(|xi| dot(u, xi).powi(2)).sum();
        self.weight * (total - captured).max(0.0)
    }
}

pub fn rb_extend(basis: &ReducedBasis, u: &[f64]) -> Result<ReducedBasis> {
    let mut next = basis.clone();
    next.extend(u)?;
    Ok(next)
}

pub fn projection_error_sq(basis: &ReducedBasis, u: &[f64]) -> f64 {
    basis.projection_error_sq(u)
}

/// Symmetric 5-point operator `Σ_e k_e (u_a − u_b) / h²` on the interior
/// nodes of an `n × n` grid with zero Dirichlet data. Unknowns are ordered
/// x fastest.
#[derive(Clone, Debug)]
pub struct GridOperator {
    n: usize,
    h: f64,
    /// `kx[j * (n - 1) + i]`: edge between nodes `(i, j)` and `(i + 1, j)`.
    kx: Vec<f64>,
    /// `ky[j * n + i]`: edge between nodes `(i, j)` and `(i, j + 1)`.
    ky: Vec<f64>,
}

impl GridOperator {
    pub fn new(n: usize, h: f64, kx: Vec<f64>, ky: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("grid needs at least 3 nodes per axis"));
        }
        if kx.len() != (n - 1) * n || ky.len() != n * (n - 1) {
            return Err(Error::invalid("edge coefficient arrays have the wrong size"));
        }
        Ok(Self { n, h, kx, ky })
    }

    pub fn laplacian(n: usize, h: f64) -> Result<Self> {
        Self::new(n, h, vec![1.0; (n - 1) * n], vec![1.0; n * (n - 1)])
    }

    pub fn unknowns(&self) -> usize {
        (self.n - 2) * (self.n - 2)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn kx(&self, i: usize, j: usize) -> f64 {
        self.kx[j * (self.n - 1) + i]
    }

    fn ky(&self, i: usize, j: usize) -> f64 {
        self.ky[j * self.n + i]
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = self.n - 2;
        let inv_h2 = 1.0 / (self.h * self.h);
        let at = |i: usize, j: usize| -> f64 {
            if i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1 {
                0.0
            } else {
                u[(j - 1) * m + (i - 1)]
            }
        };
        for j in 1..self.n - 1 {
            for i in 1..self.n - 1 {
                let c = at(i, j);
                let s = self.kx(i - 1, j) * (c - at(i - 1, j))
                    + self.kx(i, j) * (c - at(i + 1, j))
                    + self.ky(i, j - 1) * (c - at(i, j - 1))
                    + self.ky(i, j) * (c - at(i, j + 1));
                out[(j - 1) * m + (i - 1)] = s * inv_h2;
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.unknowns() {
            return Err(Error::DimensionMismatch {
                expected: self.unknowns(),
                got: rhs.len(),
            });
        }
        cg_solve(|x, o| self.apply(x, o), rhs, CG_TOL, 20 * self.unknowns() + 100)
    }

    /// `(Σ_e k_e (u_a − u_b)², h² Σ uᵢ)`: the two sides of the discrete
    /// energy identity for a unit right-hand side.
    pub fn energy_terms(&self, u: &[f64]) -> (f64, f64) {
        let m = self.n - 2;
        let at = |i: usize, j: usize| -> f64 {
            if i == 0 || j == 0 || i == self.n - 1 || j == self.n - 1 {
                0.0
            } else {
                u[(j - 1) * m + (i - 1)]
            }
        };
        let mut energy = 0.0;
        for j in 0..self.n {
            for i in 0..self.n - 1 {
                energy += self.kx(i, j) * (at(i + 1, j) - at(i, j)).powi(2);
            }
        }
        for j in 0..self.n - 1 {
            for i in 0..self.n {
                energy += self.ky(i, j) * (at(i, j + 1) - at(i, j)).powi(2);
            }
        }
        (energy, self.h * self.h * u.iter().sum::<f64>())
    }
}

/// Thermal block on `[0,1]²`: 2 rows by `m` columns of blocks, block `i`
/// (zero based) in column `i / 2` and row `i % 2` (row 0 at the bottom),
/// with conductivity `p_i ∈ [1, 10]`; `−∇·(κ∇u) = 1`, `u = 0` on the
/// boundary.
///
/// Conductivity is constant on each grid cell (taken at the cell center);
/// an edge between two nodes carries the mean of the two cells sharing it.
#[derive(Clone, Debug)]
pub struct ThermalBlockModel {
    m: usize,
    n: usize,
}

impl ThermalBlockModel {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("need at least one block column"));
        }
        if n < 3 {
            return Err(Error::invalid("grid needs at least 3 nodes per axis"));
        }
        Ok(Self { m, n })
    }

    /// Model for `d = 2m` parameters.
    pub fn with_params(d: usize, n: usize) -> Result<Self> {
        if d % 2 != 0 {
            return Err(Error::invalid(format!("thermal block needs even d, got {d}")));
        }
        Self::new(d / 2, n)
    }

    pub fn columns(&self) -> usize {
        self.m
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Block index of the point `(x, y)`.
    pub fn block_of(&self, x: f64, y: f64) -> usize {
        let col = ((x * self.m as f64).floor() as usize).min(self.m - 1);
        let row = ((y * 2.0).floor() as usize).min(1);
        2 * col + row
    }

    pub fn operator(&self, p: &[f64]) -> Result<GridOperator> {
        if p.len() != 2 * self.m {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.m,
                got: p.len(),
            });
        }
        if let Some(bad) = p.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("conductivity must be positive, got {bad}")));
        }
        let n = self.n;
        let h = self.h();
        let cells = n - 1;
        let kc: Vec<f64> = (0..cells)
            .flat_map(|j| {
                (0..cells).map(move |i| ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h))
            })
            .map(|(x, y)| p[self.block_of(x, y)])
            .collect();
        let cell = |i: usize, j: usize| kc[j * cells + i];
        // Edges on the outer boundary touch one cell; they never enter the
        // interior operator but keep the arrays rectangular.
        let mut kx = Vec::with_capacity((n - 1) * n);
        for j in 0..n {
            for i in 0..n - 1 {
                let below = if j > 0 { Some(cell(i, j - 1)) } else { None };
                let above = if j < cells { Some(cell(i, j)) } else { None };
                kx.push(mean_of(below, above));
            }
        }
        let mut ky = Vec::with_capacity(n * (n - 1));
        for j in 0..n - 1 {
            for i in 0..n {
                let left = if i > 0 { Some(cell(i - 1, j)) } else { None };
                let right = if i < cells { Some(cell(i, j)) } else { None };
                ky.push(mean_of(left, right));
            }
        }
        GridOperator::new(n, h, kx, ky)
    }

    pub fn solve(&self, p: &[f64]) -> Result<Vec<f64>> {
        let op = self.operator(p)?;
        op.solve(&vec![1.0; op.unknowns()])
    }
}

fn mean_of(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => 0.5 * (x + y),
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => 0.0,
    }
}

pub fn thermal_block_solve(p: &[f64], n: usize) -> Result<Vec<f64>> {
    ThermalBlockModel::with_params(p.len(), n)?.solve(p)
}

impl SnapshotProvider for ThermalBlockModel {
    fn param_dim(&self) -> usize {
        2 * self.m
    }

    fn len(&self) -> usize {
        (self.n - 2) * (self.n - 2)
    }

    fn snapshot(&self, p: &[f64]) -> Result<Arc<Vec<f64>>> {
        self.solve(p).map(Arc::new)
    }

    fn norm_weight(&self) -> f64 {
        self.h() * self.h()
    }
}

/// `−Δu = g(·, p)` on `(−1,1)²` with the Gaussian source and zero
/// Dirichlet data, on an `n × n` node grid.
#[derive(Clone, Debug)]
pub struct GaussianPoissonModel {
    family: GaussianSourceFamily,
    op: GridOperator,
}

impl GaussianPoissonModel {
    pub fn new(n: usize) -> Result<Self> {
        let family = GaussianSourceFamily::new(n)?;
        let op = GridOperator::laplacian(n, 2.0 / (n - 1) as f64)?;
        Ok(Self { family, op })
    }

    pub fn grid_size(&self) -> usize {
        self.family.grid_size()
    }

    pub fn family(&self) -> &GaussianSourceFamily {
        &self.family
    }

    pub fn operator(&self) -> &GridOperator {
        &self.op
    }

    /// Interior entries of a full-grid field.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let n = self.grid_size();
        (1..n - 1)
            .flat_map(|j| (1..n - 1).map(move |i| full[j * n + i]))
            .collect()
    }

    /// Solve with an explicit interior right-hand side.
    pub fn solve_with_rhs(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.op.solve(rhs)
    }

    pub fn solve(&self, p: &[f64]) -> Result<Vec<f64>> {
        let g = self.family.evaluate(p)?;
        self.solve_with_rhs(&self.restrict(&g))
    }
}

pub fn gaussian_poisson_solve(p: &[f64], n: usize) -> Result<Vec<f64>> {
    GaussianPoissonModel::new(n)?.solve(p)
}

impl SnapshotProvider for GaussianPoissonModel {
    fn param_dim(&self) -> usize {
        5
    }

    fn len(&self) -> usize {
        self.op.unknowns()
    }

    fn snapshot(&self, p: &[f64]) -> Result<Arc<Vec<f64>>> {
        self.solve(p).map(Arc::new)
    }

    fn norm_weight(&self) -> f64 {
        self.op.h() * self.op.h()
    }
}

/// Gaussian Poisson snapshots through an EIM approximation of the source:
/// with `g ≈ Σ c_m(p) Q_m`, `u(p) = Σ c_m(p) w_m` where `w_m` solves the
/// Poisson problem with right-hand side `Q_m`. One solve per basis vector
/// up front, then each snapshot costs `M` source evaluations.
#[derive(Clone, Debug)]
pub struct EimAffinePoisson {
    model: GaussianPoissonModel,
    basis: EimBasis,
    lifts: Vec<Vec<f64>>,
}

impl EimAffinePoisson {
    pub fn new(model: GaussianPoissonModel, basis: EimBasis) -> Result<Self> {
        if let Some(n) = basis.n() {
            if n != model.family().len() {
                return Err(Error::DimensionMismatch {
                    expected: model.family().len(),
                    got: n,
                });
            }
        }
        let lifts = basis
            .q
            .iter()
            .map(|q| model.solve_with_rhs(&model.restrict(q)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            basis,
            lifts,
        })
    }

    pub fn basis(&self) -> &EimBasis {
        &self.basis
    }
}

impl SnapshotProvider for EimAffinePoisson {
    fn param_dim(&self) -> usize {
        5
    }

    fn len(&self) -> usize {
        self.model.len()
    }

    fn snapshot(&self, p: &[f64]) -> Result<Arc<Vec<f64>>> {
        let at_i = self.model.family().evaluate_at(p, &self.basis.indices)?;
        let c = self.basis.coefficients(&at_i)?;
        let mut u = vec![0.0; self.len()];
        for (cm, w) in c.iter().zip(&self.lifts) {
            for (ui, wi) in u.iter_mut().zip(w) {
                *ui += cm * wi;
            }
        }
        Ok(Arc::new(u))
    }

    fn norm_weight(&self) -> f64 {
        self.model.norm_weight()
    }
}

fn key_of(p: &[f64]) -> Vec<u64> {
    p.iter().map(|x| x.to_bits()).collect()
}

/// Memoizes snapshots by the exact bits of `p`.
pub struct CachedProvider<P> {
    inner: P,
    cache: Mutex<HashMap<Vec<u64>, Arc<Vec<f64>>>>,
}

impl<P: SnapshotProvider> CachedProvider<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn cached(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl<P: SnapshotProvider> SnapshotProvider for CachedProvider<P> {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }

    fn len(&self) -> usize {
        self.inner.len()
    }

    fn snapshot(&self, p: &[f64]) -> Result<Arc<Vec<f64>>> {
        let key = key_of(p);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let u = self.inner.snapshot(p)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&u));
        Ok(u)
    }

    fn norm_weight(&self) -> f64 {
        self.inner.norm_weight()
    }
}

/// Writes snapshots as a little-endian `u64` length `N` followed by the
/// row-major `f64` entries.
pub fn write_snapshots<W: Write>(mut out: W, snapshots: &[Vec<f64>]) -> io::Result<()> {
    let n = snapshots.first().map_or(0, Vec::len);
    if snapshots.iter().any(|s| s.len() != n) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "ragged snapshots"));
    }
    out.write_all(&(n as u64).to_le_bytes())?;
    for s in snapshots {
        for v in s {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshots<R: Read>(mut input: R) -> io::Result<Vec<Vec<f64>>> {
    let mut head = [0u8; 8];
    input.read_exact(&mut head)?;
    let n = u64::from_le_bytes(head) as usize;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if n == 0 {
        return if bytes.is_empty() {
            Ok(Vec::new())
        } else {
            Err(io::Error::new(io::ErrorKind::InvalidData, "data after empty header"))
        };
    }
    if bytes.len() % (8 * n) != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "truncated snapshot file"));
    }
    Ok(bytes
        .chunks_exact(8 * n)
        .map(|row| {
            row.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}
