use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes from `v` its components along the orthonormal `basis`, using two
/// passes of modified Gram-Schmidt. Returns the norm of what remains.
pub fn orthogonalize_against(basis: &[Vec<f64>], v: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    norm(v)
}

/// Orthonormalizes `vectors` in order. Vectors whose residual after
/// projecting out the previously accepted ones has norm below `drop_tol`
/// are dropped.
pub fn orthonormalize(vectors: &[Vec<f64>], drop_tol: f64) -> Result<Vec<Vec<f64>>> {
    if !(drop_tol > 0.0) {
        return Err(Error::invalid("drop_tol must be positive"));
    }
    let len = vectors.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: v.len(),
            });
        }
        let mut r = v.clone();
        let rn = orthogonalize_against(&out, &mut r);
        if rn < drop_tol {
            continue;
        }
        r.iter_mut().for_each(|x| *x /= rn);
        out.push(r);
    }
    Ok(out)
}

/// Oriented hyperplane `{y : normal · y = offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    /// `normal · y − offset`; the signed distance since `normal` is unit.
    pub fn eval(&self, y: &[f64]) -> f64 {
        dot(&self.normal, y) - self.offset
    }

    pub fn flipped(&self) -> Self {
        Self {
            normal: self.normal.iter().map(|c| -c).collect(),
            offset: -self.offset,
        }
    }
}

/// Hyperplane through exactly `d` affinely independent points of `ℝ^d`.
pub fn hyperplane_through(points: &[Vec<f64>]) -> Result<Hyperplane> {
    let d = points.first().map_or(0, Vec::len);
    if points.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: points.len(),
        });
    }
    hyperplane_fit(points)
}

/// Hyperplane through `m ≥ d` points whose affine hull has dimension `d − 1`.
///
/// The normal spans the null space of the difference vectors `pᵢ − p₀`,
/// found with a column-pivoted Householder QR. Columns whose remaining norm
/// falls below `1e-10 ×` the largest difference norm count as dependent.
pub fn hyperplane_fit(points: &[Vec<f64>]) -> Result<Hyperplane> {
    let d = points.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::invalid("empty point set"));
    }
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if points.len() < d {
        return Err(Error::degenerate(format!(
            "{} points cannot span a hyperplane in dimension {d}",
            points.len()
        )));
    }
    let p0 = &points[0];
    // Columns are the difference vectors; a is d × m.
    let m = points.len() - 1;
    let mut a = Matrix::zeros(d, m);
    for (k, p) in points[1..].iter().enumerate() {
        for i in 0..d {
            a[(i, k)] = p[i] - p0[i];
        }
    }
    let col_norm = |a: &Matrix, j: usize, from: usize| -> f64 {
        (from..d).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt()
    };
    let largest = (0..m).map(|j| col_norm(&a, j, 0)).fold(0.0, f64::max);
    let thresh = 1e-10 * largest;
    if !(largest > 0.0) {
        return Err(Error::degenerate("all points coincide"));
    }

    let mut reflectors: Vec<Vec<f64>> = Vec::new();
    for k in 0..(d - 1).min(m) {
        let (piv, pnorm) = (k..m)
            .map(|j| (j, col_norm(&a, j, k)))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pnorm <= thresh {
            break;
        }
        if piv != k {
            for i in 0..d {
                let tmp = a[(i, k)];
                a[(i, k)] = a[(i, piv)];
                a[(i, piv)] = tmp;
            }
        }
        // Householder vector for rows k..d of column k.
        let alpha = if a[(k, k)] >= 0.0 { -pnorm } else { pnorm };
        let mut v = vec![0.0; d];
        for i in k..d {
            v[i] = a[(i, k)];
        }
        v[k] -= alpha;
        let vn = norm(&v);
        v.iter_mut().for_each(|x| *x /= vn);
        for j in k..m {
            let s: f64 = (k..d).map(|i| v[i] * a[(i, j)]).sum();
            for i in k..d {
                a[(i, j)] -= 2.0 * s * v[i];
            }
        }
        reflectors.push(v);
    }
    let rank = reflectors.len();
    if rank < d - 1 {
        return Err(Error::degenerate(format!(
            "affine hull has dimension {rank}, need {}",
            d - 1
        )));
    }
    let excess = (d - 1..m)
        .map(|j| col_norm(&a, j, d - 1))
        .fold(0.0, f64::max);
    if excess > thresh {
        return Err(Error::degenerate("points are not coplanar"));
    }
    // normal = Q e_{d-1} with Q = H_0 H_1 … H_{r-1}.
    let mut normal = vec![0.0; d];
    normal[d - 1] = 1.0;
    for v in reflectors.iter().rev() {
        let s = dot(v, &normal);
        for (ni, vi) in normal.iter_mut().zip(v) {
            *ni -= 2.0 * s * vi;
        }
    }
    let nn = norm(&normal);
    normal.iter_mut().for_each(|x| *x /= nn);
    let offset = points.iter().map(|p| dot(&normal, p)).sum::<f64>() / points.len() as f64;
    Ok(Hyperplane { normal, offset })
}

/// Determinant by LU with partial pivoting.
pub fn determinant(m: &Matrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        if a[(piv, k)] == 0.0 {
            return Ok(0.0);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let akk = a[(k, k)];
        det *= akk;
        for i in k + 1..n {
            let f = a[(i, k)] / akk;
            for j in k..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    Ok(det)
}

/// `|det(v₁ − v₀, …, v_d − v₀)| / d!`; zero for degenerate simplices.
pub fn simplex_volume(vertices: &[Vec<f64>]) -> Result<f64> {
    let d = vertices.first().map_or(0, Vec::len);
    if vertices.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            got: vertices.len(),
        });
    }
    let v0 = &vertices[0];
    let rows: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
        .collect();
    let det = determinant(&Matrix::from_rows(&rows)?)?;
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    Ok(det.abs() / fact)
}
