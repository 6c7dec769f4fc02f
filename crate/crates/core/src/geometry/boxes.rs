use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned hyperrectangle `[l₁,u₁] × ⋯ × [l_d,u_d]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct ParamBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for ParamBox {
    type Error = Error;

    fn try_from(raw: RawBox) -> Result<Self> {
        ParamBox::new(raw.lower, raw.upper)
    }
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::invalid("box must have at least one axis"));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::invalid(format!(
                    "axis {i}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    /// `[0, 1]^d`.
    pub fn unit(d: usize) -> Self {
        Self::cube(d, 0.0, 1.0).expect("unit box")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn bound(&self, axis: usize, b: Bound) -> f64 {
        match b {
            Bound::Lower => self.lower[axis],
            Bound::Upper => self.upper[axis],
        }
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i)).product()
    }

    pub fn contains_closed(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| l <= x && x <= u)
    }

    /// Every coordinate at least `tol` away from both bounds.
    pub fn contains_strictly(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *x > l + tol && *x < u - tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

/// A face of the root box: the axes in `fixed` are pinned to one of their
/// bounds, the rest are free. Depth `n = |fixed|`; the face has dimension
/// `d − n` and `2^(d−n)` corners.
#[derive(Clone, Debug)]
pub struct BoxFace {
    root: Arc<ParamBox>,
    fixed: BTreeMap<usize, Bound>,
}

impl PartialEq for BoxFace {
    fn eq(&self, other: &Self) -> bool {
        self.fixed == other.fixed && (Arc::ptr_eq(&self.root, &other.root) || self.root == other.root)
    }
}

impl BoxFace {
    /// The whole box as a depth-0 face.
    pub fn whole(root: Arc<ParamBox>) -> Self {
        Self {
            root,
            fixed: BTreeMap::new(),
        }
    }

    pub fn new(root: Arc<ParamBox>, fixed: BTreeMap<usize, Bound>) -> Result<Self> {
        if let Some((&axis, _)) = fixed.iter().find(|(&a, _)| a >= root.dim()) {
            return Err(Error::invalid(format!(
                "axis {axis} out of range for dimension {}",
                root.dim()
            )));
        }
        Ok(Self { root, fixed })
    }

    pub fn root(&self) -> &Arc<ParamBox> {
        &self.root
    }

    pub fn fixed(&self) -> &BTreeMap<usize, Bound> {
        &self.fixed
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn depth(&self) -> usize {
        self.fixed.len()
    }

    pub fn face_dim(&self) -> usize {
        self.dim() - self.depth()
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.face_dim()
    }

    pub fn free_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |a| !self.fixed.contains_key(a))
    }

    /// Range of the face along `axis`.
    pub fn extent(&self, axis: usize) -> (f64, f64) {
        match self.fixed.get(&axis) {
            Some(&b) => {
                let v = self.root.bound(axis, b);
                (v, v)
            }
            None => (self.root.lower()[axis], self.root.upper()[axis]),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| {
                let (lo, hi) = self.extent(a);
                0.5 * (lo + hi)
            })
            .collect()
    }

    /// `(d − n)`-dimensional measure: product of the free-axis widths.
    pub fn measure(&self) -> f64 {
        self.free_axes().map(|a| self.root.width(a)).product()
    }

    pub fn subfacets(&self) -> Result<Vec<BoxFace>> {
        face_subfacets(self)
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        face_vertices(self)
    }

    pub(crate) fn with_pinned(&self, axis: usize, b: Bound) -> BoxFace {
        let mut fixed = self.fixed.clone();
        fixed.insert(axis, b);
        BoxFace {
            root: Arc::clone(&self.root),
            fixed,
        }
    }
}

/// The `2d` facets of the box, axis ascending with the lower bound first.
pub fn box_facets(root: &Arc<ParamBox>) -> Vec<BoxFace> {
    face_subfacets(&BoxFace::whole(Arc::clone(root))).expect("a box of dimension ≥ 1 has facets")
}

/// Facets of a face: one per free axis and bound, in the same order as
/// [`box_facets`].
pub fn face_subfacets(face: &BoxFace) -> Result<Vec<BoxFace>> {
    if face.depth() >= face.dim() {
        return Err(Error::invalid("a vertex has no facets"));
    }
    Ok(face
        .free_axes()
        .flat_map(|a| [face.with_pinned(a, Bound::Lower), face.with_pinned(a, Bound::Upper)])
        .collect())
}

/// Corners of a face in lexicographic order.
pub fn face_vertices(face: &BoxFace) -> Vec<Vec<f64>> {
    let free: Vec<usize> = face.free_axes().collect();
    let k = free.len();
    let base: Vec<f64> = (0..face.dim()).map(|a| face.extent(a).0).collect();
    (0..1usize << k)
        .map(|mask| {
            let mut v = base.clone();
            for (bit, &axis) in free.iter().enumerate() {
                // The first free axis is the most significant.
                if mask >> (k - 1 - bit) & 1 == 1 {
                    v[axis] = face.root.upper()[axis];
                }
            }
            v
        })
        .collect()
}
