use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{orthogonalize_against, simplex_volume};

use super::boxes::{box_facets, BoxFace, ParamBox};
use super::halfspace::{CellHalfspaces, Containment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u64);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let d = vertices.first().map_or(0, Vec::len);
        if d == 0 || vertices.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                got: vertices.len(),
            });
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            });
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
}

/// `Conv({x₁…xₙ} ∪ F)` with `F` a depth-`n` face of the root box. Apexes are
/// kept oldest first.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPolytope {
    apexes: Vec<Vec<f64>>,
    base: BoxFace,
}

impl BoundaryPolytope {
    pub fn apexes(&self) -> &[Vec<f64>] {
        &self.apexes
    }

    pub fn base(&self) -> &BoxFace {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.apexes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Simplex(Simplex),
    Boundary(BoundaryPolytope),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FacetKind {
    /// The base face itself; the facet obtained by dropping the only apex.
    BaseFace(BoxFace),
    /// Drop apex `i` (boundary polytopes with two or more apexes).
    DropApex(usize),
    /// All apexes over a facet `G` of the base.
    SubFace(BoxFace),
    /// Drop vertex `j` of a simplex.
    DropVertex(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FacetRef {
    pub kind: FacetKind,
    pub vertices: Vec<Vec<f64>>,
}

impl Shape {
    /// `Conv(apexes ∪ base)`, stored as a simplex whenever the vertex count
    /// is `d + 1` (base is an edge or a vertex).
    pub fn pyramid(apexes: Vec<Vec<f64>>, base: BoxFace) -> Result<Shape> {
        let d = base.dim();
        let n = base.depth();
        if apexes.len() != n {
            return Err(Error::invalid(format!(
                "boundary polytope over a depth-{n} face needs {n} apexes, got {}",
                apexes.len()
            )));
        }
        if n == 0 {
            return Err(Error::invalid("base must be a proper face of the box"));
        }
        if let Some(a) = apexes.iter().find(|a| a.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.len(),
            });
        }
        if n + base.vertex_count() == d + 1 {
            let mut vertices = apexes;
            vertices.extend(base.vertices());
            Ok(Shape::Simplex(Simplex { vertices }))
        } else {
            Ok(Shape::Boundary(BoundaryPolytope { apexes, base }))
        }
    }

    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Shape> {
        Simplex::new(vertices).map(Shape::Simplex)
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Simplex(s) => s.vertices[0].len(),
            Shape::Boundary(b) => b.base.dim(),
        }
    }

    pub fn is_simplex(&self) -> bool {
        matches!(self, Shape::Simplex(_))
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            Shape::Simplex(s) => s.vertices.len(),
            Shape::Boundary(b) => b.apexes.len() + b.base.vertex_count(),
        }
    }

    /// Full vertex list: apexes first, then base corners in lexicographic
    /// order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Shape::Simplex(s) => s.vertices.clone(),
            Shape::Boundary(b) => {
                let mut v = b.apexes.clone();
                v.extend(b.base.vertices());
                v
            }
        }
    }

    /// Mean of all vertices. Base corners enter through the face center,
    /// which is their mean.
    pub fn barycenter(&self) -> Vec<f64> {
        match self {
            Shape::Simplex(s) => {
                let k = s.vertices.len() as f64;
                let mut c = vec![0.0; s.vertices[0].len()];
                for v in &s.vertices {
                    for (ci, vi) in c.iter_mut().zip(v) {
                        *ci += vi;
                    }
                }
                c.iter_mut().for_each(|x| *x /= k);
                c
            }
            Shape::Boundary(b) => {
                let corners = b.base.vertex_count() as f64;
                let total = corners + b.apexes.len() as f64;
                let mut c: Vec<f64> = b.base.center().iter().map(|x| x * corners).collect();
                for a in &b.apexes {
                    for (ci, ai) in c.iter_mut().zip(a) {
                        *ci += ai;
                    }
                }
                c.iter_mut().for_each(|x| *x /= total);
                c
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        let mut grow = |p: &[f64]| {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        };
        match self {
            Shape::Simplex(s) => s.vertices.iter().for_each(|v| grow(v)),
            Shape::Boundary(b) => {
                b.apexes.iter().for_each(|v| grow(v));
                let (flo, fhi): (Vec<f64>, Vec<f64>) = (0..d).map(|a| b.base.extent(a)).unzip();
                grow(&flo);
                grow(&fhi);
            }
        }
        (lo, hi)
    }

    /// Closed-form facets. Simplices: drop one vertex each. Boundary
    /// polytopes: drop one apex each (the base face itself when there is a
    /// single apex), then all apexes over each facet of the base.
    pub fn facets(&self) -> Vec<FacetRef> {
        match self {
            Shape::Simplex(s) => (0..s.vertices.len())
                .map(|j| FacetRef {
                    kind: FacetKind::DropVertex(j),
                    vertices: s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, v)| v.clone())
                        .collect(),
                })
                .collect(),
            Shape::Boundary(b) => {
                let n = b.apexes.len();
                let corners = b.base.vertices();
                let mut out = Vec::with_capacity(n + 2 * b.base.face_dim());
                if n == 1 {
                    out.push(FacetRef {
                        kind: FacetKind::BaseFace(b.base.clone()),
                        vertices: corners,
                    });
                } else {
                    for i in 0..n {
                        let mut vertices: Vec<Vec<f64>> = b
                            .apexes
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != i)
                            .map(|(_, v)| v.clone())
                            .collect();
                        vertices.extend(corners.iter().cloned());
                        out.push(FacetRef {
                            kind: FacetKind::DropApex(i),
                            vertices,
                        });
                    }
                }
                for g in b.base.subfacets().expect("stored bases are never vertices") {
                    let mut vertices = b.apexes.clone();
                    vertices.extend(g.vertices());
                    out.push(FacetRef {
                        kind: FacetKind::SubFace(g),
                        vertices,
                    });
                }
                out
            }
        }
    }

    /// Volume. Boundary polytopes use the pyramid rule one apex at a time:
    /// `vol(Conv(xⱼ ∪ L)) = vol(L) · dist(xⱼ, aff L) / dim`, starting from
    /// the measure of the base face.
    pub fn volume(&self) -> Result<f64> {
        match self {
            Shape::Simplex(s) => simplex_volume(&s.vertices),
            Shape::Boundary(b) => {
                let center = b.base.center();
                let d = b.base.dim();
                let mut directions: Vec<Vec<f64>> = b
                    .base
                    .free_axes()
                    .map(|a| {
                        let mut e = vec![0.0; d];
                        e[a] = 1.0;
                        e
                    })
                    .collect();
                let mut vol = b.base.measure();
                let mut k = b.base.face_dim();
                for apex in &b.apexes {
                    let mut r: Vec<f64> = apex.iter().zip(&center).map(|(x, c)| x - c).collect();
                    let height = orthogonalize_against(&directions, &mut r);
                    k += 1;
                    vol *= height / k as f64;
                    if height > 0.0 {
                        r.iter_mut().for_each(|x| *x /= height);
                        directions.push(r);
                    }
                }
                Ok(vol)
            }
        }
    }

    pub fn halfspaces(&self) -> Result<CellHalfspaces> {
        CellHalfspaces::of(self)
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> Result<Containment> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        Ok(self.halfspaces()?.classify(point, tol))
    }

    /// `FL(p, self)`: one child `Conv(p ∪ facet)` per facet. `p` must be
    /// strictly interior.
    pub fn link(&self, p: &[f64], tol: f64) -> Result<Vec<Shape>> {
        if self.contains(p, tol)? != Containment::Interior {
            return Err(Error::NotInterior(format!("{p:?}")));
        }
        match self {
            Shape::Simplex(s) => (0..s.vertices.len())
                .map(|j| {
                    let mut vertices: Vec<Vec<f64>> = s
                        .vertices
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, v)| v.clone())
                        .collect();
                    vertices.push(p.to_vec());
                    Ok(Shape::Simplex(Simplex { vertices }))
                })
                .collect(),
            Shape::Boundary(b) => {
                let n = b.apexes.len();
                let mut children = Vec::with_capacity(n + 2 * b.base.face_dim());
                for i in 0..n {
                    let mut apexes: Vec<Vec<f64>> = b
                        .apexes
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i)
                        .map(|(_, v)| v.clone())
                        .collect();
                    apexes.push(p.to_vec());
                    children.push(Shape::pyramid(apexes, b.base.clone())?);
                }
                for g in b.base.subfacets()? {
                    let mut apexes = b.apexes.clone();
                    apexes.push(p.to_vec());
                    children.push(Shape::pyramid(apexes, g)?);
                }
                Ok(children)
            }
        }
    }
}

/// One element of a polytope division.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub shape: Shape,
}

impl Cell {
    pub fn new(id: CellId, shape: Shape) -> Self {
        Self { id, shape }
    }
}

pub fn cell_facets(cell: &Cell) -> Vec<FacetRef> {
    cell.shape.facets()
}

pub fn barycenter(cell: &Cell) -> Vec<f64> {
    cell.shape.barycenter()
}

/// Volume of a cell; errors when it is at most `1e-14 ×` the root volume.
pub fn cell_volume(cell: &Cell, root: &ParamBox) -> Result<f64> {
    let v = cell.shape.volume()?;
    if v <= 1e-14 * root.volume() {
        return Err(Error::degenerate(format!("cell {} has volume {v:e}", cell.id)));
    }
    Ok(v)
}

pub fn contains(cell: &Cell, point: &[f64], tol: f64) -> Result<Containment> {
    cell.shape.contains(point, tol)
}

/// Facet-links `p` against `cell`, numbering the children from `next_id`.
pub fn facet_link(p: &[f64], cell: &Cell, tol: f64, next_id: &mut u64) -> Result<Vec<Cell>> {
    Ok(cell
        .shape
        .link(p, tol)?
        .into_iter()
        .map(|shape| {
            let id = CellId(*next_id);
            *next_id += 1;
            Cell { id, shape }
        })
        .collect())
}

/// Facet-links an interior point against the root box: `Conv(p ∪ F)` for
/// each of the `2d` box facets in [`box_facets`] order.
pub fn link_box(p: &[f64], root: &Arc<ParamBox>, tol: f64) -> Result<Vec<Shape>> {
    if p.len() != root.dim() {
        return Err(Error::DimensionMismatch {
            expected: root.dim(),
            got: p.len(),
        });
    }
    if !root.contains_strictly(p, tol) {
        return Err(Error::NotInterior(format!("{p:?}")));
    }
    box_facets(root)
        .into_iter()
        .map(|f| Shape::pyramid(vec![p.to_vec()], f))
        .collect()
}
