//! The proper polytope division maintained by the PDM driver.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    default_tol, link_box, Bound, BoxFace, Cell, CellId, Containment, ParamBox, Shape,
};
use crate::numerics::{uniform_sample, Rng};

/// One refinement: `parent` replaced by `children`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineEvent {
    pub parent: CellId,
    pub children: Vec<CellId>,
}

#[derive(Clone, Debug)]
pub struct Division {
    root: Arc<ParamBox>,
    cells: BTreeMap<CellId, Cell>,
    barycenters: BTreeMap<CellId, Vec<f64>>,
    values: BTreeMap<CellId, f64>,
    next_id: u64,
    history: Vec<RefineEvent>,
    tol: f64,
}

/// Outcome of [`Division::check_proper`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisionReport {
    pub volume_sum_rel_err: f64,
    pub mc_points: usize,
    pub uncovered: usize,
    pub multiply_covered_interior: usize,
}

impl DivisionReport {
    pub fn is_proper(&self, volume_tol: f64) -> bool {
        self.uncovered == 0
            && self.multiply_covered_interior == 0
            && self.volume_sum_rel_err <= volume_tol
    }
}

/// Links `p` against the `2d` facets of `root`.
pub fn init_division(root: ParamBox, p: &[f64]) -> Result<Division> {
    Division::new(Arc::new(root), p)
}

impl Division {
    pub fn new(root: Arc<ParamBox>, p: &[f64]) -> Result<Self> {
        let tol = default_tol(&root);
        let shapes = link_box(p, &root, tol)?;
        let mut div = Self::empty(root);
        for shape in shapes {
            div.insert(shape);
        }
        Ok(div)
    }

    fn empty(root: Arc<ParamBox>) -> Self {
        let tol = default_tol(&root);
        Self {
            root,
            cells: BTreeMap::new(),
            barycenters: BTreeMap::new(),
            values: BTreeMap::new(),
            next_id: 0,
            history: Vec::new(),
            tol,
        }
    }

    fn insert(&mut self, shape: Shape) -> CellId {
        let id = CellId(self.next_id);
        self.next_id += 1;
        self.barycenters.insert(id, shape.barycenter());
        self.cells.insert(id, Cell::new(id, shape));
        id
    }

    pub fn root(&self) -> &Arc<ParamBox> {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    /// Membership tolerance used for interiority checks.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells.keys().copied()
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells.get(&id)
    }

    pub fn barycenter(&self, id: CellId) -> Option<&[f64]> {
        self.barycenters.get(&id).map(Vec::as_slice)
    }

    pub fn barycenters(&self) -> &BTreeMap<CellId, Vec<f64>> {
        &self.barycenters
    }

    /// Last objective value recorded per cell; may be stale.
    pub fn values(&self) -> &BTreeMap<CellId, f64> {
        &self.values
    }

    pub fn set_value(&mut self, id: CellId, value: f64) {
        if self.cells.contains_key(&id) {
            self.values.insert(id, value);
        }
    }

    pub fn history(&self) -> &[RefineEvent] {
        &self.history
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Replaces the cell by the facet-linking of its barycenter and returns
    /// the children's ids.
    pub fn refine(&mut self, id: CellId) -> Result<Vec<CellId>> {
        let cell = self.cells.get(&id).ok_or(Error::UnknownCell(id.0))?;
        let bary = &self.barycenters[&id];
        let shapes = cell.shape.link(bary, self.tol)?;
        self.cells.remove(&id);
        self.barycenters.remove(&id);
        self.values.remove(&id);
        let children: Vec<CellId> = shapes.into_iter().map(|s| self.insert(s)).collect();
        self.history.push(RefineEvent {
            parent: id,
            children: children.clone(),
        });
        Ok(children)
    }

    /// Drops a cell without replacing it. Only useful to build broken
    /// divisions for negative tests.
    pub fn remove_cell(&mut self, id: CellId) -> Option<Cell> {
        self.barycenters.remove(&id);
        self.values.remove(&id);
        self.cells.remove(&id)
    }

    pub fn total_volume(&self) -> Result<f64> {
        self.cells.values().map(|c| c.shape.volume()).sum()
    }

    /// Checks coverage and interior disjointness: the volume sum against the
    /// box volume, then `n_samples` uniform points each classified against
    /// every cell at tolerance `1e-9 ×` diameter.
    pub fn check_proper(&self, rng: &mut Rng, n_samples: usize) -> Result<DivisionReport> {
        if n_samples == 0 {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        let box_vol = self.root.volume();
        let volume_sum_rel_err = (self.total_volume()? - box_vol).abs() / box_vol;
        let halfspaces = self
            .cells
            .values()
            .map(|c| c.shape.halfspaces())
            .collect::<Result<Vec<_>>>()?;
        let samples = uniform_sample(rng, n_samples, &self.root);
        let tol = self.tol;
        let (uncovered, multiply_covered_interior) = samples
            .par_iter()
            .map(|y| {
                let mut interior = 0usize;
                let mut touching = 0usize;
                for h in &halfspaces {
                    match h.classify(y, tol) {
                        Containment::Interior => {
                            interior += 1;
                            touching += 1;
                        }
                        Containment::Boundary => touching += 1,
                        Containment::Outside => {}
                    }
                }
                (usize::from(touching == 0), usize::from(interior >= 2))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(DivisionReport {
            volume_sum_rel_err,
            mc_points: n_samples,
            uncovered,
            multiply_covered_interior,
        })
    }

    pub fn to_record(&self, gamma: &[Vec<f64>]) -> DivisionRecord {
        DivisionRecord {
            schema: DIVISION_SCHEMA.to_string(),
            root: (*self.root).clone(),
            next_id: self.next_id,
            gamma: gamma.to_vec(),
            cells: self.cells.values().map(CellRecord::from_cell).collect(),
            meta: None,
        }
    }

    pub fn from_record(rec: &DivisionRecord) -> Result<Self> {
        let root = Arc::new(rec.root.clone());
        let mut div = Self::empty(Arc::clone(&root));
        for c in &rec.cells {
            let shape = c.to_shape(&root)?;
            let id = CellId(c.id);
            if div.cells.contains_key(&id) {
                return Err(Error::invalid(format!("duplicate cell id {}", c.id)));
            }
            div.barycenters.insert(id, shape.barycenter());
            div.cells.insert(id, Cell::new(id, shape));
        }
        let max_id = div.cells.keys().next_back().map_or(0, |id| id.0 + 1);
        div.next_id = rec.next_id.max(max_id);
        Ok(div)
    }
}

pub const DIVISION_SCHEMA: &str = "pdm-division/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Simplex,
    Boundary,
}

/// JSON form of one cell. Simplices are rebuilt from `vertices`, boundary
/// polytopes from `apexes` and `fixed`; `vertices` is always the full list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub id: u64,
    pub kind: CellKind,
    pub vertices: Vec<Vec<f64>>,
    #[serde(default)]
    pub apexes: Vec<Vec<f64>>,
    #[serde(default)]
    pub fixed: BTreeMap<usize, Bound>,
}

impl CellRecord {
    pub fn from_cell(cell: &Cell) -> Self {
        let (kind, apexes, fixed) = match &cell.shape {
            Shape::Simplex(_) => (CellKind::Simplex, Vec::new(), BTreeMap::new()),
            Shape::Boundary(b) => (
                CellKind::Boundary,
                b.apexes().to_vec(),
                b.base().fixed().clone(),
            ),
        };
        Self {
            id: cell.id.0,
            kind,
            vertices: cell.shape.vertices(),
            apexes,
            fixed,
        }
    }

    pub fn to_shape(&self, root: &Arc<ParamBox>) -> Result<Shape> {
        match self.kind {
            CellKind::Simplex => {
                let s = Shape::simplex(self.vertices.clone())?;
                if s.dim() != root.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: root.dim(),
                        got: s.dim(),
                    });
                }
                Ok(s)
            }
            CellKind::Boundary => {
                let base = BoxFace::new(Arc::clone(root), self.fixed.clone())?;
                Shape::pyramid(self.apexes.clone(), base)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisionRecord {
    pub schema: String,
    pub root: ParamBox,
    pub next_id: u64,
    #[serde(default)]
    pub gamma: Vec<Vec<f64>>,
    pub cells: Vec<CellRecord>,
    /// Free-form provenance (seed, resolved config) attached by writers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl DivisionRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("division records serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: Self =
            serde_json::from_str(s).map_err(|e| Error::invalid(format!("division json: {e}")))?;
        if rec.schema != DIVISION_SCHEMA {
            return Err(Error::invalid(format!("unsupported schema {:?}", rec.schema)));
        }
        Ok(rec)
    }
}
