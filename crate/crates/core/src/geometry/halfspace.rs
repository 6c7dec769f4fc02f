use crate::error::{Error, Result};
use crate::numerics::{hyperplane_fit, Hyperplane};

use super::cell::Shape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Containment {
    Interior,
    Boundary,
    Outside,
}

/// Facet halfspaces `c · y ≤ c₀` of a cell plus its bounding box, for
/// repeated membership queries.
#[derive(Clone, Debug)]
pub struct CellHalfspaces {
    planes: Vec<Hyperplane>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl CellHalfspaces {
    /// Fits one hyperplane per facet vertex list and orients it so the cell
    /// barycenter lies on the negative side.
    pub fn of(shape: &Shape) -> Result<Self> {
        let bary = shape.barycenter();
        let (lo, hi) = shape.bounding_box();
        let scale: f64 = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut planes = Vec::new();
        for facet in shape.facets() {
            let h = hyperplane_fit(&facet.vertices)?;
            let s = h.eval(&bary);
            if s.abs() <= 1e-14 * scale {
                return Err(Error::degenerate("barycenter lies on a facet hyperplane"));
            }
            planes.push(if s > 0.0 { h.flipped() } else { h });
        }
        Ok(Self { planes, lo, hi })
    }

    pub fn planes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn classify(&self, y: &[f64], tol: f64) -> Containment {
        let outside_bbox = y
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .any(|(v, (l, h))| *v < l - tol || *v > h + tol);
        if outside_bbox {
            return Containment::Outside;
        }
        let worst = self
            .planes
            .iter()
            .map(|h| h.eval(y))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > tol {
            Containment::Outside
        } else if worst < -tol {
            Containment::Interior
        } else {
            Containment::Boundary
        }
    }
}
