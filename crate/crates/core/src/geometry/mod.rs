//! Cells of a polytope division of a hyperrectangle.
//!
//! Refinement by facet linking only ever produces two kinds of cells:
//! simplices and boundary polytopes `Conv({x₁…xₙ} ∪ F)` where `F` is an
//! `n`-fold sub-face of the root box and the apexes `xᵢ` are interior
//! points. Both have facets known in closed form, so no general hull
//! computation is needed.

mod boxes;
mod cell;
mod halfspace;

pub use boxes::{box_facets, face_subfacets, face_vertices, Bound, BoxFace, ParamBox};
pub use cell::{
    barycenter, cell_facets, cell_volume, contains, facet_link, link_box, BoundaryPolytope, Cell,
    CellId, FacetKind, FacetRef, Shape, Simplex,
};
pub use halfspace::{CellHalfspaces, Containment};

/// Default membership tolerance: `1e-9 ×` the box diameter.
pub fn default_tol(root: &ParamBox) -> f64 {
    1e-9 * root.diameter()
}
