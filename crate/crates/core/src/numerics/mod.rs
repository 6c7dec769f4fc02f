//! Dense linear algebra, conjugate gradients, seeded randomness and
//! space-filling samplers.

mod cg;
mod linalg;
mod rng;
mod sampling;

pub use cg::cg_solve;
pub use linalg::{
    determinant, dot, hyperplane_fit, hyperplane_through, norm, orthogonalize_against,
    orthonormalize, simplex_volume, Hyperplane, Matrix,
};
pub use rng::Rng;
pub use sampling::{lhs_sample, uniform_sample};
