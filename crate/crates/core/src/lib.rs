//! Polytope division and greedy sampling for configuration optimization
//! problems.
//!
//! A configuration optimization problem asks for a finite point set
//! `γ ⊂ P` in a hyperrectangle `P ⊂ ℝ^d` that minimizes a loss. Greedy
//! methods grow `γ` one point at a time by maximizing a pointwise error
//! indicator `J(q, γ)`. This crate provides two such drivers:
//!
//! * [`pdm`]: the polytope division method. The box is split into cells by
//!   facet linking; each step evaluates `J` at cell barycenters, appends the
//!   best barycenter and re-links the selected cell. Every cell is either a
//!   simplex or a boundary polytope `Conv({x₁…xₙ} ∪ F)` over an `n`-fold
//!   sub-face `F` of the box, so facets are known in closed form and every
//!   cell has at most `2d` of them.
//! * [`gsm`]: the greedy sampling baseline over a fixed random or Latin
//!   hypercube sample set.
//!
//! Objectives live in [`objectives`], backed by reduced basis projection
//! ([`rbm`]) and empirical interpolation ([`eim`]).

pub mod division;
pub mod eim;
pub mod error;
pub mod geometry;
pub mod gsm;
pub mod numerics;
pub mod objectives;
pub mod oracle;
pub mod pdm;
pub mod rbm;
pub mod trace;

pub use division::{Division, DivisionReport};
pub use error::{Error, Result};
pub use geometry::{Bound, BoxFace, Cell, CellId, Containment, FacetKind, FacetRef, ParamBox, Shape};
pub use gsm::{GsmConfig, Sampler};
pub use numerics::Rng;
pub use objectives::{Configuration, Objective};
pub use pdm::PdmConfig;
pub use trace::{RunOutcome, RunStatus, StepRecord};
