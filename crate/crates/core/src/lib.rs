//! Convexity-constrained variational problems on uniform grids.
//!
//! The convexity constraint is replaced by a finite polyhedral cone of
//! nonnegative directional second differences (or a smaller inner cone that
//! implies discrete convexity), which turns projection, envelope and
//! screening problems into sparse QPs or LPs. Those are solved by an ADMM
//! solver in [`solver`].

pub mod analytic;
pub mod cone;
pub mod error;
pub mod fd;
pub mod grid;
pub mod output;
pub mod problems;
pub mod qp;
pub mod solver;
pub mod sparse;
pub mod stencil;
pub mod targets;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use qp::QpProblem;
pub use solver::{solve, Solution, SolverSettings, Status};
pub use sparse::SparseMatrix;
pub use stencil::StencilSet;
