//! Constant-mean-curvature graphs: the radial family from its first integral
//! and the two-dimensional Dirichlet problem by damped Newton iteration.

mod banded;
pub mod dirichlet;
pub mod radial;

pub use banded::BandMatrix;
pub use dirichlet::{
    residual, solve_dirichlet_cmc, DirichletSolver, GridHeader, GridSolution, GridSurface,
    ResidualReport, SolverConfig,
};
pub use radial::{solve_radial_cmc, RadialProfile};
