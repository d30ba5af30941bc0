//! Mean curvature estimates for graph hypersurfaces in Lorentz-Minkowski space.
//!
//! A graph `x_{n+1} = psi(u)` over `R^n` is described by an [`expr::Expression`]
//! and differentiated exactly with second-order forward jets. [`geometry`]
//! classifies points and computes curvature, [`analysis`] checks the integral
//! identity and the mean curvature bounds on balls, and [`solvers`] produces
//! numerical constant-mean-curvature graphs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Numeric kernels index several arrays in lockstep.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod solvers;

pub use error::{Error, Result};
pub use expr::{Expression, Jet};
pub use geometry::{CausalType, GraphSurface, HeightField};
