//! Radial and one-dimensional singular two-point boundary value problems.

mod grid;
mod profile;
mod solver;

pub use grid::{Grading, RadialGrid, MIN_NODES};
pub use profile::{sci, RadialProfile};
pub use solver::{
    comparison_check, solve_h, solve_h_on, solve_radial_dirichlet, solve_radial_dirichlet_from, solve_tridiagonal,
    Discretization, Solution, SolveConfig,
};
