//! Numerical laboratory for singular semilinear elliptic problems
//! `-Δu = φ(δ_K(x)) f(u)` in exterior domains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bvp1d;
pub mod cli;
pub mod construct;
pub mod error;
pub mod funcs;
pub mod problem;
pub mod quad;

pub use error::{LabError, Result};
