//! Variational time discretization VTD(r,k) for ODE initial value problems.
//!
//! Local problems on each mesh interval combine pointwise derivative coupling
//! with a variational condition evaluated by an interpolatory integrator and an
//! interpolation cascade applied to the right-hand side. All arithmetic runs
//! in extended precision (MPFR, 512 bits by default).

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nodes;
pub mod operators;
pub mod poly;
pub mod precision;
pub mod problem;
pub mod solver;

pub use error::{Result, VtdError};
pub use precision::{BigScalar, Precision};
