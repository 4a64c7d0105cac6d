//! First-order solvers for convex composite quadratic programs and convex
//! quadratic semidefinite programs, attacked through their duals.
//!
//! The crate provides
//!
//! - [`admm`]: the modified three-block ADMM, its relaxed generalization and the
//!   directly extended three-block ADMM baseline;
//! - [`splitting`]: the three-operator fixed-point iteration that the modified
//!   ADMM's shadow sequence follows;
//! - [`diagnostics`]: KKT residuals, the augmented Lagrangian and an
//!   equivalence checker that runs an ADMM and the splitting iteration side by side;
//! - [`problem`] and [`symcore`]: problem data, proximal maps and dense
//!   symmetric-matrix primitives.

pub mod admm;
pub mod diagnostics;
pub mod error;
pub mod problem;
pub mod splitting;
pub mod symcore;

pub use error::{Error, Result};
