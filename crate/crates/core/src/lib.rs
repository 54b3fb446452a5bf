//! Finite-element and asymptotic laboratory for stress concentration between
//! two rigid inclusions in a linear elastic matrix.
//!
//! The displacement is assembled from cell problems,
//! u = Σ C₁ᵅ v₁ᵅ + Σ C₂ᵅ v₂ᵅ + v₃, with the constants fixed by the
//! force and moment balance on each inclusion. The crate measures how
//! ‖∇u‖ grows as the separation ε shrinks and compares the exponents with
//! closed-form rate tables and quadrature oracles.

// Parameter checks use `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod decomposition;
pub mod elasticity;
mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod par;

pub use error::{Error, Result};
