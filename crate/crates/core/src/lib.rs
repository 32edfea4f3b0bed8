//! Split-step quantum walks on `Z²` with a single defective coin at the origin.
//!
//! The walk is `U = S C` on `ℓ²(Z²; C⁴)`, simulated on a finite window with
//! Dirichlet truncation. Besides the operators themselves the crate computes
//! the discrete spectrum outside the essential band through the scalar
//! function `f(λ) = λ + ⟨φ_q, ψ_λ⟩`, threshold resonances, and time evolution.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod lattice;
pub mod operators;
pub mod params;
pub mod quadrature;
pub mod resonance;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{ScalarField, Site, VectorState, WindowSpec};
pub use num_complex::Complex64;
pub use operators::WalkOperator;
pub use params::{CoinParameters, ReferenceSet, StrongShiftParameters, ValidationMode};
pub use quadrature::QuadratureSpec;
