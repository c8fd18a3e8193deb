//! Fidelity of EPR-pair distillation under k-extendible maps.
//!
//! The crate evaluates `F_k(ρ) = sup{α : λ_min(Ŝ_k(ρ^T ⊗ (αI − Φ⁺) ⊗ I)) < 0}`
//! with dense, matrix-free and symmetry-reduced backends, builds explicit
//! measure-and-prepare strategies reaching `F = 1`, and provides the closed
//! forms known for Werner states.

pub mod error;
pub mod io;
pub mod linalg;
pub mod solver;
pub mod states;
pub mod werner;

pub use error::{Error, Result};
pub use linalg::{Dense, HermitianOperator, SystemLayout};
pub use solver::{Backend, CJOperator, KExtProblem, Side, ThresholdResult};
pub use states::{BellKind, DensityOperator, WernerParams};
pub use werner::{IrrepCoefficients, MnPTradeoff};
