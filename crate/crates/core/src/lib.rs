//! Reduction mappings for optimisation problems whose minimisers lie on a
//! known structure.
//!
//! A reduction mapping `Φ(x₁) = (x₁, Ψ(x₁))` embeds a reduced parameter into
//! the full space. This crate builds the reduced objective `F = f ∘ Φ` with
//! exact derivatives, preconditions it with the pullback metric
//! `R = DΦᵀDΦ`, and measures how the reduction changes curvature.

pub mod error;
pub mod families;
pub mod fd;
pub mod linops;
pub mod mapping;
pub mod optim;
pub mod problems;
pub mod reduced;
pub mod spectral;
pub mod suites;
pub mod tensor;

pub use error::{Error, Result};
pub use linops::{EigenPairs, SymMatrix};
pub use mapping::{InnerObjective, InnerProblem, MappingKind, ReductionMapping};
pub use reduced::{Objective, ObjectiveFn, ReducedProblem};
pub use tensor::Tensor3;
