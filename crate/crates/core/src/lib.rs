//! Conditional-expectation tail bounds, beta-independent random objects from
//! walks on hybrid expander-permutation graphs, and toy-scale weak-to-strong
//! one-way-function reductions, each checked against its closed-form bound.
//!
//! The probability and walk code is generic over [`Scalar`] so the same
//! routines run in `f64`, `f32` or exact rationals ([`Exact`]); the spectral
//! code is generic over [`Real`]. Aliases for the common instantiations live
//! at the crate root.

pub mod error;
pub mod owf;
pub mod perm;
pub mod prob;
pub mod scalar;
pub mod spectral;
pub mod walks;

pub use error::{Error, Result};
pub use perm::Permutation;
pub use scalar::{Exact, Real, Scalar};

pub type FiniteSpace64 = prob::FiniteSpace<f64>;
pub type ExactSpace = prob::FiniteSpace<Exact>;
pub type RandomVariable64 = prob::RandomVariable<f64>;
pub type ExactRandomVariable = prob::RandomVariable<Exact>;
pub type RandomObject64 = prob::RandomObject<f64>;
pub type ExactRandomObject = prob::RandomObject<Exact>;
pub type BoundReport64 = prob::BoundReport<f64>;
pub type ExactBoundReport = prob::BoundReport<Exact>;
pub type SpectralReport64 = spectral::SpectralReport<f64>;
pub type TerminalVector64 = walks::TerminalVector<f64>;
pub type ExactTerminalVector = walks::TerminalVector<Exact>;
