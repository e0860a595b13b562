//! Spectral-edge expansion coefficients for weakly disordered alloy-type
//! lattice operators `H₀ + ε Σ_k ω_k V^□(· - k)`, with independent numerical
//! oracles for every predicted bound.
//!
//! The layers build on each other:
//!
//! * [`model`]: lattice geometry, hopping tables, single-cell potentials,
//!   disorder support, presets and JSON model files.
//! * [`floquet`]: fiber matrices, the Brillouin-zone minimizer scan and the
//!   ground eigenspace at a minimizer.
//! * [`perturbation`]: the perturbation matrix, `A₁`, `A₂`, `A′₁`, `A′₂` and
//!   the resulting edge bounds.
//! * [`verification`]: fiber minimization, quasi-periodic trial states,
//!   torus Monte Carlo, exponent fits and the Kirsch–Simon sandwich.
//! * [`pipeline`]: configuration-driven runs producing JSON/CSV reports.

pub mod error;
pub mod floquet;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod pipeline;
pub mod report;
pub mod tolerance;
pub mod verification;

pub use error::{Error, Result};
pub use model::{
    DisorderSupport, HoppingOperator, LatticeGeometry, Model, Regime, SingleCellPotential,
};
pub use tolerance::Tolerances;
