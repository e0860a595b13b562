//! Independent numerical checks of the predicted edge bounds.

pub mod fiber;
pub mod fit;
pub mod kirsch_simon;
pub mod quasiperiodic;
pub mod torus;

pub use fiber::{fiber_bound_sandwich, fiber_min_over_q, FiberMinResult, SandwichReport};
pub use fit::{fit_exponent, ExponentFit};
pub use kirsch_simon::{kirsch_simon_sandwich, DispersionFactor, KirschSimonReport};
pub use quasiperiodic::{
    quartic_trial_energy, quasiperiodic_rayleigh, QuarticTrial, QuasiperiodicReport,
};
pub use torus::{
    box_min_eig, monte_carlo, torus_fiber_oracle, BoxSpectrumSample, EigenOptions,
    MonteCarloSummary, Sampler,
};
