//! The strongly damped wave equation on a spectral grid.

pub mod config;
pub mod energy;
pub mod evolve;
pub mod flow;
pub mod linear;

pub use config::{dt_max, EvolutionConfig, DEFAULT_EPSILON, DIVERGENCE_GUARD};
pub use energy::{check_energy_parameter, energy, equivalence_interval, lambda0, lambda1};
pub use evolve::{
    evolve_hat_split, evolve_linear_split, evolve_s, evolve_vu, Component, DecomposedState, Frame, Norms,
    TrajectoryRecord, TrajectorySample, CONSISTENCY_TOLERANCE,
};
pub use flow::{LinearSplitFlow, SdweSplitFlow};
pub use linear::{
    companion_roots, linear_decay_constants, mode_operator_norm, mode_propagator, slow_rate, step_linear,
    CompanionRoots, LinearDecay,
};
