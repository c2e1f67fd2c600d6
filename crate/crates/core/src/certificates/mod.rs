//! Constants of the absorbing-set and exponential-attraction arguments, and
//! checks of their conclusions on concrete operator families.

pub mod classes;
pub mod constants;
pub mod fit;
pub mod gronwall;
pub mod iteration;
pub mod synthetic;

pub use classes::{DecayFn, DecayForm, GrowthFn, GrowthForm};
pub use constants::{
    choose_t_star, entering_time, main_constants, tec_constants, AttractionCertificate, TecCertificate, MIN_T_STAR,
};
pub use fit::{fit_decay_envelope, fit_gronwall, fit_growth_envelope, pointwise_max, GronwallFit};
pub use gronwall::{gronwall_bound, gronwall_verify, integrate_equality, GronwallParams, GronwallReport};
pub use iteration::{
    iterate_decomposition, main2_discrete_check, DecompositionFlow, DiscreteHypotheses, DiscreteReport,
    IterationReport, IterationStep, Tolerance,
};
pub use synthetic::{FamilyKind, SyntheticFamily, SyntheticFlow};
