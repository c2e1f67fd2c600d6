//! Experiment orchestration: configuration, the four experiments, reports and verification.

pub mod certify;
pub mod common;
pub mod config;
pub mod e1;
pub mod e2;
pub mod e3;
pub mod e4;
pub mod report;
pub mod verify;

pub use certify::{certify, CertifyOutput, CertifyRequest};
pub use config::{Experiment, RunConfig, TStarPolicy};
pub use e1::run_e1;
pub use e2::run_e2;
pub use e3::run_e3;
pub use e4::run_e4;
pub use report::{Check, DecayRow, DecaySource, ExperimentReport, Relation, RunOutput, TrajectoryLog};
pub use verify::{verify_report, VerifyOutcome};

use crate::error::Result;

pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    log::info!("running {} with seed {}", cfg.experiment.as_str(), cfg.seed);
    match cfg.experiment {
        Experiment::E1 => run_e1(cfg),
        Experiment::E2 => run_e2(cfg),
        Experiment::E3 => run_e3(cfg),
        Experiment::E4 => run_e4(cfg),
    }
}
