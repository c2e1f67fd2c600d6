//! Pieces shared by the simulation experiments.

use rayon::prelude::*;

use crate::certificates::{choose_t_star, DecayFn};
use crate::error::{Error, Result};
use crate::metrics::{dist_to_ball, sample_ball, NormSpec};
use crate::semigroup::{dt_max, Component, EvolutionConfig, TrajectoryRecord};
use crate::spectral::PhaseState;

use super::config::{RunConfig, TStarPolicy};

/// Headroom of the amplitude bound over the largest initial `sup |u|`.
pub const AMPLITUDE_HEADROOM: f64 = 1.5;
/// Slack of the pointwise bound checks.
pub const BOUND_SLACK: f64 = 1e-9;
/// Decomposition drift accepted by the report checks.
pub const SUM_IDENTITY_TOLERANCE: f64 = 1e-8;

/// `count` states from `B_𝓗(radius)`; an empty ensemble is an error.
pub fn ensemble(run: &RunConfig, radius: f64, stream: u64) -> Result<Vec<PhaseState>> {
    if run.ensemble_size == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let seed = run.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream);
    Ok(sample_ball(&run.grid, radius, 0.0, run.ensemble_size, seed))
}

/// Evolution settings for initial data `states`: the amplitude bound covers
/// `AMPLITUDE_HEADROOM` times the largest `sup |u|`, and the step shrinks to the
/// stability limit of that amplitude when needed.
pub fn evolution_config(run: &RunConfig, states: &[PhaseState], t_final: f64) -> Result<EvolutionConfig> {
    let forcing = run.forcing_field()?;
    let initial_sup = states.iter().map(|s| s.pos.sup_bound()).fold(0.0, f64::max);
    let amplitude = (2.0 * forcing.apply_a_power(-1.0).sup_bound())
        .max(AMPLITUDE_HEADROOM * initial_sup)
        .max(1.0);
    let dt = run.dt.min(dt_max(&run.phi, amplitude));
    let cfg = EvolutionConfig::new(run.grid, run.phi.clone(), forcing, dt, t_final)?
        .with_amplitude_bound(amplitude)?
        .with_epsilon(run.epsilon)?;
    log::debug!("amplitude bound {amplitude:.3}, dt {:.3e}, {} steps", cfg.step_plan().1, cfg.step_plan().0);
    Ok(cfg)
}

/// Runs `f` on every member in parallel, keeping member order.
pub fn par_runs<F>(states: &[PhaseState], f: F) -> Result<Vec<TrajectoryRecord>>
where
    F: Fn(usize, &PhaseState) -> Result<TrajectoryRecord> + Sync,
{
    states.par_iter().enumerate().map(|(i, s)| f(i, s)).collect()
}

/// Largest step at which every listed decay function meets the margin.
pub fn t_star_for(policy: TStarPolicy, decays: &[&DecayFn]) -> Result<f64> {
    match policy {
        TStarPolicy::Explicit(t) => Ok(t),
        TStarPolicy::Margin(m) => {
            let mut t = 0.0f64;
            for d in decays {
                t = t.max(choose_t_star(d, m)?);
            }
            Ok(t)
        }
    }
}

/// Pointwise ensemble maximum of `f(state)` on the shared time grid.
pub fn ensemble_max<F>(records: &[TrajectoryRecord], c: Component, f: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(usize, &PhaseState) -> f64,
{
    let first = records.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let times = first.times();
    let mut out = vec![f64::NEG_INFINITY; times.len()];
    for (i, rec) in records.iter().enumerate() {
        if rec.frames.len() != times.len() {
            return Err(Error::Numerical("ensemble members recorded different time grids".into()));
        }
        for (j, v) in rec.series(c, |s| f(i, s)).into_iter().enumerate() {
            out[j] = out[j].max(v.1);
        }
    }
    Ok((times, out))
}

/// Ensemble maximum of `dist(state, B(rho))` for one component.
pub fn ensemble_dist(records: &[TrajectoryRecord], c: Component, rho: f64, spec: NormSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let per: Vec<Vec<f64>> = records
        .par_iter()
        .map(|rec| {
            (0..rec.frames.len())
                .map(|j| match rec.state(c, j) {
                    Some(s) => dist_to_ball(s, rho, spec),
                    None => Err(Error::Numerical(format!("run recorded no {} state", c.as_str()))),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let first = records.first().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let times = first.times();
    let mut out = vec![0.0f64; times.len()];
    for row in &per {
        if row.len() != times.len() {
            return Err(Error::Numerical("ensemble members recorded different time grids".into()));
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(*v);
        }
    }
    Ok((times, out))
}

pub fn max_drift(records: &[TrajectoryRecord]) -> f64 {
    records.iter().map(|r| r.max_drift).fold(0.0, f64::max)
}

/// Largest `measured − bound` over a table.
pub fn max_excess(measured: &[f64], bound: &[f64]) -> f64 {
    measured.iter().zip(bound).map(|(m, b)| m - b).fold(f64::NEG_INFINITY, f64::max)
}
