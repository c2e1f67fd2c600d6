//! Regularity pipeline: a certificate for `𝒱 = 𝓗^{1/4}` from fitted `(α, β, J)`,
//! then one linear-split step toward `𝓗^1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    fit_decay_envelope, fit_growth_envelope, iterate_decomposition, main_constants, AttractionCertificate, DecayFn,
    Tolerance,
};
use crate::error::Result;
use crate::metrics::{sample_ball, NormSpec};
use crate::semigroup::{
    evolve_linear_split, evolve_vu, linear_decay_constants, Component, EvolutionConfig, SdweSplitFlow,
    TrajectoryRecord,
};
use crate::spectral::PhaseState;

use super::common::{
    ensemble, ensemble_dist, ensemble_max, evolution_config, max_drift, max_excess, par_runs, t_star_for,
    BOUND_SLACK, SUM_IDENTITY_TOLERANCE,
};
use super::config::RunConfig;
use super::report::{DecayRow, DecaySource, ExperimentReport, Relation, RunOutput, TrajectoryLog};

pub const STAGE1_RUN: &str = "e3_stage1";
pub const STAGE2_RUN: &str = "e3_stage2";

/// Certificate of one stage together with the data it was measured on.
#[derive(Debug, Clone)]
pub struct StageResult {
    pub certificate: AttractionCertificate,
    pub records: Vec<TrajectoryRecord>,
    pub spec: NormSpec,
    pub times: Vec<f64>,
    pub dist: Vec<f64>,
}

impl StageResult {
    pub fn bounds(&self) -> Vec<f64> {
        self.times.iter().map(|&t| self.certificate.bound(t)).collect()
    }

    pub fn decay_excess(&self) -> f64 {
        max_excess(&self.dist, &self.bounds())
    }

    /// Largest `‖S(T)x‖` in the strong norm.
    pub fn late_radius(&self) -> f64 {
        self.records
            .iter()
            .filter_map(|r| r.final_state(Component::Full))
            .map(|s| s.norm(self.spec.r_ball()))
            .fold(0.0, f64::max)
    }

    pub fn late_states(&self) -> Vec<PhaseState> {
        self.records.iter().filter_map(|r| r.final_state(Component::Full).cloned()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
struct IterationSummary {
    members: usize,
    steps: usize,
    max_z_norm: f64,
    z_bound: f64,
    hypothesis_steps_ok: usize,
    hypothesis_steps: usize,
}

/// Ratios `‖V_x(t)d‖_{𝓗^{1/4}} / ‖d‖_{𝓗^{1/4}}` for random directions `d`.
fn direction_ratios(run: &RunConfig, cfg: &EvolutionConfig, xs: &[PhaseState]) -> Result<Vec<Vec<(f64, f64)>>> {
    let jobs: Vec<(usize, PhaseState)> = xs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| {
            let seed = run.seed.wrapping_add(0xB0B0).wrapping_add(i as u64);
            sample_ball(&run.grid, run.r0, 0.25, run.beta_directions, seed).into_iter().map(move |d| (i, d))
        })
        .filter(|(_, d)| d.norm(0.25) > 0.0)
        .collect();
    jobs.par_iter()
        .map(|(i, d)| {
            let x = &xs[*i];
            let rec = evolve_vu(cfg, x, d, &(x - d))?;
            let n = d.norm(0.25);
            Ok(rec.series(Component::V, |s| s.norm(0.25) / n))
        })
        .collect()
}

/// Stage one: `(α, β, J)` fitted from the `V/U` flows of an ensemble from `B_𝓗(R₀)`.
pub fn stage_one(run: &RunConfig, report: &mut ExperimentReport) -> Result<StageResult> {
    let xs = ensemble(run, run.r0, 0)?;
    let cfg = evolution_config(run, &xs, run.t_final)?;
    let zero = PhaseState::zeros(run.grid);
    let records = par_runs(&xs, |_, x| evolve_vu(&cfg, x, x, &zero))?;
    let x_norm: Vec<f64> = xs.iter().map(|x| x.norm(0.0)).collect();
    let xq_norm: Vec<f64> = xs.iter().map(|x| x.norm(0.25)).collect();

    let (t, alpha_ratio) =
        ensemble_max(&records, Component::V, |i, s| if x_norm[i] > 0.0 { s.norm(0.0) / x_norm[i] } else { 0.0 })?;
    let (_, mut beta_ratio) =
        ensemble_max(&records, Component::V, |i, s| if xq_norm[i] > 0.0 { s.norm(0.25) / xq_norm[i] } else { 0.0 })?;
    for series in direction_ratios(run, &cfg, &xs)? {
        for (b, (_, r)) in beta_ratio.iter_mut().zip(series) {
            *b = b.max(r);
        }
    }
    let (_, w_quarter) = ensemble_max(&records, Component::W, |_, s| s.norm(0.25))?;

    let alpha = fit_decay_envelope(&t, &alpha_ratio)?;
    let beta = fit_decay_envelope(&t, &beta_ratio)?;
    let j = fit_growth_envelope(&t, &w_quarter)?;
    let t_star = t_star_for(run.t_star, &[&alpha, &beta])?;
    let certificate = main_constants(&alpha, &beta, &j, run.r0, t_star)?;
    let spec = NormSpec::new(0.0, 0.25)?;
    let (times, dist) = ensemble_dist(&records, Component::Full, certificate.rho, spec)?;

    report.fit("stage1_alpha", &alpha);
    report.fit("stage1_beta", &beta);
    report.fit("stage1_j", &j);
    report.fit("stage1_dt", &cfg.step_plan().1);
    report.check("stage1_sum_identity_drift", max_drift(&records), Relation::Le, SUM_IDENTITY_TOLERANCE);

    // the discrete iteration y_{n+1} = V y_n, z_{n+1} = U z_n on the real flow
    let flow = SdweSplitFlow::new(&cfg, t_star)?;
    let steps = run.iterations;
    let reps: Vec<_> = xs
        .par_iter()
        .map(|x| iterate_decomposition(&flow, x, &certificate, steps, Tolerance::absolute(BOUND_SLACK)))
        .collect::<Result<_>>()?;
    let all_steps = reps.iter().flat_map(|r| r.steps.iter().skip(1));
    let summary = IterationSummary {
        members: reps.len(),
        steps,
        max_z_norm: all_steps.clone().map(|s| s.z_norm).fold(0.0, f64::max),
        z_bound: certificate.tec.r_star,
        hypothesis_steps_ok: all_steps.clone().filter(|s| s.ok).count(),
        hypothesis_steps: all_steps.count(),
    };
    report.check("stage1_iteration_z_bound", summary.max_z_norm, Relation::Le, summary.z_bound + BOUND_SLACK);
    report.fit("stage1_iteration", &summary);

    Ok(StageResult { certificate, records, spec, times, dist })
}

/// Stage two: `S = L + ζ` from `states`, with `α = β = M e^{−δt}` and `J` from `‖ζ‖_{𝓗^1}`.
pub fn stage_two(run: &RunConfig, states: &[PhaseState], report: &mut ExperimentReport) -> Result<StageResult> {
    let cfg = evolution_config(run, states, run.t_final)?;
    let records = par_runs(states, |_, x| evolve_linear_split(&cfg, x))?;
    let lin = linear_decay_constants(&run.grid);
    let alpha = DecayFn::exp_floor(lin.m, lin.delta, 0.0)?;
    let (t, zeta) = ensemble_max(&records, Component::Zeta, |_, s| s.norm(1.0))?;
    let j = fit_growth_envelope(&t, &zeta)?;
    let r0 = states.iter().map(|s| s.norm(0.0)).fold(0.0, f64::max);
    let t_star = t_star_for(run.t_star, &[&alpha])?;
    let certificate = main_constants(&alpha, &alpha, &j, r0, t_star)?;
    let spec = NormSpec::new(0.0, 1.0)?;
    let (times, dist) = ensemble_dist(&records, Component::Full, certificate.rho, spec)?;

    report.fit("stage2_linear_decay", &lin);
    report.fit("stage2_j", &j);
    report.fit("stage2_r0", &r0);
    report.check("stage2_sum_identity_drift", max_drift(&records), Relation::Le, SUM_IDENTITY_TOLERANCE);
    Ok(StageResult { certificate, records, spec, times, dist })
}

pub fn run_e3(run: &RunConfig) -> Result<RunOutput> {
    let mut report = ExperimentReport::new(run, DecaySource::Norm { run: String::new(), component: Component::Full, r: 0.0 });
    let s1 = stage_one(run, &mut report)?;
    let c1 = s1.certificate.clone();
    report.decay_source = DecaySource::DistToBall {
        run: STAGE1_RUN.into(),
        component: Component::Full,
        rho: c1.rho,
        r_base: s1.spec.r_base(),
        r_ball: s1.spec.r_ball(),
    };
    report.decay_table = s1
        .times
        .iter()
        .zip(s1.dist.iter().zip(s1.bounds()))
        .map(|(&t, (&d, b))| DecayRow { t, dist: d, bound: b })
        .collect();
    report.check("stage1_decay_excess", s1.decay_excess(), Relation::Le, BOUND_SLACK);
    report.check("stage1_late_enclosure", s1.late_radius(), Relation::Le, c1.rho);

    let s2 = stage_two(run, &s1.late_states(), &mut report)?;
    let c2 = s2.certificate.clone();
    report.check("stage2_decay_excess", s2.decay_excess(), Relation::Le, BOUND_SLACK);
    report.check("stage2_late_enclosure", s2.late_radius(), Relation::Le, c2.rho);

    report.certificates.tec = Some(c1.tec.clone());
    report.certificates.attraction = Some(c1);
    report.certificates.extra.insert("stage2_h1".into(), c2);

    let mut log = TrajectoryLog::default();
    for (i, rec) in s1.records.iter().enumerate() {
        log.record(STAGE1_RUN, i, rec, &[Component::Full]);
    }
    for (i, rec) in s2.records.iter().enumerate() {
        log.record(STAGE2_RUN, i, rec, &[Component::Full]);
    }
    Ok(RunOutput { report, trajectories: log })
}
