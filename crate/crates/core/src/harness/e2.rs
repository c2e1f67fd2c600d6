//! Ensemble decay of the hat splitting `S(t)x = v̂(t) + ŵ(t)`.

use crate::certificates::{fit_decay_envelope, fit_gronwall, fit_growth_envelope};
use crate::error::Result;
use crate::metrics::fit_rate;
use crate::semigroup::{evolve_hat_split, lambda0, lambda1, linear_decay_constants, Component};

use super::common::{ensemble, ensemble_max, evolution_config, max_drift, max_excess, par_runs, SUM_IDENTITY_TOLERANCE};
use super::config::RunConfig;
use super::report::{DecayRow, DecaySource, ExperimentReport, Relation, RunOutput, TrajectoryLog};

pub const RUN: &str = "e2";
/// Relative deviation of the measured linear rate from `δ`.
pub const LINEAR_RATE_TOLERANCE: f64 = 0.02;
/// Relative variation of the ensemble radius over the second half of the run.
pub const SETTLING_TOLERANCE: f64 = 0.05;
/// Excess of a sampled energy over its fitted Gronwall bound.
pub const GRONWALL_FIT_TOLERANCE: f64 = 1e-2;

pub fn run_e2(run: &RunConfig) -> Result<RunOutput> {
    let xs = ensemble(run, run.r0, 0)?;
    let cfg = evolution_config(run, &xs, run.t_final)?;
    let records = par_runs(&xs, |_, x| evolve_hat_split(&cfg, x))?;
    let eps = cfg.epsilon();
    let x_norm: Vec<f64> = xs.iter().map(|x| x.norm(0.0)).collect();
    let r_max = x_norm.iter().copied().fold(0.0, f64::max);

    let (t, v_hat) = ensemble_max(&records, Component::HatV, |_, s| s.norm(0.0))?;
    let (_, ratio) = ensemble_max(&records, Component::HatV, |i, s| {
        if x_norm[i] > 0.0 {
            s.norm(0.0) / x_norm[i]
        } else {
            0.0
        }
    })?;
    let (_, l0) = ensemble_max(&records, Component::HatV, |_, s| lambda0(s, eps))?;
    let (_, l1) = ensemble_max(&records, Component::HatW, |_, s| lambda1(s, eps))?;
    let (_, w_quarter) = ensemble_max(&records, Component::HatW, |_, s| s.norm(0.25))?;
    let (_, full) = ensemble_max(&records, Component::Full, |_, s| s.norm(0.0))?;

    let envelope = fit_decay_envelope(&t, &ratio)?;
    let rate = fit_rate(&t, &v_hat)?;
    let gronwall_v = fit_gronwall(&t, &l0, eps, false)?;
    let gronwall_w = fit_gronwall(&t, &l1, eps, true)?;
    let j0 = fit_growth_envelope(&t, &w_quarter)?;

    let bound: Vec<f64> = t.iter().map(|&ti| envelope.eval(ti) * r_max).collect();
    let mut report = ExperimentReport::new(run, DecaySource::Norm { run: RUN.into(), component: Component::HatV, r: 0.0 });
    report.decay_table = t.iter().zip(v_hat.iter().zip(&bound)).map(|(&t, (&d, &b))| DecayRow { t, dist: d, bound: b }).collect();
    report.fit("c0", &gronwall_v.k);
    report.fit("nu0", &gronwall_v.nu);
    report.fit("gronwall_hat_v", &gronwall_v);
    report.fit("gronwall_hat_w", &gronwall_w);
    report.fit("j0_envelope", &j0);
    report.fit("hat_v_envelope", &envelope);
    report.fit("hat_v_rate", &rate);
    report.fit("dt", &cfg.step_plan().1);

    report.check("hat_sum_identity_drift", max_drift(&records), Relation::Le, SUM_IDENTITY_TOLERANCE);
    report.check("hat_v_fitted_rate", rate.omega, Relation::Gt, 0.0);
    report.check("nu0_positive", gronwall_v.nu, Relation::Gt, 0.0);
    report.check("hat_v_envelope_excess", max_excess(&v_hat, &bound), Relation::Le, 1e-12);
    report.check("gronwall_hat_v_ratio", gronwall_v.max_bound_ratio, Relation::Le, 1.0 + GRONWALL_FIT_TOLERANCE);
    report.check("gronwall_hat_w_ratio", gronwall_w.max_bound_ratio, Relation::Le, 1.0 + GRONWALL_FIT_TOLERANCE);

    let half = t.len() / 2;
    let late = &full[half..];
    let late_max = late.iter().copied().fold(0.0, f64::max);
    let late_min = late.iter().copied().fold(f64::INFINITY, f64::min);
    let settle = if late_max > 0.0 { (late_max - late_min) / late_max } else { 0.0 };
    report.fit("absorbing_radius", &late_max);
    report.check("absorbing_radius_settled", settle, Relation::Le, SETTLING_TOLERANCE);

    if run.phi.is_zero() {
        let lin = linear_decay_constants(&run.grid);
        let late_rate = fit_rate(&t[half..], &v_hat[half..])?;
        report.fit("linear_decay", &lin);
        report.fit("late_rate", &late_rate);
        let rel = (late_rate.omega - lin.delta).abs() / lin.delta;
        report.check("linear_rate_vs_delta", rel, Relation::Le, LINEAR_RATE_TOLERANCE);
    }

    let mut log = TrajectoryLog::default();
    for (i, rec) in records.iter().enumerate() {
        log.record(RUN, i, rec, &[Component::Full, Component::HatV]);
    }
    Ok(RunOutput { report, trajectories: log })
}
