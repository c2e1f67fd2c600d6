//! Synthetic operator families pushed through the abstract certificate chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{
    entering_time, iterate_decomposition, main2_discrete_check, main_constants, AttractionCertificate,
    DecompositionFlow, DiscreteHypotheses, FamilyKind, SyntheticFamily, Tolerance,
};
use crate::error::Result;

use super::common::{t_star_for, BOUND_SLACK};
use super::config::RunConfig;
use super::report::{DecayRow, DecaySource, ExperimentReport, Relation, RunOutput, TrajectoryLog};

const SAMPLES_PER_FAMILY: usize = 20;
const MAIN2_SAMPLES: usize = 100;
const MAIN2_STEPS: usize = 30;
const ITERATION_STEPS: usize = 30;
/// Largest radius of the entering-time probes, in units of `R⋆`.
const ENTERING_RADIUS: f64 = 8.0;
const DECAY_RUN: &str = "e1_family_0";

#[derive(Debug, Default, Clone, Copy, Serialize)]
struct FamilyOutcome {
    absorbing_excess: f64,
    halving_excess: f64,
    one_step_excess: f64,
    entering_excess: f64,
    iteration_failures: usize,
    decay_excess: f64,
    main2_violations: usize,
}

impl FamilyOutcome {
    fn merge(self, o: Self) -> Self {
        Self {
            absorbing_excess: self.absorbing_excess.max(o.absorbing_excess),
            halving_excess: self.halving_excess.max(o.halving_excess),
            one_step_excess: self.one_step_excess.max(o.one_step_excess),
            entering_excess: self.entering_excess.max(o.entering_excess),
            iteration_failures: self.iteration_failures + o.iteration_failures,
            decay_excess: self.decay_excess.max(o.decay_excess),
            main2_violations: self.main2_violations + o.main2_violations,
        }
    }

    fn start() -> Self {
        Self {
            absorbing_excess: f64::NEG_INFINITY,
            halving_excess: f64::NEG_INFINITY,
            one_step_excess: f64::NEG_INFINITY,
            entering_excess: f64::NEG_INFINITY,
            decay_excess: f64::NEG_INFINITY,
            ..Self::default()
        }
    }
}

fn times(run: &RunConfig) -> Vec<f64> {
    let n = (run.t_final / 0.1).round().max(1.0) as usize;
    (0..=n).map(|i| run.t_final * i as f64 / n as f64).collect()
}

fn certificate(run: &RunConfig, f: &SyntheticFamily) -> Result<AttractionCertificate> {
    let t_star = t_star_for(run.t_star, &[&f.alpha, &f.beta])?;
    main_constants(&f.alpha, &f.beta, &f.j, f.r0, t_star)
}

/// `max_i dist(S(t)x_i, B_𝒱(ρ))` on the time grid.
pub fn synthetic_decay(f: &SyntheticFamily, xs: &[Vec<f64>], rho: f64, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            xs.iter()
                .map(|x| f.dist_to_strong_ball(&f.s(t, x), rho))
                .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))
        })
        .collect()
}

fn compliant(run: &RunConfig, f: &SyntheticFamily, seed: u64) -> Result<(FamilyOutcome, AttractionCertificate)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cert = certificate(run, f)?;
    let tec = &cert.tec;
    let flow = f.flow(cert.t_star);
    let mut out = FamilyOutcome::start();

    for _ in 0..SAMPLES_PER_FAMILY {
        // absorbing ball and the one-step inequality inside it
        let z = f.sample(&mut rng, tec.r_star, true);
        let uz = f.strong_norm(&f.u(cert.t_star, &z));
        out.absorbing_excess = out.absorbing_excess.max(uz - tec.r_star);
        out.one_step_excess = out.one_step_excess.max(uz - tec.one_step_bound(f.strong_norm(&z)));

        // outside R⋆ every step shrinks the norm by (1 + β⋆)/2
        let big = f.sample(&mut rng, ENTERING_RADIUS * tec.r_star, true);
        let n = f.strong_norm(&big);
        let ubig = f.strong_norm(&f.u(cert.t_star, &big));
        out.one_step_excess = out.one_step_excess.max(ubig - tec.one_step_bound(n));
        if n >= tec.r_star {
            out.halving_excess = out.halving_excess.max(ubig - 0.5 * (1.0 + tec.beta_star) * n);
        }

        // after n_R steps from B(R) the iterate sits in B(R⋆)
        let radius = ENTERING_RADIUS * tec.r_star;
        let (steps, _) = entering_time(radius, tec)?;
        let mut z = big.clone();
        for _ in 0..steps {
            z = f.u(cert.t_star, &z);
        }
        out.entering_excess = out.entering_excess.max(f.strong_norm(&z) - tec.r_star);

        // the induction on y_n, z_n
        let x = f.sample(&mut rng, f.r0, false);
        let rep = iterate_decomposition(&flow, &x, &cert, ITERATION_STEPS, Tolerance::absolute(BOUND_SLACK))?;
        if !rep.passed() {
            out.iteration_failures += 1;
        }

        // continuous-time attraction
        for i in 0..=200 {
            let t = i as f64 * 0.05;
            let d = flow.dist_to_strong_ball(&f.s(t, &x), cert.rho)?;
            out.decay_excess = out.decay_excess.max(d - cert.bound(t));
        }
    }

    let hyp = DiscreteHypotheses::new(cert.alpha_star, tec.beta_star, tec.j_star, f.r0)?;
    let samples: Vec<Vec<f64>> = (0..MAIN2_SAMPLES).map(|_| f.sample(&mut rng, f.r0, false)).collect();
    let m2 = main2_discrete_check(&flow, &hyp, &samples, MAIN2_STEPS, Tolerance::absolute(BOUND_SLACK))?;
    out.main2_violations = m2.violations.len();
    Ok((out, cert))
}

pub fn run_e1(run: &RunConfig) -> Result<RunOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let families: Vec<SyntheticFamily> =
        (0..run.families).map(|_| SyntheticFamily::random(&mut rng, FamilyKind::Compliant)).collect();
    let seeds: Vec<u64> = (0..run.families).map(|i| run.seed.wrapping_add(1 + i as u64)).collect();
    let results: Vec<(FamilyOutcome, AttractionCertificate)> =
        families.par_iter().zip(&seeds).map(|(f, &s)| compliant(run, f, s)).collect::<Result<_>>()?;
    let total = results.iter().fold(FamilyOutcome::start(), |a, (o, _)| a.merge(*o));

    // violating families: the claimed J understates the true inhomogeneity by 10%
    let mut flagged = 0usize;
    let mut first_flags = Vec::new();
    for _ in 0..run.violating_families {
        let raw = SyntheticFamily::random(&mut rng, FamilyKind::Violating);
        let t_star = t_star_for(run.t_star, &[&raw.alpha, &raw.beta])?;
        let f = raw.with_claimed_step(t_star);
        let cert = main_constants(&f.alpha, &f.beta, &f.j, f.r0, t_star)?;
        let x = f.sample(&mut rng, f.r0, false);
        let rep = iterate_decomposition(&f.flow(t_star), &x, &cert, ITERATION_STEPS, Tolerance::absolute(BOUND_SLACK))?;
        if let Some(n) = rep.first_violation {
            flagged += 1;
            first_flags.push(n);
        }
    }

    // J ≡ 0: attraction to the zero ball
    let homog = SyntheticFamily::random(&mut rng, FamilyKind::Homogeneous);
    let hcert = certificate(run, &homog)?;
    let hx: Vec<Vec<f64>> = (0..SAMPLES_PER_FAMILY).map(|_| homog.sample(&mut rng, homog.r0, false)).collect();
    let grid = times(run);
    let hdist = synthetic_decay(&homog, &hx, 0.0, &grid)?;
    let homog_excess = grid.iter().zip(&hdist).map(|(&t, d)| d - hcert.bound(t)).fold(f64::NEG_INFINITY, f64::max);

    // decay table of the first compliant family
    let (f0, cert0) = (&families[0], &results[0].1);
    let mut trng = ChaCha8Rng::seed_from_u64(run.seed ^ 0xD1CE);
    let xs: Vec<Vec<f64>> = (0..run.ensemble_size.max(1)).map(|_| f0.sample(&mut trng, f0.r0, false)).collect();
    let dist = synthetic_decay(f0, &xs, cert0.rho, &grid)?;

    let mut report = ExperimentReport::new(run, DecaySource::Synthetic { run: DECAY_RUN.into(), rho: cert0.rho });
    report.certificates.tec = Some(cert0.tec.clone());
    report.certificates.attraction = Some(cert0.clone());
    report.certificates.extra.insert("homogeneous".into(), hcert.clone());
    report.decay_table =
        grid.iter().zip(&dist).map(|(&t, &d)| DecayRow { t, dist: d, bound: cert0.bound(t) }).collect();
    report.fit("compliant_families", &run.families);
    report.fit("violating_first_flags", &first_flags);
    report.fit("worst_case", &total);

    report.check("absorbing_inclusion_excess", total.absorbing_excess, Relation::Le, BOUND_SLACK);
    report.check("one_step_inequality_excess", total.one_step_excess, Relation::Le, BOUND_SLACK);
    report.check("halving_step_excess", total.halving_excess, Relation::Le, BOUND_SLACK);
    report.check("entering_time_excess", total.entering_excess, Relation::Le, BOUND_SLACK);
    report.check("iteration_bound_failures", total.iteration_failures as f64, Relation::Le, 0.0);
    report.check("attraction_decay_excess", total.decay_excess, Relation::Le, BOUND_SLACK);
    report.check("discrete_attraction_violations", total.main2_violations as f64, Relation::Le, 0.0);
    report.check("violating_families_flagged", flagged as f64, Relation::Ge, run.violating_families as f64);
    report.check("zero_ball_attraction_excess", homog_excess, Relation::Le, BOUND_SLACK);
    let table_excess = super::common::max_excess(&dist, &report.decay_table.iter().map(|r| r.bound).collect::<Vec<_>>());
    report.check("decay_table_excess", table_excess, Relation::Le, BOUND_SLACK);

    let mut log = TrajectoryLog::default();
    log.push(&serde_json::json!({ "run": DECAY_RUN, "family": f0 }));
    for (i, x) in xs.iter().enumerate() {
        log.push(&serde_json::json!({ "run": DECAY_RUN, "member": i, "t": 0.0, "component": "full", "state": x }));
    }
    Ok(RunOutput { report, trajectories: log })
}
