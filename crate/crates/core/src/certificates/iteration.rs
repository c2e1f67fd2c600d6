//! The induction `y_{n+1} = V_{x_n}(t⋆)y_n`, `z_{n+1} = U_{x_n}(t⋆)z_n` run on concrete flows.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::constants::AttractionCertificate;

/// Sum-identity drift that aborts an iteration.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// A solution operator with a two-part decomposition, advanced by a fixed step.
pub trait DecompositionFlow {
    type State: Clone;

    fn zero(&self, like: &Self::State) -> Self::State;

    /// `(S x, V_x y, U_x z)` after one step.
    fn advance(&self, x: &Self::State, y: &Self::State, z: &Self::State) -> Result<(Self::State, Self::State, Self::State)>;

    /// Norm of the phase space `𝓗`.
    fn base_norm(&self, s: &Self::State) -> f64;

    /// Norm of the stronger space `𝒱`.
    fn strong_norm(&self, s: &Self::State) -> f64;

    /// `‖x − y − z‖_𝓗`.
    fn sum_residual(&self, x: &Self::State, y: &Self::State, z: &Self::State) -> f64;

    /// `dist_𝓗(x, B_𝒱(radius))`.
    fn dist_to_strong_ball(&self, x: &Self::State, radius: f64) -> Result<f64>;
}

/// `lhs ≤ rhs (1 + relative) + absolute`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Tolerance {
    pub const fn absolute(absolute: f64) -> Self {
        Self { absolute, relative: 0.0 }
    }

    pub fn holds(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs * (1.0 + self.relative) + self.absolute
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStep {
    pub n: usize,
    pub y_norm: f64,
    pub z_norm: f64,
    /// `α⋆ⁿ R₀`.
    pub y_bound: f64,
    /// `R⋆`.
    pub z_bound: f64,
    /// `‖y_n‖ ≤ α⋆ ‖y_{n−1}‖`.
    pub contraction_ok: bool,
    /// `‖z_n‖_𝒱 ≤ β⋆ ‖z_{n−1}‖_𝒱 + J(t⋆)`.
    pub growth_ok: bool,
    pub sum_residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub steps: Vec<IterationStep>,
    pub first_violation: Option<usize>,
    pub max_sum_residual: f64,
}

impl IterationReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

pub fn iterate_decomposition<F: DecompositionFlow>(
    flow: &F,
    x: &F::State,
    cert: &AttractionCertificate,
    n_max: usize,
    tol: Tolerance,
) -> Result<IterationReport> {
    let (alpha, beta, j_star, r_star) = (cert.alpha_star, cert.tec.beta_star, cert.tec.j_star, cert.tec.r_star);
    let mut xs = x.clone();
    let mut y = x.clone();
    let mut z = flow.zero(x);
    let y0 = flow.base_norm(&y);
    let first = IterationStep {
        n: 0,
        y_norm: y0,
        z_norm: 0.0,
        y_bound: cert.r0,
        z_bound: r_star,
        contraction_ok: true,
        growth_ok: true,
        sum_residual: 0.0,
        ok: tol.holds(y0, cert.r0),
    };
    let mut steps = vec![first];
    let mut max_sum_residual: f64 = 0.0;
    for n in 1..=n_max {
        let (prev_y, prev_z) = (flow.base_norm(&y), flow.strong_norm(&z));
        let (nx, ny, nz) = flow.advance(&xs, &y, &z)?;
        let residual = flow.sum_residual(&nx, &ny, &nz);
        if !(residual <= SUM_TOLERANCE) {
            return Err(Error::Consistency { t: n as f64 * cert.t_star, drift: residual });
        }
        max_sum_residual = max_sum_residual.max(residual);
        let (yn, zn) = (flow.base_norm(&ny), flow.strong_norm(&nz));
        let y_bound = alpha.powi(n as i32) * cert.r0;
        let contraction_ok = tol.holds(yn, alpha * prev_y);
        let growth_ok = tol.holds(zn, beta * prev_z + j_star);
        let ok = contraction_ok && growth_ok && tol.holds(yn, y_bound) && tol.holds(zn, r_star);
        steps.push(IterationStep {
            n,
            y_norm: yn,
            z_norm: zn,
            y_bound,
            z_bound: r_star,
            contraction_ok,
            growth_ok,
            sum_residual: residual,
            ok,
        });
        xs = nx;
        y = ny;
        z = nz;
    }
    let first_violation = steps.iter().find(|s| !s.ok).map(|s| s.n);
    Ok(IterationReport { steps, first_violation, max_sum_residual })
}

/// Single-time hypotheses `α⋆ < 1`, `β⋆ < 1`, `J⋆ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteHypotheses {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub j_star: f64,
    pub r0: f64,
}

impl DiscreteHypotheses {
    pub fn new(alpha_star: f64, beta_star: f64, j_star: f64, r0: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha_star) {
            return Err(Error::Precondition(format!("α⋆ must lie in [0, 1), got {alpha_star}")));
        }
        if !(0.0..1.0).contains(&beta_star) {
            return Err(Error::Precondition(format!("β⋆ must lie in [0, 1), got {beta_star}")));
        }
        if !(j_star >= 0.0 && r0 >= 0.0) {
            return Err(Error::Precondition("J⋆ and R₀ must be nonnegative".into()));
        }
        Ok(Self { alpha_star, beta_star, j_star, r0 })
    }

    /// `R⋆ = 2 J⋆ / (1 − β⋆)`.
    pub fn r_star(&self) -> f64 {
        2.0 * self.j_star / (1.0 - self.beta_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteViolation {
    pub sample: usize,
    pub n: usize,
    pub dist: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteReport {
    pub samples: usize,
    pub checks: usize,
    /// Largest `dist / (α⋆ⁿ R₀)` over the checks with a positive bound.
    pub worst_ratio: f64,
    pub violations: Vec<DiscreteViolation>,
}

/// Checks `dist(S(n t⋆)x, B_𝒱(R⋆)) ≤ α⋆ⁿ R₀` along every sample.
pub fn main2_discrete_check<F>(
    flow: &F,
    hyp: &DiscreteHypotheses,
    samples: &[F::State],
    n_max: usize,
    tol: Tolerance,
) -> Result<DiscreteReport>
where
    F: DecompositionFlow + Sync,
    F::State: Send + Sync,
{
    let r_star = hyp.r_star();
    let per_sample: Vec<Result<Vec<(usize, f64, f64)>>> = samples
        .par_iter()
        .map(|x| {
            let mut out = Vec::with_capacity(n_max + 1);
            let mut xs = x.clone();
            let mut y = x.clone();
            let mut z = flow.zero(x);
            for n in 0..=n_max {
                if n > 0 {
                    let (nx, ny, nz) = flow.advance(&xs, &y, &z)?;
                    xs = nx;
                    y = ny;
                    z = nz;
                }
                let dist = flow.dist_to_strong_ball(&xs, r_star)?;
                out.push((n, dist, hyp.alpha_star.powi(n as i32) * hyp.r0));
            }
            Ok(out)
        })
        .collect();
    let mut report = DiscreteReport { samples: samples.len(), checks: 0, worst_ratio: 0.0, violations: Vec::new() };
    for (i, rows) in per_sample.into_iter().enumerate() {
        for (n, dist, bound) in rows? {
            report.checks += 1;
            if bound > 0.0 {
                report.worst_ratio = report.worst_ratio.max(dist / bound);
            }
            if !tol.holds(dist, bound) {
                report.violations.push(DiscreteViolation { sample: i, n, dist, bound });
            }
        }
    }
    Ok(report)
}
