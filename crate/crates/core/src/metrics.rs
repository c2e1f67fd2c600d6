//! Semidistances between finite ensembles, distance to a ball of a stronger norm,
//! rate fitting and deterministic sampling of balls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ModeGrid, PhaseState, SpectralField};

/// Values at or below this are dropped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-15;
const MAX_BISECTIONS: usize = 200;

/// `sup_{a ∈ A} inf_{b ∈ B} ‖a − b‖_{𝓗^r}`.
pub fn semidist(a: &[PhaseState], b: &[PhaseState], r: f64) -> Result<f64> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = f64::INFINITY;
        for y in b {
            if x.grid() != y.grid() {
                return Err(Error::Config("semidistance between states on different grids".into()));
            }
            best = best.min((x - y).norm(r));
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// Distance measured in `𝓗^{r_base}` to a ball of `𝓗^{r_ball}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    r_base: f64,
    r_ball: f64,
}

impl NormSpec {
    pub fn new(r_base: f64, r_ball: f64) -> Result<Self> {
        if !(r_ball > r_base) {
            return Err(Error::Config(format!(
                "ball exponent {r_ball} must exceed the base exponent {r_base}"
            )));
        }
        Ok(Self { r_base, r_ball })
    }

    pub fn r_base(&self) -> f64 {
        self.r_base
    }

    pub fn r_ball(&self) -> f64 {
        self.r_ball
    }
}

/// Nearest point of `{Σ w_ball z² ≤ ρ²}` to `x` in the `Σ w_base (x − z)²` metric.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProjection {
    pub point: Vec<f64>,
    pub distance: f64,
    /// KKT multiplier; zero for interior points.
    pub multiplier: f64,
}

fn weighted_sq(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| b * a * a).sum()
}

/// Ball-constraint value `Σ w_ball z(μ)²` along the multiplier path.
pub fn constraint_value(x: &[f64], w_base: &[f64], w_ball: &[f64], mu: f64) -> f64 {
    x.iter()
        .zip(w_base.iter().zip(w_ball))
        .map(|(&xi, (&b, &bb))| {
            let z = xi / (1.0 + mu * bb / b);
            bb * z * z
        })
        .sum()
}

pub fn project_weighted(x: &[f64], w_base: &[f64], w_ball: &[f64], radius: f64) -> Result<BallProjection> {
    if x.len() != w_base.len() || x.len() != w_ball.len() {
        return Err(Error::Config("weights and point differ in length".into()));
    }
    if !(radius >= 0.0) {
        return Err(Error::Precondition(format!("ball radius must be nonnegative, got {radius}")));
    }
    if w_base.iter().chain(w_ball).any(|w| !(*w > 0.0)) {
        return Err(Error::Config("norm weights must be positive".into()));
    }
    let target = radius * radius;
    if weighted_sq(x, w_ball) <= target {
        return Ok(BallProjection { point: x.to_vec(), distance: 0.0, multiplier: 0.0 });
    }
    if radius == 0.0 {
        return Ok(BallProjection {
            point: vec![0.0; x.len()],
            distance: weighted_sq(x, w_base).sqrt(),
            multiplier: f64::INFINITY,
        });
    }
    let g = |mu: f64| constraint_value(x, w_base, w_ball, mu);
    let mut hi = 1.0;
    while g(hi) > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("no feasible multiplier found".into()));
        }
    }
    let mut lo = 0.0;
    let mut converged = false;
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 1e-15 * hi || g(lo) - g(hi) <= 1e-15 * target {
            converged = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::Numerical("ball projection bisection did not converge".into()));
    }
    let point: Vec<f64> = x
        .iter()
        .zip(w_base.iter().zip(w_ball))
        .map(|(&xi, (&b, &bb))| xi / (1.0 + hi * bb / b))
        .collect();
    let diff: Vec<f64> = x.iter().zip(&point).map(|(a, b)| a - b).collect();
    Ok(BallProjection { distance: weighted_sq(&diff, w_base).sqrt(), point, multiplier: hi })
}

/// `inf_{‖z‖_{r_ball} ≤ ρ} ‖x − z‖_{r_base}` with the product-space weights.
pub fn dist_to_ball(x: &PhaseState, radius: f64, spec: NormSpec) -> Result<f64> {
    if radius == 0.0 {
        return Ok(x.norm(spec.r_base));
    }
    let grid = x.grid();
    let wb = PhaseState::weights(grid, spec.r_base);
    let wball = PhaseState::weights(grid, spec.r_ball);
    project_weighted(&x.to_flat(), &wb, &wball, radius).map(|p| p.distance)
}

/// Least-squares fit `value ≈ C e^{−ωt}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub omega: f64,
    /// Largest excess of the data over the fitted curve.
    pub residual: f64,
    pub n_points: usize,
}

impl RateFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.c * (-self.omega * t).exp()
    }
}

pub fn fit_rate(times: &[f64], values: &[f64]) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::Config("times and values differ in length".into()));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| t.is_finite() && v.is_finite() && **v > LOG_FLOOR)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let fit = RateFit { c: (my - slope * mt).exp(), omega: -slope, residual: 0.0, n_points: pts.len() };
    let residual = times
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite() && **v > LOG_FLOOR)
        .map(|(&t, &v)| v - fit.eval(t))
        .fold(0.0, f64::max);
    Ok(RateFit { residual, ..fit })
}

/// Deterministic states with `‖·‖_{𝓗^r}` uniform in `[0, R]` and a decaying spectral profile.
pub fn sample_ball(grid: &ModeGrid, radius: f64, r: f64, count: usize, seed: u64) -> Vec<PhaseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lam = grid.eigenvalues();
    let index_norm: Vec<f64> = (0..grid.len())
        .map(|i| grid.multi_index(i).iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt())
        .collect();
    (0..count)
        .map(|_| {
            let mut draw = |exp: f64| -> Vec<f64> {
                lam.iter()
                    .zip(&index_norm)
                    .map(|(&l, &k)| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * l.powf(-exp / 2.0) / k
                    })
                    .collect()
            };
            let pos = draw(r + 1.0);
            let vel = draw(r);
            let s = PhaseState::new(
                SpectralField::from_coeffs(*grid, pos).expect("length matches grid"),
                SpectralField::from_coeffs(*grid, vel).expect("length matches grid"),
            )
            .expect("same grid");
            let target = radius * rng.random::<f64>();
            let n = s.norm(r);
            if n == 0.0 || target == 0.0 {
                PhaseState::zeros(*grid)
            } else {
                &s * (target / n)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> ModeGrid {
        ModeGrid::interval(4, 1.0).unwrap()
    }

    #[test]
    fn semidist_examples() {
        let grid = g();
        let a = sample_ball(&grid, 2.0, 0.0, 3, 1);
        let mut b = a.clone();
        b.extend(sample_ball(&grid, 2.0, 0.0, 2, 2));
        assert_eq!(semidist(&a, &b, 0.0).unwrap(), 0.0);

        let origin = vec![PhaseState::zeros(grid)];
        let mut far = PhaseState::zeros(grid);
        far.vel.coeffs_mut()[0] = 3.0;
        far.vel.coeffs_mut()[1] = 4.0;
        assert!((semidist(&origin, &[far], 0.0).unwrap() - 5.0).abs() < 1e-15);

        assert!(matches!(semidist(&origin, &[], 0.0), Err(Error::EmptySet)));
        assert_eq!(semidist(&[], &origin, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn one_variable_kkt() {
        let p = project_weighted(&[3.0], &[1.0], &[4.0], 2.0).unwrap();
        assert!((p.point[0] - 1.0).abs() < 1e-12);
        assert!((p.distance - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interior_and_zero_radius() {
        let p = project_weighted(&[0.5, 0.1], &[1.0, 1.0], &[2.0, 3.0], 5.0).unwrap();
        assert_eq!(p.distance, 0.0);
        let x = sample_ball(&g(), 3.0, 0.0, 1, 9).remove(0);
        let spec = NormSpec::new(0.0, 0.25).unwrap();
        assert_eq!(dist_to_ball(&x, 0.0, spec).unwrap(), x.norm(0.0));
    }

    #[test]
    fn norm_spec_direction() {
        assert!(NormSpec::new(0.25, 0.0).is_err());
        assert!(NormSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn rate_fit_examples() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let f = fit_rate(&t, &v).unwrap();
        assert!((f.c - 3.0).abs() < 1e-10 && (f.omega - 0.7).abs() < 1e-10);

        let flat = fit_rate(&t, &vec![2.0; t.len()]).unwrap();
        assert!(flat.omega.abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noisy: Vec<f64> = v.iter().map(|x| x * (1.0 + 0.01 * rng.random_range(-1.0..1.0))).collect();
        let nf = fit_rate(&t, &noisy).unwrap();
        assert!((nf.omega - 0.7).abs() < 0.05 * 0.7);

        assert!(matches!(fit_rate(&[0.0, 1.0], &[1.0, 0.5]), Err(Error::InsufficientData { .. })));
        assert!(matches!(
            fit_rate(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 0.0, 1e-20]),
            Err(Error::InsufficientData { got: 1, .. })
        ));
    }

    #[test]
    fn sampling_contract() {
        let grid = g();
        assert!(sample_ball(&grid, 0.0, 0.0, 5, 1).iter().all(|s| s.norm(0.0) == 0.0));
        let a = sample_ball(&grid, 2.5, 0.25, 50, 7);
        assert!(a.iter().all(|s| s.norm(0.25) <= 2.5 + 1e-12));
        assert_eq!(a, sample_ball(&grid, 2.5, 0.25, 50, 7));
        assert_ne!(a, sample_ball(&grid, 2.5, 0.25, 50, 8));
    }
}
