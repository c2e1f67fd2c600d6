//! Exact per-mode propagator of `u'' + λu' + λu = 0`.
//!
//! Each Dirichlet mode is a 2×2 system with companion matrix `[[0, 1], [−λ, −λ]]`
//! and roots `μ± = (−λ ± sqrt(λ² − 4λ)) / 2`: a complex pair for `λ < 4`, a double
//! root at `λ = 4`, and two real roots for `λ > 4`.

use serde::Serialize;

use crate::spectral::{ModeGrid, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompanionRoots {
    Complex { re: f64, im: f64 },
    Double(f64),
    /// `(μ₊, μ₋)` with `μ₋ < μ₊ < 0`.
    Real(f64, f64),
}

pub fn companion_roots(lambda: f64) -> CompanionRoots {
    let disc = lambda * lambda - 4.0 * lambda;
    if disc > 0.0 {
        let minus = -0.5 * (lambda + disc.sqrt());
        CompanionRoots::Real(lambda / minus, minus)
    } else if disc == 0.0 {
        CompanionRoots::Double(-0.5 * lambda)
    } else {
        CompanionRoots::Complex { re: -0.5 * lambda, im: 0.5 * (-disc).sqrt() }
    }
}

/// `−max Re μ`, the slow decay rate of one mode.
pub fn slow_rate(lambda: f64) -> f64 {
    match companion_roots(lambda) {
        CompanionRoots::Real(plus, _) => -plus,
        CompanionRoots::Double(mu) => -mu,
        CompanionRoots::Complex { re, .. } => -re,
    }
}

/// `exp(t [[0, 1], [−λ, −λ]])` as a row-major 2×2 matrix.
pub fn mode_propagator(lambda: f64, t: f64) -> [[f64; 2]; 2] {
    // exp(Mt) = e^{st}[c I + b (M − sI)], s = −λ/2, q² = λ²/4 − λ
    let s = -0.5 * lambda;
    let q2 = 0.25 * lambda * lambda - lambda;
    let z = q2 * t * t;
    let (a, b) = if z.abs() < 1e-6 {
        let e = (s * t).exp();
        let c = 1.0 + z / 2.0 + z * z / 24.0;
        let sh = t * (1.0 + z / 6.0 + z * z / 120.0);
        (e * c, e * sh)
    } else if q2 > 0.0 {
        let q = q2.sqrt();
        let minus = s - q;
        let plus = lambda / minus;
        let (ep, em) = ((plus * t).exp(), (minus * t).exp());
        (0.5 * (ep + em), (ep - em) / (2.0 * q))
    } else {
        let w = (-q2).sqrt();
        let e = (s * t).exp();
        (e * (w * t).cos(), e * (w * t).sin() / w)
    };
    let h = 0.5 * lambda * b;
    [[a + h, b], [-lambda * b, a - h]]
}

/// Applies the homogeneous linear semigroup `L(t)` to a phase state.
pub fn step_linear(state: &PhaseState, dt: f64) -> PhaseState {
    let lam = state.grid().eigenvalues();
    let mut out = state.clone();
    let u = state.pos.coeffs();
    let v = state.vel.coeffs();
    let mut new_u = vec![0.0; u.len()];
    let mut new_v = vec![0.0; v.len()];
    for (k, &l) in lam.iter().enumerate() {
        let p = mode_propagator(l, dt);
        new_u[k] = p[0][0] * u[k] + p[0][1] * v[k];
        new_v[k] = p[1][0] * u[k] + p[1][1] * v[k];
    }
    out.pos.coeffs_mut().copy_from_slice(&new_u);
    out.vel.coeffs_mut().copy_from_slice(&new_v);
    out
}

/// `(M, δ)` with `‖L(t)x‖ ≤ M e^{−δt} ‖x‖` in every `𝓗^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearDecay {
    pub m: f64,
    pub delta: f64,
}

/// Spectral norm of `L(t)` restricted to one mode in the `𝓗^r` weighting.
///
/// The weights of a mode are `λ^r (λ, 1)`; the common factor `λ^r` cancels, so the
/// block norm does not depend on `r`.
pub fn mode_operator_norm(lambda: f64, t: f64) -> f64 {
    let p = mode_propagator(lambda, t);
    let root = lambda.sqrt();
    let (a, b, c, d) = (p[0][0], root * p[0][1], p[1][0] / root, p[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = (s * s - 4.0 * det * det).max(0.0);
    (0.5 * (s + disc.sqrt())).sqrt()
}

fn decay_time_grid(delta: f64) -> Vec<f64> {
    let mut times = vec![0.0];
    let n_log = 400;
    for i in 0..n_log {
        let e = -5.0 + 5.0 * i as f64 / n_log as f64;
        times.push(10f64.powf(e));
    }
    let t_end = (40.0 / delta).max(1.0);
    let n_lin = 2000;
    for i in 0..=n_lin {
        times.push(1.0 + (t_end - 1.0) * i as f64 / n_lin as f64);
    }
    times
}

pub fn linear_decay_constants(grid: &ModeGrid) -> LinearDecay {
    let mut lams = grid.eigenvalues();
    lams.sort_by(f64::total_cmp);
    lams.dedup();
    let delta = lams.iter().map(|&l| slow_rate(l)).fold(f64::INFINITY, f64::min);
    let times = decay_time_grid(delta);
    let m = lams
        .iter()
        .flat_map(|&l| times.iter().map(move |&t| mode_operator_norm(l, t) * (delta * t).exp()))
        .fold(1.0, f64::max);
    LinearDecay { m, delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_stays_zero() {
        let g = ModeGrid::interval(8, 1.0).unwrap();
        let z = PhaseState::zeros(g);
        assert_eq!(step_linear(&z, 0.7), z);
    }

    #[test]
    fn real_branch_matches_root_oracle() {
        let lam = PI * PI;
        // oracle: roots of μ² + λμ + λ = 0 straight from the quadratic formula
        let disc = (lam * lam - 4.0 * lam).sqrt();
        let (mp, mm) = ((-lam + disc) / 2.0, (-lam - disc) / 2.0);
        assert!((mp + 1.12919).abs() < 1e-5);
        assert!((mm + 8.74041).abs() < 1e-5);
        match companion_roots(lam) {
            CompanionRoots::Real(p, m) => {
                assert!((p - mp).abs() < 1e-12);
                assert!((m - mm).abs() < 1e-12);
            }
            other => panic!("expected real roots, got {other:?}"),
        }
        let t = 1.0;
        let (a, b) = (mm / (mm - mp), -mp / (mm - mp));
        let u = a * (mp * t).exp() + b * (mm * t).exp();
        let v = a * mp * (mp * t).exp() + b * mm * (mm * t).exp();
        let p = mode_propagator(lam, t);
        assert!((p[0][0] - u).abs() < 1e-12);
        assert!((p[1][0] - v).abs() < 1e-12);
    }

    #[test]
    fn double_root_jordan_block() {
        assert_eq!(companion_roots(4.0), CompanionRoots::Double(-2.0));
        for t in [0.0, 0.3, 1.0, 2.5] {
            let p = mode_propagator(4.0, t);
            let e = (-2.0 * t).exp();
            assert!((p[0][0] - (1.0 + 2.0 * t) * e).abs() < 1e-14);
            assert!((p[1][0] + 4.0 * t * e).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_branch_matches_oscillator() {
        // λ = 1: μ = −1/2 ± i √3/2
        let lam = 1.0;
        let w = 3f64.sqrt() / 2.0;
        for t in [0.1f64, 1.0, 4.0] {
            let e = (-0.5 * t).exp();
            let u = e * ((w * t).cos() + 0.5 / w * (w * t).sin());
            let p = mode_propagator(lam, t);
            assert!((p[0][0] - u).abs() < 1e-13);
            // (0, 1) initial velocity: u = e^{-t/2} sin(wt)/w
            assert!((p[0][1] - e * (w * t).sin() / w).abs() < 1e-13);
        }
    }

    #[test]
    fn propagator_is_continuous_across_branches() {
        let t = 0.8;
        let below = mode_propagator(4.0 - 1e-7, t);
        let at = mode_propagator(4.0, t);
        let above = mode_propagator(4.0 + 1e-7, t);
        for i in 0..2 {
            for j in 0..2 {
                assert!((below[i][j] - at[i][j]).abs() < 1e-6);
                assert!((above[i][j] - at[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn propagator_semigroup_property() {
        for lam in [0.5, 4.0, 9.87, 1e4] {
            let a = mode_propagator(lam, 0.3);
            let b = mode_propagator(lam, 0.45);
            let ab = mode_propagator(lam, 0.75);
            for i in 0..2 {
                for j in 0..2 {
                    let prod = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                    assert!((prod - ab[i][j]).abs() < 1e-12 * (1.0 + lam));
                }
            }
        }
    }

    #[test]
    fn stiff_modes_do_not_overflow() {
        let p = mode_propagator(1.6e5, 20.0);
        assert!(p.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn decay_constants_single_mode() {
        let g = ModeGrid::interval(1, 1.0).unwrap();
        let d = linear_decay_constants(&g);
        assert!((d.delta - 1.12919).abs() < 1e-5);
        assert!(d.m >= 1.0);
    }

    #[test]
    fn decay_constants_many_modes() {
        let g = ModeGrid::interval(32, 1.0).unwrap();
        let d = linear_decay_constants(&g);
        assert!(d.delta > 1.0 && d.delta <= 1.13, "δ = {}", d.delta);
        // bound holds on sampled basis states and times
        let lam = g.eigenvalues();
        for k in [0usize, 5, 31] {
            for basis in 0..2 {
                let mut x = PhaseState::zeros(g);
                if basis == 0 {
                    x.pos.coeffs_mut()[k] = 1.0;
                } else {
                    x.vel.coeffs_mut()[k] = 1.0;
                }
                for t in [0.0, 1e-3, 0.05, 0.5, 2.0, 10.0] {
                    let y = step_linear(&x, t);
                    let lhs = y.norm(0.0);
                    let rhs = d.m * (-d.delta * t).exp() * x.norm(0.0);
                    assert!(lhs <= rhs * (1.0 + 1e-9), "k={k} λ={} t={t}", lam[k]);
                }
            }
        }
    }

    #[test]
    fn step_linear_composes() {
        let g = ModeGrid::interval(6, 1.0).unwrap();
        let x = PhaseState::new(
            SpectralField::from_coeffs(g, vec![1.0, -0.5, 0.2, 0.0, 0.1, 0.05]).unwrap(),
            SpectralField::from_coeffs(g, vec![0.0, 1.0, 0.0, -0.3, 0.0, 0.2]).unwrap(),
        )
        .unwrap();
        let two = step_linear(&step_linear(&x, 0.4), 0.6);
        let one = step_linear(&x, 1.0);
        assert!(two.max_abs_diff(&one) < 1e-13);
    }
}
