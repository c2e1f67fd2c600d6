use crate::error::{Error, Result};
use crate::spectral::{ModeGrid, PhaseState};

/// `‖η‖²_{𝓗^r} + ε‖v‖²_{r+1} + 2ε⟨v_t, v⟩_r` for `η = (v, v_t)`.
pub fn energy(state: &PhaseState, r: f64, eps: f64) -> f64 {
    state.norm_sq(r) + eps * state.pos.norm_sq_r(r + 1.0) + 2.0 * eps * state.vel.inner_r(&state.pos, r)
}

/// `Λ0 = ‖η‖²_𝓗 + ε‖v‖₁² + 2ε⟨v_t, v⟩`.
pub fn lambda0(eta: &PhaseState, eps: f64) -> f64 {
    energy(eta, 0.0, eps)
}

/// `Λ1 = ‖ζ‖²_{𝓗^{1/4}} + ε‖w‖²_{5/4} + 2ε⟨w_t, w⟩_{1/4}`.
pub fn lambda1(zeta: &PhaseState, eps: f64) -> f64 {
    energy(zeta, 0.25, eps)
}

/// Interval `[lo, hi]` with `lo ‖·‖² ≤ Λ ≤ hi ‖·‖²`, from `|⟨a, b⟩_r| ≤ ‖a‖_r ‖b‖_{r+1} / sqrt(λ₁)`.
pub fn equivalence_interval(eps: f64, lambda_one: f64) -> (f64, f64) {
    let c = eps / lambda_one.sqrt();
    (1.0 - c, 1.0 + eps + c)
}

/// Positivity guard with `θ = 1/2`: on every mode `2ε|⟨v_t, v⟩| ≤ (1 − θ)‖η‖²`.
///
/// On a single mode the worst ratio of the cross term to the norm is `ε / sqrt(λ_k)`.
pub fn check_energy_parameter(grid: &ModeGrid, eps: f64) -> Result<()> {
    const THETA: f64 = 0.5;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("energy parameter ε must lie in (0, 1), got {eps}")));
    }
    let worst = grid
        .eigenvalues()
        .iter()
        .map(|l| eps / l.sqrt())
        .fold(0.0, f64::max);
    if worst > 1.0 - THETA {
        return Err(Error::Config(format!(
            "ε = {eps} too large: cross term reaches {worst:.3} of the norm"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> ModeGrid {
        ModeGrid::interval(8, 1.0).unwrap()
    }

    #[test]
    fn hand_values() {
        let g = grid();
        let e1 = SpectralField::basis(g, &[1]).unwrap();
        let pos_only = PhaseState::new(e1.clone(), SpectralField::zeros(g)).unwrap();
        assert!((lambda0(&pos_only, 0.1) - 1.1 * PI * PI).abs() < 1e-12);
        assert!((lambda0(&pos_only, 0.1) - 10.8566).abs() < 1e-4);

        let vel_only = PhaseState::new(SpectralField::zeros(g), e1).unwrap();
        for eps in [0.01, 0.05, 0.3] {
            assert!((lambda0(&vel_only, eps) - 1.0).abs() < 1e-14);
        }
        assert_eq!(lambda1(&PhaseState::zeros(g), 0.05), 0.0);
    }

    #[test]
    fn parameter_guard() {
        let g = grid();
        assert!(check_energy_parameter(&g, 0.05).is_ok());
        assert!(check_energy_parameter(&g, 0.0).is_err());
        assert!(check_energy_parameter(&g, 1.0).is_err());
        // λ₁ = 1 on L = π: ε must stay below 1/2
        let wide = ModeGrid::interval(4, PI).unwrap();
        assert!(check_energy_parameter(&wide, 0.6).is_err());
    }

    #[test]
    fn functionals_are_norm_equivalent() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eps = 0.05;
        let (lo, hi) = equivalence_interval(eps, g.lambda_one());
        for _ in 0..1000 {
            let pos: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let vel: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = PhaseState::new(
                SpectralField::from_coeffs(g, pos).unwrap(),
                SpectralField::from_coeffs(g, vel).unwrap(),
            )
            .unwrap();
            let r0 = lambda0(&s, eps) / s.norm_sq(0.0);
            let r1 = lambda1(&s, eps) / s.norm_sq(0.25);
            assert!(r0 >= lo - 1e-12 && r0 <= hi + 1e-12, "Λ0 ratio {r0}");
            assert!(r1 >= lo - 1e-12 && r1 <= hi + 1e-12, "Λ1 ratio {r1}");
        }
    }
}
