use proptest::prelude::*;

use attractor_lab::certificates::{entering_time, gronwall_verify, DecayFn, GronwallParams, GrowthFn, TecCertificate};
use attractor_lab::metrics::{constraint_value, dist_to_ball, fit_rate, project_weighted, sample_ball, semidist, NormSpec};
use attractor_lab::semigroup::{equivalence_interval, lambda0, lambda1, step_linear};
use attractor_lab::{ModeGrid, PhaseState, PhiSpec, SpectralField, SpectralTransform};

fn grid() -> ModeGrid {
    ModeGrid::interval(6, 1.0).unwrap()
}

fn state(coeffs: &[f64]) -> PhaseState {
    PhaseState::from_flat(grid(), coeffs).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 12)
}

/// Catalog members with a compatible cutoff: `(φ(u) + λu)u ≥ 0` for `|u| > σ`.
fn phi_catalog() -> impl Strategy<Value = PhiSpec> {
    (0usize..3, 0.0..1.5f64, 0.0..5.0f64).prop_map(|(i, extra, shift)| {
        let gap = (1.0 - shift).max(0.0);
        match i {
            0 => PhiSpec::cubic_minus_linear(gap.sqrt() + extra + 0.01, shift).unwrap(),
            1 => PhiSpec::quintic(extra + 0.01).unwrap(),
            _ => PhiSpec::quintic_minus_linear(gap.powf(0.25) + extra + 0.01, shift).unwrap(),
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn splitting_identity_and_sign(phi in phi_catalog(), u in -6.0..6.0f64) {
        let (p, p0, p1) = (phi.phi(u), phi.phi0(u), phi.phi1(u));
        prop_assert!((p0 + p1 - p).abs() <= 1e-12 * p.abs().max(1.0));
        prop_assert!(p0 * u >= 0.0);
        prop_assert!((phi.psi(u).unwrap() * u - p0).abs() <= 1e-12 * p0.abs().max(1.0));
    }

    #[test]
    fn a_powers_compose(c in prop::collection::vec(-1.0..1.0f64, 6), p in -1.5..1.5f64, q in -1.5..1.5f64) {
        let u = SpectralField::from_coeffs(grid(), c).unwrap();
        let a = u.apply_a_power(p).apply_a_power(q);
        let b = u.apply_a_power(p + q);
        let scale = b.coeffs().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * scale);
    }

    #[test]
    fn parseval_on_nodes(c in prop::collection::vec(-1.0..1.0f64, 6)) {
        let u = SpectralField::from_coeffs(grid(), c).unwrap();
        let t = SpectralTransform::new(&grid());
        let quad: f64 = t.quadrature_weight() * t.to_physical(&u).iter().map(|v| v * v).sum::<f64>();
        prop_assert!((quad - u.norm_sq_r(0.0)).abs() <= 1e-10 * u.norm_sq_r(0.0).max(1e-300));
    }

    #[test]
    fn dist_to_ball_is_monotone_and_lipschitz(a in coeffs(), b in coeffs(), r1 in 0.0..20.0f64, r2 in 0.0..20.0f64) {
        let spec = NormSpec::new(0.0, 0.25).unwrap();
        let (x, y) = (state(&a), state(&b));
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        let d_lo = dist_to_ball(&x, lo, spec).unwrap();
        let d_hi = dist_to_ball(&x, hi, spec).unwrap();
        prop_assert!(d_hi <= d_lo + 1e-9 * d_lo.max(1.0));
        let dy = dist_to_ball(&y, lo, spec).unwrap();
        prop_assert!((d_lo - dy).abs() <= (&x - &y).norm(0.0) * (1.0 + 1e-9) + 1e-9);
        prop_assert_eq!(dist_to_ball(&x, 0.0, spec).unwrap(), x.norm(0.0));
    }

    #[test]
    fn projection_lands_on_the_ball(a in coeffs(), radius in 0.1..10.0f64) {
        let g = grid();
        let (wb, wball) = (PhaseState::weights(&g, 0.0), PhaseState::weights(&g, 1.0));
        let p = project_weighted(&a, &wb, &wball, radius).unwrap();
        let ball: f64 = p.point.iter().zip(&wball).map(|(z, w)| w * z * z).sum::<f64>().sqrt();
        prop_assert!(ball <= radius * (1.0 + 1e-9));
        if p.multiplier > 0.0 {
            prop_assert!((ball - radius).abs() <= 1e-6 * radius);
        }
    }

    #[test]
    fn constraint_decreases_in_multiplier(a in coeffs(), m1 in 0.0..100.0f64, m2 in 0.0..100.0f64) {
        prop_assume!(a.iter().any(|v| *v != 0.0) && m1 != m2);
        let g = grid();
        let (wb, wball) = (PhaseState::weights(&g, 0.0), PhaseState::weights(&g, 1.0));
        let (lo, hi) = (m1.min(m2), m1.max(m2));
        prop_assert!(constraint_value(&a, &wb, &wball, hi) < constraint_value(&a, &wb, &wball, lo));
    }

    #[test]
    fn semidistance_triangle(seed in any::<u64>(), n in 1usize..5) {
        let g = grid();
        let a = sample_ball(&g, 3.0, 0.0, n, seed);
        let b = sample_ball(&g, 3.0, 0.0, n + 1, seed ^ 1);
        let c = sample_ball(&g, 3.0, 0.0, n + 2, seed ^ 2);
        let ab = semidist(&a, &b, 0.0).unwrap();
        let bc = semidist(&b, &c, 0.0).unwrap();
        let ac = semidist(&a, &c, 0.0).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        let mut ab_union = a.clone();
        ab_union.extend(b.iter().cloned());
        prop_assert_eq!(semidist(&a, &ab_union, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn sampled_states_lie_in_the_ball(seed in any::<u64>(), radius in 0.0..10.0f64, r in 0.0..1.0f64) {
        let g = grid();
        let xs = sample_ball(&g, radius, r, 8, seed);
        prop_assert!(xs.iter().all(|x| x.norm(r) <= radius + 1e-12));
        prop_assert_eq!(xs, sample_ball(&g, radius, r, 8, seed));
    }

    #[test]
    fn energy_functionals_are_equivalent_norms(a in coeffs(), eps in 0.01..0.5f64) {
        let x = state(&a);
        prop_assume!(x.norm(0.0) > 1e-6);
        let (lo, hi) = equivalence_interval(eps, grid().lambda_one());
        let r0 = lambda0(&x, eps) / x.norm_sq(0.0);
        let r1 = lambda1(&x, eps) / x.norm_sq(0.25);
        prop_assert!(r0 >= lo - 1e-12 && r0 <= hi + 1e-12);
        prop_assert!(r1 >= lo - 1e-12 && r1 <= hi + 1e-12);
    }

    #[test]
    fn linear_propagator_is_a_semigroup(a in coeffs(), s in 0.0..3.0f64, t in 0.0..3.0f64) {
        let x = state(&a);
        let two = step_linear(&step_linear(&x, s), t);
        let one = step_linear(&x, s + t);
        prop_assert!(two.max_abs_diff(&one) <= 1e-12 * x.norm(0.0).max(1.0));
    }

    #[test]
    fn tec_identities_and_halving(beta in 0.0..0.99f64, b0 in 1.0..3.0f64, j in 0.0..5.0f64, z in 0.0..100.0f64) {
        let c = TecCertificate::from_values(1.0, beta, b0, j).unwrap();
        prop_assert!((c.r_star * (1.0 - beta) - 2.0 * j).abs() <= 1e-12 * j.max(1.0));
        prop_assert!(c.kappa > 1.0);
        if z > c.r_star {
            prop_assert!(c.one_step_bound(z) <= 0.5 * (1.0 + beta) * z * (1.0 + 1e-12));
        }
    }

    #[test]
    fn entering_time_reaches_r_star(beta in 0.0..0.95f64, j in 0.01..5.0f64, factor in 1.0..1e4f64) {
        let c = TecCertificate::from_values(0.7, beta, 1.0, j).unwrap();
        let radius = c.r_star * factor;
        let (n, t) = entering_time(radius, &c).unwrap();
        if radius > c.r_star {
            let shrunk = radius * (0.5 * (1.0 + beta)).powi(n as i32);
            prop_assert!(shrunk <= c.r_star * (1.0 + 1e-12));
            prop_assert!((t - n as f64 * 0.7).abs() < 1e-12);
        } else {
            prop_assert_eq!((n, t), (0, 0.0));
        }
    }

    #[test]
    fn gronwall_bound_dominates(
        eps in 0.1..5.0f64, nu in 0.1..5.0f64, k in 0.1..5.0f64,
        p in 0.0..3.0f64, q in 0.0..3.0f64, l0 in 0.0..10.0f64,
    ) {
        let params = GronwallParams::new(l0, eps, nu, k, GrowthFn::affine(p, q).unwrap()).unwrap();
        prop_assert!(gronwall_verify(&params, 1e-2, 5.0).unwrap().passed);
    }

    #[test]
    fn rate_fit_recovers_exact_data(c in 0.1..10.0f64, w in 0.0..3.0f64) {
        let t: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|t| c * (-w * t).exp()).collect();
        let fit = fit_rate(&t, &v).unwrap();
        prop_assert!((fit.c - c).abs() < 1e-9 * c);
        prop_assert!((fit.omega - w).abs() < 1e-9);
    }

    #[test]
    fn decay_functions_are_nonincreasing(a in 0.0..5.0f64, b in 0.01..3.0f64, floor in 0.0..0.99f64, s in 0.0..10.0f64, t in 0.0..10.0f64) {
        let d = DecayFn::exp_floor(a, b, floor).unwrap();
        let (lo, hi) = (s.min(t), s.max(t));
        prop_assert!(d.eval(hi) <= d.eval(lo));
        prop_assert!(d.limit() < 1.0);
    }
}
