//! The Gronwall-type bound for `Λ' + εΛ ≤ k e^{−νt}Λ + J(t)`.

use serde::Serialize;

use crate::error::{Error, Result};

use super::classes::GrowthFn;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 10.0;
const RELATIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallParams {
    pub lambda0: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub k: f64,
    pub j: GrowthFn,
}

impl GronwallParams {
    pub fn new(lambda0: f64, epsilon: f64, nu: f64, k: f64, j: GrowthFn) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Precondition(format!("ε must be positive, got {epsilon}")));
        }
        if !(nu > 0.0) {
            return Err(Error::Precondition(format!("ν must be positive, got {nu}")));
        }
        if !(k >= 0.0) {
            return Err(Error::Precondition(format!("k must be nonnegative, got {k}")));
        }
        if !(lambda0 >= 0.0) {
            return Err(Error::Precondition(format!("Λ(0) must be nonnegative, got {lambda0}")));
        }
        Ok(Self { lambda0, epsilon, nu, k, j })
    }
}

/// `e^{k/ν} e^{−εt} Λ(0) + ε⁻¹ e^{k/ν} J(t)`.
pub fn gronwall_bound(p: &GronwallParams, t: f64) -> f64 {
    let amp = (p.k / p.nu).exp();
    amp * (-p.epsilon * t).exp() * p.lambda0 + amp * p.j.eval(t) / p.epsilon
}

/// RK4 solution of the equality `Λ' = −εΛ + k e^{−νt}Λ + J(t)` on `0, h, 2h, …, horizon`.
pub fn integrate_equality(p: &GronwallParams, h: f64, horizon: f64) -> Vec<(f64, f64)> {
    let rhs = |t: f64, l: f64| -p.epsilon * l + p.k * (-p.nu * t).exp() * l + p.j.eval(t);
    let steps = (horizon / h).round().max(1.0) as usize;
    let h = horizon / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut l = p.lambda0;
    out.push((0.0, l));
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, l);
        let k2 = rhs(t + 0.5 * h, l + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, l + 0.5 * h * k2);
        let k4 = rhs(t + h, l + h * k3);
        l += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(((i + 1) as f64 * h, l));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallReport {
    pub points: usize,
    /// Largest `Λ(t) / bound(t)` on the grid.
    pub max_ratio: f64,
    pub violations: usize,
    pub first_violation: Option<f64>,
    pub passed: bool,
}

pub fn gronwall_verify(p: &GronwallParams, h: f64, horizon: f64) -> Result<GronwallReport> {
    if !(h > 0.0 && horizon > 0.0) {
        return Err(Error::Precondition("step and horizon must be positive".into()));
    }
    let path = integrate_equality(p, h, horizon);
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    let mut first_violation = None;
    for &(t, l) in &path {
        let b = gronwall_bound(p, t);
        if b > 0.0 {
            max_ratio = max_ratio.max(l / b);
        }
        if l > b * (1.0 + RELATIVE_SLACK) {
            violations += 1;
            first_violation.get_or_insert(t);
        }
    }
    Ok(GronwallReport { points: path.len(), max_ratio, violations, first_violation, passed: violations == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_decay_is_attained() {
        let p = GronwallParams::new(1.0, 0.7, 1.0, 0.0, GrowthFn::zero()).unwrap();
        let r = gronwall_verify(&p, DEFAULT_STEP, DEFAULT_HORIZON).unwrap();
        assert!(r.passed);
        assert!((r.max_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_with_growing_coefficient() {
        let p = GronwallParams::new(1.0, 1.0, 1.0, 1.0, GrowthFn::zero()).unwrap();
        for (t, l) in integrate_equality(&p, 1e-3, 10.0) {
            let exact = (1.0 - (-t).exp()).exp() * (-t).exp();
            assert!((l - exact).abs() <= 1e-11 * exact.max(1e-300), "t={t}");
            assert!(l <= gronwall_bound(&p, t));
        }
    }

    #[test]
    fn closed_form_with_source() {
        let p = GronwallParams::new(3.0, 1.0, 1.0, 0.0, GrowthFn::constant(1.0).unwrap()).unwrap();
        for (t, l) in integrate_equality(&p, 1e-3, 10.0) {
            assert!((l - (1.0 + 2.0 * (-t).exp())).abs() < 1e-12);
            assert!((gronwall_bound(&p, t) - (3.0 * (-t).exp() + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_rates() {
        assert!(GronwallParams::new(1.0, 0.0, 1.0, 1.0, GrowthFn::zero()).is_err());
        assert!(GronwallParams::new(1.0, 1.0, -1.0, 1.0, GrowthFn::zero()).is_err());
    }
}
