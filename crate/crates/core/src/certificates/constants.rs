use serde::Serialize;

use crate::error::{Error, Result};

use super::classes::{DecayFn, GrowthFn};

/// Smallest admissible `t⋆`, returned when `β(0)` already meets the target.
pub const MIN_T_STAR: f64 = 1e-9;
const T_STAR_TOLERANCE: f64 = 1e-9;

/// Smallest `t⋆` (to `1e−9`) with `β(t⋆) ≤ 1 − margin (1 − β(∞))`.
pub fn choose_t_star(beta: &DecayFn, margin: f64) -> Result<f64> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Config(format!("margin must lie in (0, 1), got {margin}")));
    }
    let target = 1.0 - margin * (1.0 - beta.limit());
    if beta.eval(0.0) <= target {
        return Ok(MIN_T_STAR);
    }
    let mut hi = match beta.horizon() {
        Some(end) => {
            if beta.eval(end) > target {
                return Err(Error::CertificateUnavailable(format!(
                    "tabulated decay stays above {target} on its table (last value {})",
                    beta.eval(end)
                )));
            }
            end
        }
        None => {
            let mut hi = 1.0;
            while beta.eval(hi) > target {
                hi *= 2.0;
                if hi > 1e15 {
                    return Err(Error::Numerical("decay never reaches its target".into()));
                }
            }
            hi
        }
    };
    let mut lo = 0.0;
    while hi - lo > T_STAR_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if beta.eval(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TecResiduals {
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub kappa: f64,
}

/// Constants of the basic inequality `‖U(t⋆)z‖ ≤ β⋆‖z‖ + ½(1 − β⋆)R⋆`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TecCertificate {
    pub t_star: f64,
    pub beta_star: f64,
    #[serde(rename = "R_star")]
    pub r_star: f64,
    pub kappa: f64,
    pub beta_zero: f64,
    #[serde(rename = "J_star")]
    pub j_star: f64,
    pub warnings: Vec<String>,
    pub residuals: TecResiduals,
}

impl TecCertificate {
    pub fn from_values(t_star: f64, beta_star: f64, beta_zero: f64, j_star: f64) -> Result<Self> {
        if !(t_star.is_finite() && t_star > 0.0) {
            return Err(Error::Precondition(format!("t⋆ must be positive, got {t_star}")));
        }
        if !(beta_star < 1.0) {
            return Err(Error::Precondition(format!("β(t⋆) = {beta_star} is not below 1")));
        }
        if !(j_star >= 0.0) {
            return Err(Error::Precondition(format!("J(t⋆) = {j_star} is negative")));
        }
        let r_star = 2.0 * j_star / (1.0 - beta_star);
        let kappa = beta_zero + 0.5 * (1.0 - beta_star);
        let mut warnings = Vec::new();
        if beta_zero < 1.0 {
            let msg = format!("β(0) = {beta_zero} < 1 cannot come from a solution operator");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        let residuals = TecResiduals {
            r_star: (r_star * (1.0 - beta_star) - 2.0 * j_star).abs(),
            kappa: (kappa - beta_zero - 0.5 * (1.0 - beta_star)).abs(),
        };
        Ok(Self { t_star, beta_star, r_star, kappa, beta_zero, j_star, warnings, residuals })
    }

    /// Right-hand side of the basic inequality at `t⋆`.
    pub fn one_step_bound(&self, z_norm: f64) -> f64 {
        self.beta_star * z_norm + 0.5 * (1.0 - self.beta_star) * self.r_star
    }

    /// Radius `κR⋆` of the absorbing ball.
    pub fn absorbing_radius(&self) -> f64 {
        self.kappa * self.r_star
    }
}

pub fn tec_constants(beta: &DecayFn, j: &GrowthFn, t_star: f64) -> Result<TecCertificate> {
    TecCertificate::from_values(t_star, beta.eval(t_star), beta.eval(0.0), j.eval(t_star))
}

/// `(n_R, t_R)`: after `t_R` the image of `B(R)` stays in `B(κR⋆)`.
pub fn entering_time(radius: f64, cert: &TecCertificate) -> Result<(u64, f64)> {
    if !(radius >= 0.0) {
        return Err(Error::Precondition(format!("radius must be nonnegative, got {radius}")));
    }
    if radius <= cert.r_star {
        return Ok((0, 0.0));
    }
    if cert.r_star == 0.0 {
        return Err(Error::DegenerateCertificate { radius });
    }
    let ratio = (radius.ln() - cert.r_star.ln()) / (2f64.ln() - (1.0 + cert.beta_star).ln());
    let n = 1 + ratio.floor() as u64;
    Ok((n, n as f64 * cert.t_star))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionResiduals {
    pub rho: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub omega: f64,
}

/// `dist(S(t)𝔅₀, B_𝒱(ρ)) ≤ K e^{−ωt}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractionCertificate {
    pub rho: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub omega: f64,
    pub alpha_star: f64,
    pub alpha_zero: f64,
    pub t_star: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub tec: TecCertificate,
    pub residuals: AttractionResiduals,
}

impl AttractionCertificate {
    pub fn from_values(alpha_star: f64, alpha_zero: f64, r0: f64, tec: TecCertificate) -> Result<Self> {
        if !(alpha_star < 1.0) {
            return Err(Error::Precondition(format!("α(t⋆) = {alpha_star} is not below 1")));
        }
        if !(alpha_star > 0.0) {
            return Err(Error::Precondition("α(t⋆) must be positive for a finite rate".into()));
        }
        if !(r0 >= 0.0) {
            return Err(Error::Precondition(format!("R₀ must be nonnegative, got {r0}")));
        }
        let t_star = tec.t_star;
        let rho = tec.kappa * tec.r_star;
        let k = alpha_zero / alpha_star * r0;
        let omega = (1.0 / alpha_star).ln() / t_star;
        let residuals = AttractionResiduals {
            rho: (rho - tec.kappa * tec.r_star).abs(),
            k: (k * alpha_star - alpha_zero * r0).abs(),
            omega: (omega * t_star - (1.0 / alpha_star).ln()).abs(),
        };
        Ok(Self { rho, k, omega, alpha_star, alpha_zero, t_star, r0, tec, residuals })
    }

    /// `K e^{−ωt}`.
    pub fn bound(&self, t: f64) -> f64 {
        self.k * (-self.omega * t).exp()
    }
}

pub fn main_constants(
    alpha: &DecayFn,
    beta: &DecayFn,
    j: &GrowthFn,
    r0: f64,
    t_star: f64,
) -> Result<AttractionCertificate> {
    let alpha_star = alpha.eval(t_star);
    if !(alpha_star < 1.0) {
        return Err(Error::Precondition(format!("α(t⋆) = {alpha_star} is not below 1")));
    }
    let tec = tec_constants(beta, j, t_star)?;
    AttractionCertificate::from_values(alpha_star, alpha.eval(0.0), r0, tec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn t_star_examples() {
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        assert!((choose_t_star(&b, 0.5).unwrap() - 8f64.ln()).abs() < 2e-9);
        let e = DecayFn::exp_floor(1.0, 1.0, 0.0).unwrap();
        assert!((choose_t_star(&e, 0.5).unwrap() - 2f64.ln()).abs() < 2e-9);
        let flat = DecayFn::exp_floor(0.0, 1.0, 0.5).unwrap();
        assert_eq!(choose_t_star(&flat, 0.5).unwrap(), MIN_T_STAR);
    }

    #[test]
    fn t_star_unavailable_for_stuck_table() {
        assert!(DecayFn::tabulated(vec![0.0, 1.0], vec![1.5, 1.2], 1.3).is_err());
        let stuck = DecayFn::tabulated(vec![0.0, 1.0], vec![1.5, 1.2], 0.5).unwrap();
        assert!(matches!(choose_t_star(&stuck, 0.5), Err(Error::CertificateUnavailable(_))));
        let b = DecayFn::tabulated(vec![0.0, 1.0], vec![1.5, 0.95], 0.5).unwrap();
        assert!(matches!(choose_t_star(&b, 0.5), Err(Error::CertificateUnavailable(_))));
    }

    #[test]
    fn tec_examples() {
        let b = DecayFn::exp_floor(1.0, 1.0, 0.0).unwrap();
        let c = tec_constants(&b, &GrowthFn::constant(2.0).unwrap(), 1.0).unwrap();
        let e = (-1f64).exp();
        assert!(rel(c.beta_star, e) < 1e-15);
        assert!(rel(c.r_star, 4.0 / (1.0 - e)) < 1e-14);
        assert!((c.r_star - 6.32791).abs() < 1e-5);
        assert!((c.kappa - 1.31606).abs() < 1e-5);

        let zero = tec_constants(&b, &GrowthFn::zero(), 1.0).unwrap();
        assert_eq!(zero.r_star, 0.0);

        let b2 = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        let c2 = tec_constants(&b2, &GrowthFn::affine(1.0, 1.0).unwrap(), 2.0).unwrap();
        assert!((c2.beta_star - 0.770671).abs() < 1e-6);
        assert!((c2.r_star - 26.1633).abs() < 1e-4);
        assert!((c2.kappa - 2.61466).abs() < 1e-5);
    }

    #[test]
    fn tec_rejects_and_warns() {
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            tec_constants(&b, &GrowthFn::zero(), 0.1),
            Err(Error::Precondition(_))
        ));
        let small = DecayFn::exp_floor(0.5, 1.0, 0.0).unwrap();
        let c = tec_constants(&small, &GrowthFn::zero(), 1.0).unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn entering_time_examples() {
        let cert = TecCertificate::from_values(1.0, 0.5, 1.0, 2.5).unwrap();
        assert_eq!(cert.r_star, 10.0);
        assert_eq!(entering_time(80.0, &cert).unwrap(), (8, 8.0));
        assert_eq!(entering_time(10.0000001, &cert).unwrap(), (1, 1.0));
        assert_eq!(entering_time(5.0, &cert).unwrap(), (0, 0.0));
        let degenerate = TecCertificate::from_values(1.0, 0.5, 1.0, 0.0).unwrap();
        assert!(matches!(entering_time(1.0, &degenerate), Err(Error::DegenerateCertificate { .. })));
        assert_eq!(entering_time(0.0, &degenerate).unwrap(), (0, 0.0));
    }

    #[test]
    fn main_constants_example() {
        let a = DecayFn::exp_floor(2.0, 1.0, 0.0).unwrap();
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        let j = GrowthFn::affine(1.0, 1.0).unwrap();
        let c = main_constants(&a, &b, &j, 5.0, 2.0).unwrap();
        assert!((c.alpha_star - 0.270671).abs() < 1e-6);
        let (beta_star, alpha_star) = (2.0 * (-2f64).exp() + 0.5, 2.0 * (-2f64).exp());
        let r_star = 2.0 * 3.0 / (1.0 - beta_star);
        let kappa = 2.5 + (1.0 - beta_star) / 2.0;
        assert!(rel(c.rho, kappa * r_star) < 1e-12);
        assert!((c.rho - 68.40809).abs() < 1e-4);
        assert!(rel(c.k, 10.0 / alpha_star) < 1e-12);
        assert!((c.k - 36.9453).abs() < 1e-4);
        assert!((c.omega - 0.653426).abs() < 1e-6);
        assert!(c.residuals.rho < 1e-12 && c.residuals.k < 1e-12 && c.residuals.omega < 1e-12);
    }

    #[test]
    fn symmetric_inputs_share_rate() {
        let b = DecayFn::exp_floor(3.0, 0.7, 0.1).unwrap();
        let c = main_constants(&b, &b, &GrowthFn::zero(), 1.0, 4.0).unwrap();
        assert!((c.omega - (1.0 / c.tec.beta_star).ln() / 4.0).abs() < 1e-15);
        assert_eq!(c.rho, 0.0);
    }

    #[test]
    fn serialized_fields() {
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        let c = main_constants(&b, &b, &GrowthFn::affine(1.0, 1.0).unwrap(), 5.0, 2.0).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        for key in ["rho", "K", "omega", "alpha_star", "t_star", "tec", "residuals"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(v["tec"].get("R_star").is_some());
    }
}
