//! Odd polynomial nonlinearities and the cutoff splitting `φ = φ0 + φ1`.
//!
//! With the ramp `γ` (zero on `|u| ≤ σ`, one on `|u| ≥ σ + 1`, linear in between)
//! the pieces are `φ0(u) = γ(u)[φ(u) + λu]` and `φ1 = φ − φ0`. For `σ > 0`,
//! `φ0` vanishes near the origin and factors as `φ0(u) = u ψ(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPhi")]
pub struct PhiSpec {
    coefficients: Vec<f64>,
    sigma: f64,
    lambda_shift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth_constant: Option<f64>,
}

#[derive(Deserialize)]
struct RawPhi {
    coefficients: Vec<f64>,
    #[serde(default)]
    sigma: f64,
    #[serde(default)]
    lambda_shift: f64,
    #[serde(default)]
    growth_constant: Option<f64>,
}

impl TryFrom<RawPhi> for PhiSpec {
    type Error = Error;

    fn try_from(raw: RawPhi) -> Result<Self> {
        let mut spec = PhiSpec::new(raw.coefficients, raw.sigma, raw.lambda_shift)?;
        spec.growth_constant = raw.growth_constant;
        Ok(spec)
    }
}

impl PhiSpec {
    /// `coefficients[j]` multiplies `u^j`; only odd powers may be nonzero.
    pub fn new(coefficients: Vec<f64>, sigma: f64, lambda_shift: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("polynomial coefficients must be finite".into()));
        }
        if coefficients.iter().enumerate().any(|(j, &c)| j % 2 == 0 && c != 0.0) {
            return Err(Error::Config("nonlinearity must be an odd polynomial".into()));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::Config(format!("cutoff σ must be nonnegative, got {sigma}")));
        }
        if !(lambda_shift.is_finite() && lambda_shift >= 0.0) {
            return Err(Error::Config(format!("λ shift must be nonnegative, got {lambda_shift}")));
        }
        let mut coefficients = coefficients;
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Ok(Self { coefficients, sigma, lambda_shift, growth_constant: None })
    }

    pub fn zero() -> Self {
        Self { coefficients: Vec::new(), sigma: 1.0, lambda_shift: 0.0, growth_constant: None }
    }

    /// `u³ − u`, sign-indefinite and subcritical.
    pub fn cubic_minus_linear(sigma: f64, lambda_shift: f64) -> Result<Self> {
        Self::new(vec![0.0, -1.0, 0.0, 1.0], sigma, lambda_shift)
    }

    /// `u⁵`, critical growth.
    pub fn quintic(sigma: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0], sigma, 0.0)
    }

    /// `u⁵ − u`, critical and sign-indefinite.
    pub fn quintic_minus_linear(sigma: f64, lambda_shift: f64) -> Result<Self> {
        Self::new(vec![0.0, -1.0, 0.0, 0.0, 0.0, 1.0], sigma, lambda_shift)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda_shift(&self) -> f64 {
        self.lambda_shift
    }

    pub fn growth_constant(&self) -> Option<f64> {
        self.growth_constant
    }

    pub fn with_growth_constant(mut self, c: f64) -> Self {
        self.growth_constant = Some(c);
        self
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn phi_prime(&self, u: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * u + j as f64 * c)
    }

    /// Upper bound of `|φ'|` on `[−a, a]`.
    pub fn lipschitz_bound(&self, amplitude: f64) -> f64 {
        let a = amplitude.abs();
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c.abs() * a.powi(j as i32 - 1))
            .sum()
    }

    pub fn gamma(&self, u: f64) -> f64 {
        (u.abs() - self.sigma).clamp(0.0, 1.0)
    }

    pub fn phi0(&self, u: f64) -> f64 {
        let g = self.gamma(u);
        if g == 0.0 {
            0.0
        } else {
            g * (self.phi(u) + self.lambda_shift * u)
        }
    }

    pub fn phi1(&self, u: f64) -> f64 {
        self.phi(u) - self.phi0(u)
    }

    /// `ψ = φ0 / u`, extended by zero on `[−σ, σ]`. Requires `σ > 0`.
    pub fn psi(&self, u: f64) -> Result<f64> {
        if self.sigma <= 0.0 {
            return Err(Error::Config("ψ requires a strictly positive cutoff σ".into()));
        }
        Ok(self.psi_unchecked(u))
    }

    pub(crate) fn psi_unchecked(&self, u: f64) -> f64 {
        if u.abs() <= self.sigma {
            0.0
        } else {
            self.phi0(u) / u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthReport {
    /// Measured constant of the critical growth bound.
    pub c_est: f64,
    /// Smallest `c` with `|ψ(u)| ≤ c|u|⁴` on the samples; `None` when `σ = 0`.
    pub psi_constant: Option<f64>,
    /// `psi_constant ≤ 10 c_est` (vacuously true when ψ is undefined).
    pub psi_bound_ok: bool,
    pub pairs: usize,
}

/// Largest ratio `|φ(u) − φ(v)| / (|u − v| (1 + |u|⁴ + |v|⁴))` over all pairs of a
/// uniform grid of `samples` points on `[−range, range]`.
pub fn verify_growth(spec: &PhiSpec, sample_range: f64, samples: usize) -> Result<GrowthReport> {
    if samples < 2 {
        return Err(Error::Precondition("growth estimate needs at least 2 samples".into()));
    }
    let r = sample_range.abs();
    let pts: Vec<f64> = (0..samples)
        .map(|i| -r + 2.0 * r * i as f64 / (samples - 1) as f64)
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&u| spec.phi(u)).collect();
    let quart: Vec<f64> = pts.iter().map(|&u| u.powi(4)).collect();

    let mut c_est: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..samples {
        for j in i + 1..samples {
            let du = (pts[i] - pts[j]).abs();
            if du == 0.0 {
                continue;
            }
            let ratio = (vals[i] - vals[j]).abs() / (du * (1.0 + quart[i] + quart[j]));
            c_est = c_est.max(ratio);
            pairs += 1;
        }
    }

    let psi_constant = (spec.sigma() > 0.0).then(|| {
        pts.iter()
            .filter(|u| u.abs() > 0.0)
            .map(|&u| spec.psi_unchecked(u).abs() / u.powi(4))
            .fold(0.0, f64::max)
    });
    let psi_bound_ok = psi_constant.is_none_or(|c| c <= 10.0 * c_est);
    Ok(GrowthReport { c_est, psi_constant, psi_bound_ok, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipativityReport {
    /// `min φ(u)/u` over the tail `σ_probe ≤ |u| ≤ range`; the liminf proxy.
    pub tail_min: f64,
    /// `min φ(u)/u` over the whole probe range.
    pub global_min: f64,
    pub probe_start: f64,
    pub dissipative: bool,
}

const DISSIPATIVITY_SAMPLES: usize = 20_001;

/// Finite-range check of `liminf φ(u)/u > −λ₁` with `σ_probe = max(σ + 1, 10)`.
pub fn verify_dissipativity(spec: &PhiSpec, lambda_one: f64, probe_range: f64) -> DissipativityReport {
    let probe_start = (spec.sigma() + 1.0).max(10.0);
    let end = probe_range.abs().max(probe_start);
    let ratio = |u: f64| spec.phi(u) / u;

    let mut tail_min = f64::INFINITY;
    let mut global_min = f64::INFINITY;
    let n = DISSIPATIVITY_SAMPLES;
    for i in 0..n {
        let s = i as f64 / (n - 1) as f64;
        let tail_u = probe_start + s * (end - probe_start);
        tail_min = tail_min.min(ratio(tail_u)).min(ratio(-tail_u));
        // skip the removable point at the origin
        let u = end * (i + 1) as f64 / n as f64;
        global_min = global_min.min(ratio(u)).min(ratio(-u));
    }
    global_min = global_min.min(tail_min);
    if spec.coefficients[0] == 0.0 {
        // φ(u)/u → φ'(0) at the removable point
        global_min = global_min.min(spec.coefficients.get(1).copied().unwrap_or(0.0));
    }
    DissipativityReport { tail_min, global_min, probe_start, dissipative: tail_min > -lambda_one }
}

/// Smallest `c` with `|φ1(u)| ≤ c(1 + |u|)` on a uniform grid over `[−range, range]`.
pub fn remainder_linear_constant(spec: &PhiSpec, range: f64, samples: usize) -> f64 {
    let r = range.abs();
    (0..samples.max(2))
        .map(|i| -r + 2.0 * r * i as f64 / (samples.max(2) - 1) as f64)
        .map(|u| spec.phi1(u).abs() / (1.0 + u.abs()))
        .fold(0.0, f64::max)
}
