//! Concrete decay and growth functions extracted from measured data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{fit_rate, LOG_FLOOR};

use super::classes::{DecayFn, GrowthFn};
use super::gronwall::{gronwall_bound, GronwallParams};

/// `a e^{−bt}` with `b` from a log-linear fit and `a` lifted until the curve covers every sample.
pub fn fit_decay_envelope(times: &[f64], ratios: &[f64]) -> Result<DecayFn> {
    let fit = fit_rate(times, ratios)?;
    if !(fit.omega > 0.0) {
        return Err(Error::CertificateUnavailable(format!(
            "measured ratios do not decay (fitted rate {:.3e})",
            fit.omega
        )));
    }
    let a = times
        .iter()
        .zip(ratios)
        .filter(|(_, r)| r.is_finite())
        .map(|(&t, &r)| r * (fit.omega * t).exp())
        .fold(0.0, f64::max);
    DecayFn::exp_floor(a, fit.omega, 0.0)
}

/// Cumulative maximum of the samples as a tabulated growth function.
pub fn fit_growth_envelope(times: &[f64], values: &[f64]) -> Result<GrowthFn> {
    let mut run = 0.0f64;
    let cum: Vec<f64> = values
        .iter()
        .map(|v| {
            run = run.max(*v);
            run
        })
        .collect();
    GrowthFn::tabulated(times.to_vec(), cum)
}

/// Pointwise maximum across series sharing one time grid.
pub fn pointwise_max(series: &[Vec<f64>]) -> Vec<f64> {
    let n = series.iter().map(Vec::len).min().unwrap_or(0);
    (0..n).map(|i| series.iter().map(|s| s[i]).fold(f64::NEG_INFINITY, f64::max)).collect()
}

/// Parameters of `Λ' + εΛ ≤ k e^{−νt}Λ + J(t)` fitted to a sampled functional.
#[derive(Debug, Clone, Serialize)]
pub struct GronwallFit {
    pub epsilon: f64,
    pub k: f64,
    pub nu: f64,
    pub j: GrowthFn,
    /// Largest `Λ(t) / bound(t)` on the samples.
    pub max_bound_ratio: f64,
    /// Largest violation of the differential inequality, relative to its right side.
    pub max_inequality_excess: f64,
}

const NU_CANDIDATES: [f64; 6] = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Fits `(k, ν)` from the growth rate `(Λ' + εΛ)/Λ` and takes `J` as the running
/// maximum of what is left; `with_source = false` forces `J ≡ 0`.
pub fn fit_gronwall(times: &[f64], lambda: &[f64], epsilon: f64, with_source: bool) -> Result<GronwallFit> {
    if times.len() != lambda.len() || times.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: times.len().min(lambda.len()) });
    }
    let n = times.len();
    // one-sided differences at the ends, centered inside
    let deriv: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
            (lambda[b] - lambda[a]) / (times[b] - times[a])
        })
        .collect();
    let q: Vec<f64> = deriv.iter().zip(lambda).map(|(d, l)| d + epsilon * l).collect();

    let rate: Vec<f64> = q
        .iter()
        .zip(lambda)
        .map(|(qi, l)| if *l > LOG_FLOOR { (qi / l).max(0.0) } else { 0.0 })
        .collect();
    let (k, nu) = if with_source {
        (0.0, 1.0)
    } else {
        NU_CANDIDATES
            .iter()
            .map(|&nu| {
                let k = times.iter().zip(&rate).map(|(t, r)| r * (nu * t).exp()).fold(0.0, f64::max);
                (k, nu)
            })
            .min_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)))
            .expect("candidates nonempty")
    };
    let j = if with_source {
        let rest: Vec<f64> = q
            .iter()
            .zip(times.iter().zip(lambda))
            .map(|(qi, (t, l))| (qi - k * (-nu * t).exp() * l).max(0.0))
            .collect();
        fit_growth_envelope(times, &rest)?
    } else {
        GrowthFn::zero()
    };

    let mut max_inequality_excess: f64 = 0.0;
    for i in 0..n {
        let rhs = k * (-nu * times[i]).exp() * lambda[i] + j.eval(times[i]);
        let excess = q[i] - rhs;
        if excess > 0.0 {
            max_inequality_excess = max_inequality_excess.max(excess / rhs.abs().max(LOG_FLOOR));
        }
    }
    let params = GronwallParams::new(lambda[0].max(0.0), epsilon, nu, k, j.clone())?;
    let max_bound_ratio = times
        .iter()
        .zip(lambda)
        .map(|(&t, &l)| {
            let b = gronwall_bound(&params, t);
            if b > 0.0 {
                l / b
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(GronwallFit { epsilon, k, nu, j, max_bound_ratio, max_inequality_excess })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_covers_samples() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let r: Vec<f64> = t.iter().map(|t| (1.0 + 0.3 * (3.0 * t).sin()) * (-0.8 * t).exp()).collect();
        let d = fit_decay_envelope(&t, &r).unwrap();
        for (ti, ri) in t.iter().zip(&r) {
            assert!(d.eval(*ti) >= *ri * (1.0 - 1e-12));
        }
        assert!(d.limit() == 0.0);
    }

    #[test]
    fn flat_ratios_have_no_certificate() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert!(matches!(
            fit_decay_envelope(&t, &[1.0, 1.0, 1.1, 1.2]),
            Err(Error::CertificateUnavailable(_))
        ));
    }

    #[test]
    fn growth_envelope_is_running_max() {
        let g = fit_growth_envelope(&[0.0, 1.0, 2.0], &[0.5, 0.2, 0.9]).unwrap();
        assert_eq!(g.eval(1.0), 0.5);
        assert_eq!(g.eval(2.0), 0.9);
    }

    #[test]
    fn gronwall_fit_on_pure_decay() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let l: Vec<f64> = t.iter().map(|t| 4.0 * (-2.0 * t).exp()).collect();
        let f = fit_gronwall(&t, &l, 0.05, false).unwrap();
        assert_eq!(f.k, 0.0);
        assert!(f.max_bound_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn gronwall_fit_with_transient_growth() {
        // Λ = e^{1 − e^{−t}} e^{−t}: the equality case with ε = ν = k = 1
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.02).collect();
        let l: Vec<f64> = t.iter().map(|t| (1.0 - (-t).exp()).exp() * (-t).exp()).collect();
        let f = fit_gronwall(&t, &l, 1.0, false).unwrap();
        assert!(f.k > 0.0);
        assert!(f.max_bound_ratio <= 1.0 + 1e-3);
    }
}
