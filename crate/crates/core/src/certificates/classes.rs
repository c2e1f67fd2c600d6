//! Decay functions (continuous, nonincreasing, limit below one) and growth functions
//! (continuous, nondecreasing, nonnegative). Weak monotonicity is accepted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DecayForm {
    /// `a e^{−bt} + c`.
    ExpFloor { a: f64, b: f64, c: f64 },
    /// Piecewise-linear samples, held constant past the last time.
    Tabulated { times: Vec<f64>, values: Vec<f64>, limit: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecayForm", into = "DecayForm")]
pub struct DecayFn {
    form: DecayForm,
}

impl TryFrom<DecayForm> for DecayFn {
    type Error = Error;

    fn try_from(form: DecayForm) -> Result<Self> {
        match &form {
            DecayForm::ExpFloor { a, b, c } => {
                let ok = a.is_finite() && *a >= 0.0 && b.is_finite() && *b > 0.0 && *c >= 0.0 && *c < 1.0;
                if !ok {
                    return Err(Error::Config(format!(
                        "decay a e^(-bt) + c needs a ≥ 0, b > 0, 0 ≤ c < 1; got a={a}, b={b}, c={c}"
                    )));
                }
            }
            DecayForm::Tabulated { times, values, limit } => {
                check_table(times, values)?;
                if values.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::Config("tabulated decay values must be nonincreasing".into()));
                }
                if values.iter().any(|v| *v < 0.0) {
                    return Err(Error::Config("tabulated decay values must be nonnegative".into()));
                }
                let last = *values.last().expect("checked nonempty");
                if !(*limit >= 0.0 && *limit < 1.0 && *limit <= last) {
                    return Err(Error::Config(format!(
                        "declared limit {limit} must lie in [0, 1) and below the last value {last}"
                    )));
                }
            }
        }
        Ok(Self { form })
    }
}

impl From<DecayFn> for DecayForm {
    fn from(f: DecayFn) -> Self {
        f.form
    }
}

fn check_table(times: &[f64], values: &[f64]) -> Result<()> {
    if times.is_empty() || times.len() != values.len() {
        return Err(Error::Config("table needs matching, nonempty times and values".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("table times must be nonnegative and strictly increasing".into()));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::Config("table entries must be finite".into()));
    }
    Ok(())
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let i = times.partition_point(|&x| x <= t);
    if i >= times.len() {
        return values[values.len() - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let w = (t - t0) / (t1 - t0);
    values[i - 1] + w * (values[i] - values[i - 1])
}

impl DecayFn {
    pub fn exp_floor(a: f64, b: f64, c: f64) -> Result<Self> {
        DecayForm::ExpFloor { a, b, c }.try_into()
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, limit: f64) -> Result<Self> {
        DecayForm::Tabulated { times, values, limit }.try_into()
    }

    pub fn form(&self) -> &DecayForm {
        &self.form
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            DecayForm::ExpFloor { a, b, c } => a * (-b * t).exp() + c,
            DecayForm::Tabulated { times, values, .. } => interpolate(times, values, t),
        }
    }

    /// `β(∞)`: the floor, or the declared limit of a table.
    pub fn limit(&self) -> f64 {
        match &self.form {
            DecayForm::ExpFloor { c, .. } => *c,
            DecayForm::Tabulated { limit, .. } => *limit,
        }
    }

    /// Last time at which the function can still change, if finite.
    pub(crate) fn horizon(&self) -> Option<f64> {
        match &self.form {
            DecayForm::ExpFloor { .. } => None,
            DecayForm::Tabulated { times, .. } => times.last().copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum GrowthForm {
    /// `p + qt`.
    Affine { p: f64, q: f64 },
    /// `p(1 − e^{−qt}) + r`.
    Saturating { p: f64, q: f64, r: f64 },
    /// Piecewise-linear samples, held constant past the last time.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GrowthForm", into = "GrowthForm")]
pub struct GrowthFn {
    form: GrowthForm,
}

impl TryFrom<GrowthForm> for GrowthFn {
    type Error = Error;

    fn try_from(form: GrowthForm) -> Result<Self> {
        let nonneg = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x >= 0.0);
        match &form {
            GrowthForm::Affine { p, q } => {
                if !nonneg(&[*p, *q]) {
                    return Err(Error::Config(format!("affine growth needs p, q ≥ 0; got p={p}, q={q}")));
                }
            }
            GrowthForm::Saturating { p, q, r } => {
                if !nonneg(&[*p, *q, *r]) {
                    return Err(Error::Config(format!(
                        "saturating growth needs p, q, r ≥ 0; got p={p}, q={q}, r={r}"
                    )));
                }
            }
            GrowthForm::Tabulated { times, values } => {
                check_table(times, values)?;
                if values.windows(2).any(|w| w[1] < w[0]) || !nonneg(values) {
                    return Err(Error::Config("tabulated growth values must be nonnegative and nondecreasing".into()));
                }
            }
        }
        Ok(Self { form })
    }
}

impl From<GrowthFn> for GrowthForm {
    fn from(f: GrowthFn) -> Self {
        f.form
    }
}

impl GrowthFn {
    pub fn affine(p: f64, q: f64) -> Result<Self> {
        GrowthForm::Affine { p, q }.try_into()
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::affine(c, 0.0)
    }

    pub fn zero() -> Self {
        Self { form: GrowthForm::Affine { p: 0.0, q: 0.0 } }
    }

    pub fn saturating(p: f64, q: f64, r: f64) -> Result<Self> {
        GrowthForm::Saturating { p, q, r }.try_into()
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        GrowthForm::Tabulated { times, values }.try_into()
    }

    pub fn form(&self) -> &GrowthForm {
        &self.form
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.form {
            GrowthForm::Affine { p, q } => p + q * t,
            GrowthForm::Saturating { p, q, r } => p * (1.0 - (-q * t).exp()) + r,
            GrowthForm::Tabulated { times, values } => interpolate(times, values, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            GrowthForm::Affine { p, q } => *p == 0.0 && *q == 0.0,
            GrowthForm::Saturating { p, r, .. } => *p == 0.0 && *r == 0.0,
            GrowthForm::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_floor_values() {
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        assert_eq!(b.eval(0.0), 2.5);
        assert!((b.eval(8f64.ln()) - 0.75).abs() < 1e-15);
        assert_eq!(b.limit(), 0.5);
    }

    #[test]
    fn rejects_bad_decay() {
        assert!(DecayFn::exp_floor(-1.0, 1.0, 0.0).is_err());
        assert!(DecayFn::exp_floor(1.0, 0.0, 0.0).is_err());
        assert!(DecayFn::exp_floor(1.0, 1.0, 1.0).is_err());
        assert!(DecayFn::tabulated(vec![0.0, 1.0], vec![0.5, 0.7], 0.1).is_err());
        assert!(DecayFn::tabulated(vec![0.0, 1.0], vec![2.0, 0.7], 0.9).is_err());
        assert!(DecayFn::tabulated(vec![1.0, 0.5], vec![2.0, 0.7], 0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_holds() {
        let b = DecayFn::tabulated(vec![0.0, 1.0, 3.0], vec![2.0, 1.0, 0.5], 0.2).unwrap();
        assert_eq!(b.eval(0.5), 1.5);
        assert_eq!(b.eval(2.0), 0.75);
        assert_eq!(b.eval(10.0), 0.5);
        let j = GrowthFn::tabulated(vec![0.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(j.eval(1.0), 2.0);
        assert_eq!(j.eval(5.0), 3.0);
    }

    #[test]
    fn growth_forms() {
        assert_eq!(GrowthFn::affine(1.0, 1.0).unwrap().eval(2.0), 3.0);
        let s = GrowthFn::saturating(2.0, 1.0, 0.5).unwrap();
        assert_eq!(s.eval(0.0), 0.5);
        assert!((s.eval(50.0) - 2.5).abs() < 1e-12);
        assert!(GrowthFn::affine(-1.0, 0.0).is_err());
        assert!(GrowthFn::tabulated(vec![0.0, 1.0], vec![2.0, 1.0]).is_err());
        assert!(GrowthFn::zero().is_zero());
    }

    #[test]
    fn serde_round_trip_validates() {
        let b = DecayFn::exp_floor(2.0, 1.0, 0.5).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.contains("\"form\":\"exp_floor\""));
        let back: DecayFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        let bad = r#"{"form":"exp_floor","a":1.0,"b":1.0,"c":1.5}"#;
        assert!(serde_json::from_str::<DecayFn>(bad).is_err());
        let j: GrowthFn = serde_json::from_str(r#"{"form":"affine","p":1.0,"q":0.5}"#).unwrap();
        assert_eq!(j.eval(2.0), 2.0);
    }
}
