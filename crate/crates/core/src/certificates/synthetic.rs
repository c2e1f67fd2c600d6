//! Affine semigroups on `ℝ^{2m}` whose decompositions satisfy the attraction
//! hypotheses with known constants.
//!
//! Each 2×2 block evolves by `E_b(t) = e^{−a_b t}(I + t n_b N)` with `N` nilpotent, and
//! `S(t)x = E(t)(x − p) + p`, `V(t) = E(t)`, `U(t)z = E(t)z + (I − E(t))p`.
//! Both norms weight the two coordinates of a block equally, so
//! `‖E(t)‖ ≤ max_b e^{−a_b t}(1 + n_b t) ≤ M e^{−bt}` in either norm.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::project_weighted;

use super::classes::{DecayFn, GrowthFn};
use super::iteration::DecompositionFlow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Compliant,
    /// Claims an inhomogeneity 10% below the true one.
    Violating,
    /// `p = 0`, hence `J ≡ 0`.
    Homogeneous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticFamily {
    pub kind: FamilyKind,
    rates: Vec<f64>,
    shears: Vec<f64>,
    base_weights: Vec<f64>,
    strong_weights: Vec<f64>,
    fixed_point: Vec<f64>,
    pub alpha: DecayFn,
    pub beta: DecayFn,
    pub j: GrowthFn,
    pub r0: f64,
}

/// `sup_{t ≥ 0} (1 + n t) e^{−c t}`.
fn shear_peak(n: f64, c: f64) -> f64 {
    let t = 1.0 / c - 1.0 / n.max(1e-300);
    if n > 0.0 && t > 0.0 {
        (1.0 + n * t) * (-c * t).exp()
    } else {
        1.0
    }
}

impl SyntheticFamily {
    pub fn random<R: Rng>(rng: &mut R, kind: FamilyKind) -> Self {
        let blocks = rng.random_range(1..=4);
        let rates: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.3..2.0)).collect();
        let shears: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.0..3.0)).collect();
        let base_weights: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.5..2.0)).collect();
        let strong_weights: Vec<f64> = base_weights.iter().map(|w| w * rng.random_range(1.0..4.0)).collect();
        let fixed_point: Vec<f64> = match kind {
            FamilyKind::Homogeneous => vec![0.0; 2 * blocks],
            _ => (0..2 * blocks).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let r0 = rng.random_range(1.0..5.0);
        let b = 0.5 * rates.iter().copied().fold(f64::INFINITY, f64::min);
        // 1.0 + 1e-12 keeps the envelope strictly above the peak after rounding
        let m = rates
            .iter()
            .zip(&shears)
            .map(|(&a, &n)| shear_peak(n, a - b))
            .fold(1.0, f64::max)
            * (1.0 + 1e-12);
        let alpha = DecayFn::exp_floor(m, b, 0.0).expect("valid envelope");
        let mut fam = Self {
            kind,
            rates,
            shears,
            base_weights,
            strong_weights,
            fixed_point,
            alpha: alpha.clone(),
            beta: alpha,
            j: GrowthFn::zero(),
            r0,
        };
        let p_norm = fam.strong_norm(&fam.fixed_point);
        fam.j = match kind {
            FamilyKind::Homogeneous => GrowthFn::zero(),
            FamilyKind::Compliant => GrowthFn::constant((1.0 + m) * p_norm).expect("nonnegative"),
            // filled in by `with_claimed_step` once t⋆ is known
            FamilyKind::Violating => GrowthFn::constant((1.0 + m) * p_norm).expect("nonnegative"),
        };
        fam
    }

    /// For violating families: claim `J ≡ ‖(I − E(t⋆))p‖_𝒱 / 1.1`, understating the true step.
    pub fn with_claimed_step(mut self, t_star: f64) -> Self {
        if self.kind == FamilyKind::Violating {
            let shifted = self.inhomogeneity(t_star);
            self.j = GrowthFn::constant(self.strong_norm(&shifted) / 1.1).expect("nonnegative");
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.fixed_point.len()
    }

    pub fn fixed_point(&self) -> &[f64] {
        &self.fixed_point
    }

    /// `E(t)x`.
    pub fn propagate(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (b, (&a, &n)) in self.rates.iter().zip(&self.shears).enumerate() {
            let e = (-a * t).exp();
            let (x0, x1) = (x[2 * b], x[2 * b + 1]);
            out[2 * b] = e * (x0 + t * n * x1);
            out[2 * b + 1] = e * x1;
        }
        out
    }

    /// `(I − E(t))p`.
    pub fn inhomogeneity(&self, t: f64) -> Vec<f64> {
        let ep = self.propagate(t, &self.fixed_point);
        self.fixed_point.iter().zip(&ep).map(|(p, e)| p - e).collect()
    }

    pub fn s(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(&self.fixed_point).map(|(a, p)| a - p).collect();
        self.propagate(t, &d).iter().zip(&self.fixed_point).map(|(a, p)| a + p).collect()
    }

    pub fn v(&self, t: f64, y: &[f64]) -> Vec<f64> {
        self.propagate(t, y)
    }

    pub fn u(&self, t: f64, z: &[f64]) -> Vec<f64> {
        let ez = self.propagate(t, z);
        ez.iter().zip(self.inhomogeneity(t)).map(|(a, b)| a + b).collect()
    }

    fn weights(&self, per_block: &[f64]) -> Vec<f64> {
        per_block.iter().flat_map(|&w| [w, w]).collect()
    }

    pub fn base_weights(&self) -> Vec<f64> {
        self.weights(&self.base_weights)
    }

    pub fn strong_weights(&self) -> Vec<f64> {
        self.weights(&self.strong_weights)
    }

    pub fn base_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.base_weights()).map(|(a, w)| w * a * a).sum::<f64>().sqrt()
    }

    pub fn strong_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.strong_weights()).map(|(a, w)| w * a * a).sum::<f64>().sqrt()
    }

    pub fn dist_to_strong_ball(&self, x: &[f64], radius: f64) -> Result<f64> {
        project_weighted(x, &self.base_weights(), &self.strong_weights(), radius).map(|p| p.distance)
    }

    /// Random point with norm uniform in `[0, radius]` for the given weights.
    pub fn sample<R: Rng>(&self, rng: &mut R, radius: f64, strong: bool) -> Vec<f64> {
        let dir: Vec<f64> = (0..self.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = if strong { self.strong_norm(&dir) } else { self.base_norm(&dir) };
        let r = radius * rng.random::<f64>();
        if n == 0.0 {
            return vec![0.0; self.dim()];
        }
        dir.iter().map(|d| d * r / n).collect()
    }

    pub fn flow(&self, t_star: f64) -> SyntheticFlow<'_> {
        SyntheticFlow { family: self, t_star }
    }
}

/// A synthetic family advanced by a fixed step.
pub struct SyntheticFlow<'a> {
    family: &'a SyntheticFamily,
    t_star: f64,
}

impl DecompositionFlow for SyntheticFlow<'_> {
    type State = Vec<f64>;

    fn zero(&self, like: &Vec<f64>) -> Vec<f64> {
        vec![0.0; like.len()]
    }

    fn advance(&self, x: &Vec<f64>, y: &Vec<f64>, z: &Vec<f64>) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let f = self.family;
        Ok((f.s(self.t_star, x), f.v(self.t_star, y), f.u(self.t_star, z)))
    }

    fn base_norm(&self, s: &Vec<f64>) -> f64 {
        self.family.base_norm(s)
    }

    fn strong_norm(&self, s: &Vec<f64>) -> f64 {
        self.family.strong_norm(s)
    }

    fn sum_residual(&self, x: &Vec<f64>, y: &Vec<f64>, z: &Vec<f64>) -> f64 {
        let d: Vec<f64> = x.iter().zip(y.iter().zip(z)).map(|(a, (b, c))| a - b - c).collect();
        self.family.base_norm(&d)
    }

    fn dist_to_strong_ball(&self, x: &Vec<f64>, radius: f64) -> Result<f64> {
        self.family.dist_to_strong_ball(x, radius)
    }
}
