//! Run configuration: one JSON document per experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nonlinearity::PhiSpec;
use crate::spectral::{ModeGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    /// Synthetic operator families.
    E1,
    /// Ensemble decay of the hat splitting.
    E2,
    /// Regularity pipeline toward `𝓗^{1/4}` and then `𝓗^1`.
    E3,
    /// Attraction of enlarged balls.
    E4,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::E1 => "E1",
            Experiment::E2 => "E2",
            Experiment::E3 => "E3",
            Experiment::E4 => "E4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TStarPolicy {
    /// Smallest step with `β(t) ≤ margin` (and `α(t) ≤ margin` where a certificate needs it).
    Margin(f64),
    Explicit(f64),
}

impl Default for TStarPolicy {
    fn default() -> Self {
        TStarPolicy::Margin(0.5)
    }
}

fn default_grid() -> ModeGrid {
    ModeGrid::interval(32, 1.0).expect("default grid is valid")
}

fn default_phi() -> PhiSpec {
    PhiSpec::quintic(0.25).expect("default nonlinearity is valid")
}

fn default_forcing() -> Vec<(Vec<usize>, f64)> {
    vec![(vec![1], 3.0)]
}

fn default_r0() -> f64 {
    2.0
}

fn default_ensemble() -> usize {
    16
}

fn default_dt() -> f64 {
    0.005
}

fn default_t_final() -> f64 {
    20.0
}

fn default_epsilon() -> f64 {
    crate::semigroup::DEFAULT_EPSILON
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

fn default_iterations() -> usize {
    10
}

fn default_families() -> usize {
    50
}

fn default_violating() -> usize {
    10
}

fn default_directions() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: ModeGrid,
    #[serde(default = "default_phi")]
    pub phi: PhiSpec,
    /// `(multi-index, coefficient)` pairs of `f`.
    #[serde(default = "default_forcing")]
    pub forcing: Vec<(Vec<usize>, f64)>,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    /// Requested step; runs use `min(dt, dt_max)` for the ensemble amplitude.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub t_star: TStarPolicy,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Multiples of `R₀` probed by E4.
    #[serde(default = "default_radii")]
    pub radii_factors: Vec<f64>,
    /// Steps of the discrete iteration.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Compliant synthetic families in E1.
    #[serde(default = "default_families")]
    pub families: usize,
    /// Violating synthetic families in E1.
    #[serde(default = "default_violating")]
    pub violating_families: usize,
    /// Extra random directions per member when estimating `β` in E3.
    #[serde(default = "default_directions")]
    pub beta_directions: usize,
    /// Not part of the configuration hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Default settings for an experiment.
    pub fn defaults(experiment: Experiment, seed: u64) -> Self {
        let text = format!(r#"{{"experiment":"{}","seed":{seed}}}"#, experiment.as_str());
        Self::from_json(&text).expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("r0", self.r0)?;
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        positive("epsilon", self.epsilon)?;
        match self.t_star {
            TStarPolicy::Margin(m) if !(m > 0.0 && m < 1.0) => {
                return Err(Error::Config(format!("t_star margin must lie in (0, 1), got {m}")));
            }
            TStarPolicy::Explicit(t) => positive("t_star", t)?,
            _ => {}
        }
        if self.radii_factors.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("radii_factors must be positive".into()));
        }
        if self.experiment == Experiment::E4 && self.radii_factors.len() < 2 {
            return Err(Error::Config("E4 needs at least two radii".into()));
        }
        if self.experiment == Experiment::E1 && self.families == 0 {
            return Err(Error::Config("E1 needs at least one compliant family".into()));
        }
        self.forcing_field()?;
        crate::semigroup::check_energy_parameter(&self.grid, self.epsilon)?;
        Ok(())
    }

    pub fn forcing_field(&self) -> Result<SpectralField> {
        SpectralField::from_pairs(self.grid, &self.forcing)
    }

    /// The configuration with `output_dir` dropped, serialized in field order.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        serde_json::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        assert!(RunConfig::from_json(r#"{"experiment":"E2"}"#).is_err());
        let c = RunConfig::from_json(r#"{"experiment":"E2","seed":3}"#).unwrap();
        assert_eq!(c.grid.modes(), 32);
        assert_eq!(c.t_star, TStarPolicy::Margin(0.5));
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(RunConfig::from_json(r#"{"experiment":"E2","seed":1,"dt":-1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"E2","seed":1,"bogus":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"E2","seed":1,"forcing":[[[40],1.0]]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"experiment":"E2","seed":1,"t_star":{"margin":1.5}}"#).is_err());
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::defaults(Experiment::E3, 7);
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 8;
        assert_ne!(a.hash(), c.hash());
    }
}
