//! Step-`t⋆` decomposition flows of the damped wave equation.

use crate::certificates::DecompositionFlow;
use crate::error::{Error, Result};
use crate::metrics::{dist_to_ball, NormSpec};
use crate::spectral::PhaseState;

use super::config::EvolutionConfig;
use super::evolve::{evolve_linear_split, evolve_vu, Component};
use super::linear::step_linear;

fn final_of(rec: &super::evolve::TrajectoryRecord, c: Component) -> Result<PhaseState> {
    rec.final_state(c)
        .cloned()
        .ok_or_else(|| Error::Numerical(format!("run recorded no {} state", c.as_str())))
}

/// `V_x(t⋆)y = v`, `U_x(t⋆)z = w` with sources `−vψ(v̂)` and `f − φ(u) + vψ(v̂)`.
#[derive(Debug, Clone)]
pub struct SdweSplitFlow {
    cfg: EvolutionConfig,
    spec: NormSpec,
}

impl SdweSplitFlow {
    /// Strong space `𝓗^{1/4}` by default.
    pub fn new(cfg: &EvolutionConfig, t_star: f64) -> Result<Self> {
        let cfg = cfg.clone().with_t_final(t_star)?.with_stride(usize::MAX)?;
        Ok(Self { cfg, spec: NormSpec::new(0.0, 0.25)? })
    }

    pub fn with_strong_exponent(mut self, r: f64) -> Result<Self> {
        self.spec = NormSpec::new(0.0, r)?;
        Ok(self)
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }
}

impl DecompositionFlow for SdweSplitFlow {
    type State = PhaseState;

    fn zero(&self, like: &PhaseState) -> PhaseState {
        PhaseState::zeros(*like.grid())
    }

    fn advance(&self, x: &PhaseState, y: &PhaseState, z: &PhaseState) -> Result<(PhaseState, PhaseState, PhaseState)> {
        let rec = evolve_vu(&self.cfg, x, y, z)?;
        Ok((final_of(&rec, Component::Full)?, final_of(&rec, Component::V)?, final_of(&rec, Component::W)?))
    }

    fn base_norm(&self, s: &PhaseState) -> f64 {
        s.norm(self.spec.r_base())
    }

    fn strong_norm(&self, s: &PhaseState) -> f64 {
        s.norm(self.spec.r_ball())
    }

    fn sum_residual(&self, x: &PhaseState, y: &PhaseState, z: &PhaseState) -> f64 {
        (&(x - y) - z).norm(self.spec.r_base())
    }

    fn dist_to_strong_ball(&self, x: &PhaseState, radius: f64) -> Result<f64> {
        dist_to_ball(x, radius, self.spec)
    }
}

/// `V_x(t⋆)y = L(t⋆)y`, `U_x(t⋆)z = L(t⋆)z + ζ(t⋆; x)`.
#[derive(Debug, Clone)]
pub struct LinearSplitFlow {
    cfg: EvolutionConfig,
    t_star: f64,
    spec: NormSpec,
}

impl LinearSplitFlow {
    /// Strong space `𝓗^1` by default.
    pub fn new(cfg: &EvolutionConfig, t_star: f64) -> Result<Self> {
        let cfg = cfg.clone().with_t_final(t_star)?.with_stride(usize::MAX)?;
        Ok(Self { cfg, t_star, spec: NormSpec::new(0.0, 1.0)? })
    }
}

impl DecompositionFlow for LinearSplitFlow {
    type State = PhaseState;

    fn zero(&self, like: &PhaseState) -> PhaseState {
        PhaseState::zeros(*like.grid())
    }

    fn advance(&self, x: &PhaseState, y: &PhaseState, z: &PhaseState) -> Result<(PhaseState, PhaseState, PhaseState)> {
        let rec = evolve_linear_split(&self.cfg, x)?;
        let zeta = final_of(&rec, Component::Zeta)?;
        let u = &step_linear(z, self.t_star) + &zeta;
        Ok((final_of(&rec, Component::Full)?, step_linear(y, self.t_star), u))
    }

    fn base_norm(&self, s: &PhaseState) -> f64 {
        s.norm(self.spec.r_base())
    }

    fn strong_norm(&self, s: &PhaseState) -> f64 {
        s.norm(self.spec.r_ball())
    }

    fn sum_residual(&self, x: &PhaseState, y: &PhaseState, z: &PhaseState) -> f64 {
        (&(x - y) - z).norm(self.spec.r_base())
    }

    fn dist_to_strong_ball(&self, x: &PhaseState, radius: f64) -> Result<f64> {
        dist_to_ball(x, radius, self.spec)
    }
}
