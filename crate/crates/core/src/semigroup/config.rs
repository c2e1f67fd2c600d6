use crate::error::{Error, Result};
use crate::nonlinearity::PhiSpec;
use crate::spectral::{ModeGrid, SpectralField};

use super::energy::check_energy_parameter;

pub const DEFAULT_EPSILON: f64 = 0.05;
/// `‖state‖_𝓗` above which an evolution aborts.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Largest stable step of the explicit nonlinear kick for states with `sup |u| ≤ amplitude`.
pub fn dt_max(phi: &PhiSpec, amplitude: f64) -> f64 {
    0.5 / phi.lipschitz_bound(amplitude).max(1.0)
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    grid: ModeGrid,
    phi: PhiSpec,
    forcing: SpectralField,
    dt: f64,
    t_final: f64,
    epsilon: f64,
    stride: usize,
    amplitude_bound: f64,
}

impl EvolutionConfig {
    /// Defaults: `ε = 0.05`, a record every `0.1` time units and an amplitude
    /// bound of `max(1, 2 sup|A⁻¹f|)`.
    pub fn new(grid: ModeGrid, phi: PhiSpec, forcing: SpectralField, dt: f64, t_final: f64) -> Result<Self> {
        let stride = if dt > 0.0 { ((0.1 / dt).round() as usize).max(1) } else { 1 };
        let amplitude_bound = (2.0 * forcing.apply_a_power(-1.0).sup_bound()).max(1.0);
        let cfg = Self {
            grid,
            phi,
            forcing,
            dt,
            t_final,
            epsilon: DEFAULT_EPSILON,
            stride,
            amplitude_bound,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unforced configuration.
    pub fn unforced(grid: ModeGrid, phi: PhiSpec, dt: f64, t_final: f64) -> Result<Self> {
        Self::new(grid, phi, SpectralField::zeros(grid), dt, t_final)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        self.stride = stride;
        self.validate()?;
        Ok(self)
    }

    pub fn with_amplitude_bound(mut self, amplitude: f64) -> Result<Self> {
        self.amplitude_bound = amplitude;
        self.validate()?;
        Ok(self)
    }

    pub fn with_t_final(mut self, t_final: f64) -> Result<Self> {
        self.t_final = t_final;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.forcing.grid() != &self.grid {
            return Err(Error::Config("forcing lives on a different grid".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config(format!("final time must be nonnegative, got {}", self.t_final)));
        }
        if self.stride == 0 {
            return Err(Error::Config("recording stride must be at least 1".into()));
        }
        let alias_free = 2 * self.grid.padding() - 1;
        if self.phi.degree() > alias_free {
            return Err(Error::Config(format!(
                "degree {} nonlinearity aliases with padding {} (max degree {alias_free})",
                self.phi.degree(),
                self.grid.padding()
            )));
        }
        if self.phi.lambda_shift() >= self.grid.lambda_one() {
            return Err(Error::Config(format!(
                "λ shift {} must stay below λ₁ = {}",
                self.phi.lambda_shift(),
                self.grid.lambda_one()
            )));
        }
        check_energy_parameter(&self.grid, self.epsilon)?;
        if !(self.amplitude_bound.is_finite() && self.amplitude_bound > 0.0) {
            return Err(Error::Config("amplitude bound must be positive".into()));
        }
        let limit = dt_max(&self.phi, self.amplitude_bound);
        if self.dt > limit {
            return Err(Error::Config(format!(
                "dt = {} exceeds the stability limit {limit:.3e} for amplitude {}",
                self.dt, self.amplitude_bound
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn forcing(&self) -> &SpectralField {
        &self.forcing
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn amplitude_bound(&self) -> f64 {
        self.amplitude_bound
    }

    /// Number of steps and the step that lands exactly on `t_final`.
    pub fn step_plan(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let steps = ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_final / steps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> ModeGrid {
        ModeGrid::interval(8, 1.0).unwrap()
    }

    #[test]
    fn rejects_large_step() {
        let phi = PhiSpec::quintic(0.5).unwrap();
        let cfg = EvolutionConfig::unforced(grid(), phi.clone(), 0.01, 1.0).unwrap();
        assert!(cfg.clone().with_amplitude_bound(4.0).is_err());
        assert!(EvolutionConfig::unforced(grid(), phi, 0.2, 1.0).is_err());
    }

    #[test]
    fn rejects_aliasing_and_shift() {
        let seventh = PhiSpec::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 1.0, 0.0).unwrap();
        assert!(EvolutionConfig::unforced(grid(), seventh, 1e-4, 1.0).is_err());
        let shifted = PhiSpec::cubic_minus_linear(1.0, 10.0).unwrap();
        assert!(EvolutionConfig::unforced(grid(), shifted, 1e-3, 1.0).is_err());
    }

    #[test]
    fn step_plan_lands_on_final_time() {
        let cfg = EvolutionConfig::unforced(grid(), PhiSpec::zero(), 0.03, 1.0).unwrap();
        let (n, dt) = cfg.step_plan();
        assert_eq!(n, 34);
        assert!((n as f64 * dt - 1.0).abs() < 1e-12);
        assert!(dt <= 0.03);
        let exact = cfg.with_dt(0.01).unwrap();
        assert_eq!(exact.step_plan().0, 100);
    }

    #[test]
    fn dt_limit_formula() {
        let phi = PhiSpec::quintic(0.5).unwrap();
        assert!((dt_max(&phi, 2.0) - 0.5 / 80.0).abs() < 1e-15);
        assert_eq!(dt_max(&PhiSpec::zero(), 100.0), 0.5);
    }
}
