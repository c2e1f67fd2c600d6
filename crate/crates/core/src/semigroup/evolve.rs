//! Strang-split integrator for `u_tt + Au_t + Au + φ(u) = f` and its decompositions.
//!
//! Every run co-evolves a set of components with one shared step: a half step of
//! the exact (affine) linear propagator, an explicit kick of the velocities with
//! nonlinear sources evaluated on the padded grid, and another linear half step.
//! All kicks of a step are computed from the same stage, so the decomposition
//! identities hold to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{ModeGrid, PhaseState, SpectralField, SpectralTransform};

use super::config::{EvolutionConfig, DIVERGENCE_GUARD};
use super::energy::{lambda0, lambda1};
use super::linear::mode_propagator;

/// Drift of a decomposition identity that aborts a run.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `(u, u_t)`, the full solution.
    Full,
    /// `v̂` with source `−φ0(v̂)` and full initial data.
    HatV,
    /// `ŵ` with source `f − φ(u) + φ0(v̂)` and zero initial data.
    HatW,
    /// `v` with source `g = −vψ(v̂)`.
    V,
    /// `w` with source `h = f − φ(u) + vψ(v̂)`.
    W,
    /// `L(t)x`, the unforced linear flow.
    Linear,
    /// `ζ` with source `f − φ(u)` and zero initial data.
    Zeta,
}

impl Component {
    fn forced(self) -> bool {
        matches!(self, Component::Full | Component::HatW | Component::W | Component::Zeta)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Full => "full",
            Component::HatV => "hat_v",
            Component::HatW => "hat_w",
            Component::V => "v",
            Component::W => "w",
            Component::Linear => "linear",
            Component::Zeta => "zeta",
        }
    }
}

/// Norms of a recorded state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "H_quarter")]
    pub h_quarter: f64,
    #[serde(rename = "H1")]
    pub h1: f64,
}

impl Norms {
    pub fn of(state: &PhaseState) -> Self {
        Self { h: state.norm(0.0), h_quarter: state.norm(0.25), h1: state.norm(1.0) }
    }
}

/// One line of the trajectory file.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySample<'a> {
    pub t: f64,
    pub component: Component,
    pub norms: Norms,
    #[serde(rename = "Lambda0")]
    pub lambda0: f64,
    #[serde(rename = "Lambda1")]
    pub lambda1: f64,
    pub state: &'a PhaseState,
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub t: f64,
    /// Aligned with [`TrajectoryRecord::components`].
    pub states: Vec<PhaseState>,
}

/// Snapshot of all five states of a `V/U` run.
#[derive(Debug, Clone)]
pub struct DecomposedState {
    pub full: PhaseState,
    pub hat_v: PhaseState,
    pub hat_w: PhaseState,
    pub v: PhaseState,
    pub w: PhaseState,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub grid: ModeGrid,
    pub dt: f64,
    pub steps: usize,
    pub epsilon: f64,
    pub components: Vec<Component>,
    pub frames: Vec<Frame>,
    /// Largest decomposition drift in `𝓗` over the recorded frames.
    pub max_drift: f64,
}

impl TrajectoryRecord {
    fn slot(&self, c: Component) -> Option<usize> {
        self.components.iter().position(|&x| x == c)
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn state(&self, c: Component, frame: usize) -> Option<&PhaseState> {
        let i = self.slot(c)?;
        self.frames.get(frame).map(|f| &f.states[i])
    }

    pub fn final_state(&self, c: Component) -> Option<&PhaseState> {
        self.frames.len().checked_sub(1).and_then(|last| self.state(c, last))
    }

    /// `(t, f(state))` for one component.
    pub fn series<F: Fn(&PhaseState) -> f64>(&self, c: Component, f: F) -> Vec<(f64, f64)> {
        match self.slot(c) {
            Some(i) => self.frames.iter().map(|fr| (fr.t, f(&fr.states[i]))).collect(),
            None => Vec::new(),
        }
    }

    pub fn decomposed(&self, frame: usize) -> Option<DecomposedState> {
        Some(DecomposedState {
            full: self.state(Component::Full, frame)?.clone(),
            hat_v: self.state(Component::HatV, frame)?.clone(),
            hat_w: self.state(Component::HatW, frame)?.clone(),
            v: self.state(Component::V, frame)?.clone(),
            w: self.state(Component::W, frame)?.clone(),
        })
    }

    pub fn samples(&self) -> impl Iterator<Item = TrajectorySample<'_>> {
        let eps = self.epsilon;
        self.frames.iter().flat_map(move |fr| {
            self.components.iter().zip(&fr.states).map(move |(&c, s)| TrajectorySample {
                t: fr.t,
                component: c,
                norms: Norms::of(s),
                lambda0: lambda0(s, eps),
                lambda1: lambda1(s, eps),
                state: s,
            })
        })
    }
}

/// Full solution `S(t)x`.
pub fn evolve_s(cfg: &EvolutionConfig, x: &PhaseState) -> Result<TrajectoryRecord> {
    Engine::new(cfg).run(&[(Component::Full, x.clone())])
}

/// `S(t)x = (v̂, v̂_t) + (ŵ, ŵ_t)`.
pub fn evolve_hat_split(cfg: &EvolutionConfig, x: &PhaseState) -> Result<TrajectoryRecord> {
    let zero = PhaseState::zeros(*cfg.grid());
    Engine::new(cfg).run(&[
        (Component::Full, x.clone()),
        (Component::HatV, x.clone()),
        (Component::HatW, zero),
    ])
}

/// `S(t)x = V_x(t)y + U_x(t)z` with `y + z = x`; also carries the hat split.
pub fn evolve_vu(cfg: &EvolutionConfig, x: &PhaseState, y: &PhaseState, z: &PhaseState) -> Result<TrajectoryRecord> {
    if cfg.phi().sigma() <= 0.0 && !cfg.phi().is_zero() {
        return Err(Error::Config("the V/U decomposition needs a cutoff σ > 0".into()));
    }
    let sum = y + z;
    let scale = x.pos.coeffs().iter().chain(x.vel.coeffs()).fold(1.0f64, |m, c| m.max(c.abs()));
    let gap = sum.max_abs_diff(x);
    if gap > 1e-12 * scale {
        return Err(Error::Precondition(format!("y + z differs from x by {gap:e}")));
    }
    let zero = PhaseState::zeros(*cfg.grid());
    Engine::new(cfg).run(&[
        (Component::Full, x.clone()),
        (Component::HatV, x.clone()),
        (Component::HatW, zero),
        (Component::V, y.clone()),
        (Component::W, z.clone()),
    ])
}

/// `S(t)x = L(t)x + ζ(t)`, the decomposition built on the linear semigroup.
pub fn evolve_linear_split(cfg: &EvolutionConfig, x: &PhaseState) -> Result<TrajectoryRecord> {
    let zero = PhaseState::zeros(*cfg.grid());
    Engine::new(cfg).run(&[
        (Component::Full, x.clone()),
        (Component::Linear, x.clone()),
        (Component::Zeta, zero),
    ])
}

struct Engine<'a> {
    cfg: &'a EvolutionConfig,
    dt: f64,
    steps: usize,
    half: Vec<[[f64; 2]; 2]>,
    /// `A⁻¹f`, the position of the linear equilibrium.
    shift: Vec<f64>,
    transform: Option<SpectralTransform>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a EvolutionConfig) -> Self {
        let (steps, dt) = cfg.step_plan();
        let lam = cfg.grid().eigenvalues();
        let half = lam.iter().map(|&l| mode_propagator(l, 0.5 * dt)).collect();
        let shift = cfg.forcing().apply_a_power(-1.0).into_coeffs();
        let transform = (!cfg.phi().is_zero()).then(|| SpectralTransform::new(cfg.grid()));
        Self { cfg, dt, steps, half, shift, transform }
    }

    fn linear_half(&self, state: &mut PhaseState, forced: bool) {
        let shift = &self.shift;
        let (u, v) = (state.pos.coeffs_mut(), state.vel.coeffs_mut());
        for k in 0..u.len() {
            let p = &self.half[k];
            let s = if forced { shift[k] } else { 0.0 };
            let (a, b) = (u[k] - s, v[k]);
            u[k] = p[0][0] * a + p[0][1] * b + s;
            v[k] = p[1][0] * a + p[1][1] * b;
        }
    }

    fn kick(&self, components: &[Component], states: &mut [PhaseState]) {
        let Some(tr) = &self.transform else { return };
        let phi = self.cfg.phi();
        let find = |c: Component| components.iter().position(|&x| x == c);
        let full = find(Component::Full).expect("full component always present");
        let hat_v = find(Component::HatV);
        let v = find(Component::V);

        let u_phys = tr.to_physical(&states[full].pos);
        let phi_u = tr.to_spectral(&u_phys.iter().map(|&x| phi.phi(x)).collect::<Vec<_>>());
        let hat_phys = hat_v.map(|i| tr.to_physical(&states[i].pos));
        let phi0_hat = hat_phys
            .as_ref()
            .map(|p| tr.to_spectral(&p.iter().map(|&x| phi.phi0(x)).collect::<Vec<_>>()));
        let v_psi = match (v, &hat_phys) {
            (Some(i), Some(hp)) => {
                let vp = tr.to_physical(&states[i].pos);
                let prod: Vec<f64> = vp.iter().zip(hp).map(|(&a, &b)| a * phi.psi_unchecked(b)).collect();
                Some(tr.to_spectral(&prod))
            }
            _ => None,
        };

        let dt = self.dt;
        let sub = |vel: &mut SpectralField, src: &SpectralField, sign: f64| {
            for (a, b) in vel.coeffs_mut().iter_mut().zip(src.coeffs()) {
                *a += sign * dt * b;
            }
        };
        for (c, st) in components.iter().zip(states.iter_mut()) {
            match c {
                Component::Full | Component::Zeta => sub(&mut st.vel, &phi_u, -1.0),
                Component::HatV => sub(&mut st.vel, phi0_hat.as_ref().unwrap(), -1.0),
                Component::HatW => {
                    sub(&mut st.vel, &phi_u, -1.0);
                    sub(&mut st.vel, phi0_hat.as_ref().unwrap(), 1.0);
                }
                Component::V => sub(&mut st.vel, v_psi.as_ref().unwrap(), -1.0),
                Component::W => {
                    sub(&mut st.vel, &phi_u, -1.0);
                    sub(&mut st.vel, v_psi.as_ref().unwrap(), 1.0);
                }
                Component::Linear => {}
            }
        }
    }

    fn drift(components: &[Component], states: &[PhaseState]) -> f64 {
        let find = |c: Component| components.iter().position(|&x| x == c);
        let Some(full) = find(Component::Full) else { return 0.0 };
        let pairs = [
            (Component::HatV, Component::HatW),
            (Component::V, Component::W),
            (Component::Linear, Component::Zeta),
        ];
        pairs
            .iter()
            .filter_map(|&(a, b)| {
                let (a, b) = (find(a)?, find(b)?);
                let sum = &states[a] + &states[b];
                Some((&sum - &states[full]).norm(0.0))
            })
            .fold(0.0, f64::max)
    }

    fn run(&self, init: &[(Component, PhaseState)]) -> Result<TrajectoryRecord> {
        let grid = *self.cfg.grid();
        let components: Vec<Component> = init.iter().map(|(c, _)| *c).collect();
        let needs = |c: Component, dep: Component| components.contains(&c) && !components.contains(&dep);
        if needs(Component::V, Component::HatV) || needs(Component::HatW, Component::HatV) {
            return Err(Error::Config("decomposition components require the v̂ system".into()));
        }
        let mut states: Vec<PhaseState> = Vec::with_capacity(init.len());
        for (_, s) in init {
            if s.grid() != &grid {
                return Err(Error::Config("initial state lives on a different grid".into()));
            }
            states.push(s.clone());
        }
        let amplitude = states[0].pos.sup_bound();
        if !self.cfg.phi().is_zero() && amplitude > self.cfg.amplitude_bound() {
            return Err(Error::Config(format!(
                "initial amplitude bound {amplitude:.3} exceeds the configured {:.3}; raise it and shrink dt",
                self.cfg.amplitude_bound()
            )));
        }

        let stride = self.cfg.stride();
        let mut frames = vec![Frame { t: 0.0, states: states.clone() }];
        let mut max_drift = Self::drift(&components, &states);
        for step in 1..=self.steps {
            for (c, s) in components.iter().zip(states.iter_mut()) {
                self.linear_half(s, c.forced());
            }
            self.kick(&components, &mut states);
            for (c, s) in components.iter().zip(states.iter_mut()) {
                self.linear_half(s, c.forced());
            }
            let t = step as f64 * self.dt;
            for s in &states {
                let n = s.norm(0.0);
                if !n.is_finite() || n > DIVERGENCE_GUARD {
                    return Err(Error::Instability { t, norm: n });
                }
            }
            if step % stride == 0 || step == self.steps {
                let drift = Self::drift(&components, &states);
                if drift > CONSISTENCY_TOLERANCE {
                    return Err(Error::Consistency { t, drift });
                }
                max_drift = max_drift.max(drift);
                frames.push(Frame { t, states: states.clone() });
            }
        }
        Ok(TrajectoryRecord {
            grid,
            dt: self.dt,
            steps: self.steps,
            epsilon: self.cfg.epsilon(),
            components,
            frames,
            max_drift,
        })
    }
}
