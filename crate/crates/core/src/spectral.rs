//! Dirichlet-Laplacian eigenbasis on a box, fractional-power norms and the
//! sine-transform pair between coefficients and collocation values.
//!
//! Eigenfunctions are normalized in L², `e_k(x) = Π_i sqrt(2/L) sin(k_i π x_i / L)`,
//! so the coefficient 2-norm is the L² norm of the reconstructed function and
//! `‖u‖_r² = Σ λ_k^r u_k²` with `λ_k = (π/L)² |k|²`.
//!
//! Physical values live on the interior nodes `x_j = j L / (M + 1)`, `j = 1..=M`,
//! with `M = P·N` points per axis. On these nodes the discrete sine transform
//! of type I is exactly orthogonal for modes `1..=M`, so the forward/backward
//! pair is a projection onto the first `N` modes with no quadrature error.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default padding factor: with `3N` interior nodes the quintic product of a
/// field on the first `N` modes projects back onto those modes alias-free.
pub const DEFAULT_PADDING: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct ModeGrid {
    dimension: usize,
    modes: usize,
    length: f64,
    padding: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    dimension: usize,
    modes: usize,
    length: f64,
    #[serde(default = "default_padding")]
    padding: usize,
}

fn default_padding() -> usize {
    DEFAULT_PADDING
}

impl TryFrom<RawGrid> for ModeGrid {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        ModeGrid::new(raw.dimension, raw.modes, raw.length, raw.padding)
    }
}

impl ModeGrid {
    pub fn new(dimension: usize, modes: usize, length: f64, padding: usize) -> Result<Self> {
        if dimension != 1 && dimension != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 3, got {dimension}"
            )));
        }
        if modes == 0 {
            return Err(Error::InvalidGrid("modes per axis must be at least 1".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("edge length must be positive, got {length}")));
        }
        if padding == 0 {
            return Err(Error::InvalidGrid("padding factor must be at least 1".into()));
        }
        Ok(Self { dimension, modes, length, padding })
    }

    /// One-dimensional interval `(0, L)` with the default padding.
    pub fn interval(modes: usize, length: f64) -> Result<Self> {
        Self::new(1, modes, length, DEFAULT_PADDING)
    }

    /// Cube `(0, L)³` with the default padding.
    pub fn cube(modes: usize, length: f64) -> Result<Self> {
        Self::new(3, modes, length, DEFAULT_PADDING)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    /// Number of spectral coefficients, `N^d`.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Collocation nodes per axis, `P·N`.
    pub fn points_per_axis(&self) -> usize {
        self.padding * self.modes
    }

    fn unit_eigenvalue(&self) -> f64 {
        let q = PI / self.length;
        q * q
    }

    /// `(π/L)² Σ k_i²` for a 1-based multi-index.
    pub fn eigenvalue(&self, k: &[usize]) -> Result<f64> {
        self.check_index(k)?;
        let sq: usize = k.iter().map(|&ki| ki * ki).sum();
        Ok(self.unit_eigenvalue() * sq as f64)
    }

    /// Smallest eigenvalue, `d (π/L)²`.
    pub fn lambda_one(&self) -> f64 {
        self.dimension as f64 * self.unit_eigenvalue()
    }

    pub fn lambda_max(&self) -> f64 {
        (self.dimension * self.modes * self.modes) as f64 * self.unit_eigenvalue()
    }

    /// All eigenvalues in flat (row-major, last axis fastest) order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let unit = self.unit_eigenvalue();
        (0..self.len())
            .map(|flat| {
                let sq: usize = self.multi_index(flat).iter().map(|&k| k * k).sum();
                unit * sq as f64
            })
            .collect()
    }

    fn check_index(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.dimension || k.iter().any(|&ki| ki == 0 || ki > self.modes) {
            return Err(Error::IndexOutOfRange { index: k.to_vec(), modes: self.modes });
        }
        Ok(())
    }

    pub fn flat_index(&self, k: &[usize]) -> Result<usize> {
        self.check_index(k)?;
        Ok(k.iter().fold(0, |acc, &ki| acc * self.modes + (ki - 1)))
    }

    /// 1-based multi-index of a flat position.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut k = vec![0; self.dimension];
        let mut rest = flat;
        for slot in k.iter_mut().rev() {
            *slot = rest % self.modes + 1;
            rest /= self.modes;
        }
        k
    }

    /// `sup_x |e_k(x)|`, identical for every mode.
    pub(crate) fn sup_scale(&self) -> f64 {
        (2.0 / self.length).powf(self.dimension as f64 / 2.0)
    }
}

/// Coefficients of a function in the Dirichlet eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: ModeGrid,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(grid: ModeGrid) -> Self {
        Self { grid, coeffs: vec![0.0; grid.len()] }
    }

    pub fn from_coeffs(grid: ModeGrid, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    /// Unit coefficient on the eigenfunction `e_k`.
    pub fn basis(grid: ModeGrid, k: &[usize]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        let idx = grid.flat_index(k)?;
        field.coeffs[idx] = 1.0;
        Ok(field)
    }

    /// Builds a field from `(multi-index, coefficient)` pairs; unlisted modes are zero.
    pub fn from_pairs(grid: ModeGrid, pairs: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut field = Self::zeros(grid);
        for (k, c) in pairs {
            let idx = grid.flat_index(k)?;
            field.coeffs[idx] = *c;
        }
        Ok(field)
    }

    pub fn to_pairs(&self) -> Vec<(Vec<usize>, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.grid.multi_index(i), c))
            .collect()
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `‖u‖_r = ‖A^{r/2} u‖`.
    pub fn norm_r(&self, r: f64) -> f64 {
        self.norm_sq_r(r).sqrt()
    }

    pub fn norm_sq_r(&self, r: f64) -> f64 {
        weighted_sum(&self.grid, r, self.coeffs.iter().map(|c| c * c))
    }

    /// `⟨u, v⟩_r = ⟨A^{r/2} u, A^{r/2} v⟩`.
    pub fn inner_r(&self, other: &Self, r: f64) -> f64 {
        weighted_sum(&self.grid, r, self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b))
    }

    /// Coefficients scaled by `λ_k^p`.
    pub fn apply_a_power(&self, p: f64) -> Self {
        if p == 0.0 {
            return self.clone();
        }
        let coeffs = self
            .grid
            .eigenvalues()
            .iter()
            .zip(&self.coeffs)
            .map(|(lam, c)| c * lam.powf(p))
            .collect();
        Self { grid: self.grid, coeffs }
    }

    /// Upper bound on `sup_x |u(x)|` from `|e_k| ≤ (2/L)^{d/2}`.
    pub fn sup_bound(&self) -> f64 {
        self.grid.sup_scale() * self.coeffs.iter().map(|c| c.abs()).sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        Ok(())
    }
}

fn weighted_sum(grid: &ModeGrid, r: f64, terms: impl Iterator<Item = f64>) -> f64 {
    if r == 0.0 {
        return terms.sum();
    }
    grid.eigenvalues().iter().zip(terms).map(|(lam, t)| lam.powf(r) * t).sum()
}

impl Serialize for SpectralField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for (i, c) in self.coeffs.iter().enumerate() {
            seq.serialize_element(&(self.grid.multi_index(i), c))?;
        }
        seq.end()
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: Self) -> SpectralField {
        debug_assert_eq!(self.grid, rhs.grid);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: Self) -> SpectralField {
        debug_assert_eq!(self.grid, rhs.grid);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, s: f64) -> SpectralField {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }
}

/// A point `(u, u_t)` of the product space `𝓗^r = H^{r+1} × H^r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub pos: SpectralField,
    pub vel: SpectralField,
}

impl PhaseState {
    pub fn new(pos: SpectralField, vel: SpectralField) -> Result<Self> {
        pos.same_grid(&vel)?;
        Ok(Self { pos, vel })
    }

    pub fn zeros(grid: ModeGrid) -> Self {
        Self { pos: SpectralField::zeros(grid), vel: SpectralField::zeros(grid) }
    }

    pub fn grid(&self) -> &ModeGrid {
        self.pos.grid()
    }

    /// `‖(u, v)‖_{𝓗^r}² = ‖u‖_{r+1}² + ‖v‖_r²`.
    pub fn norm_sq(&self, r: f64) -> f64 {
        self.pos.norm_sq_r(r + 1.0) + self.vel.norm_sq_r(r)
    }

    pub fn norm(&self, r: f64) -> f64 {
        self.norm_sq(r).sqrt()
    }

    /// Per-coefficient weights of `‖·‖_{𝓗^r}²`, positions first then velocities.
    pub fn weights(grid: &ModeGrid, r: f64) -> Vec<f64> {
        let lam = grid.eigenvalues();
        lam.iter().map(|l| l.powf(r + 1.0)).chain(lam.iter().map(|l| l.powf(r))).collect()
    }

    /// Positions then velocities as one coefficient vector.
    pub fn to_flat(&self) -> Vec<f64> {
        self.pos.coeffs().iter().chain(self.vel.coeffs()).copied().collect()
    }

    pub fn from_flat(grid: ModeGrid, flat: &[f64]) -> Result<Self> {
        let n = grid.len();
        if flat.len() != 2 * n {
            return Err(Error::InvalidGrid(format!(
                "expected {} phase coefficients, got {}",
                2 * n,
                flat.len()
            )));
        }
        Ok(Self {
            pos: SpectralField::from_coeffs(grid, flat[..n].to_vec())?,
            vel: SpectralField::from_coeffs(grid, flat[n..].to_vec())?,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.pos.max_abs_diff(&other.pos).max(self.vel.max_abs_diff(&other.vel))
    }
}

impl Add for &PhaseState {
    type Output = PhaseState;

    fn add(self, rhs: Self) -> PhaseState {
        PhaseState { pos: &self.pos + &rhs.pos, vel: &self.vel + &rhs.vel }
    }
}

impl Sub for &PhaseState {
    type Output = PhaseState;

    fn sub(self, rhs: Self) -> PhaseState {
        PhaseState { pos: &self.pos - &rhs.pos, vel: &self.vel - &rhs.vel }
    }
}

impl Mul<f64> for &PhaseState {
    type Output = PhaseState;

    fn mul(self, s: f64) -> PhaseState {
        PhaseState { pos: &self.pos * s, vel: &self.vel * s }
    }
}

/// Sine-transform pair between the first `N` modes and `M` interior nodes per axis.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    grid: ModeGrid,
    points: usize,
    /// `M × N`, entry `(j, k) = e_k(x_j)` along one axis.
    synthesis: Vec<f64>,
    /// `N × M`, entry `(k, j) = h e_k(x_j)`.
    analysis: Vec<f64>,
}

impl SpectralTransform {
    pub fn new(grid: &ModeGrid) -> Self {
        Self::with_points(grid, grid.points_per_axis())
    }

    /// Transform on a custom node count; `points ≥ N` keeps the pair exact on the first `N` modes.
    pub fn with_points(grid: &ModeGrid, points: usize) -> Self {
        let n = grid.modes();
        let m = points.max(n);
        let length = grid.length();
        let h = length / (m + 1) as f64;
        let amp = (2.0 / length).sqrt();
        let mut synthesis = vec![0.0; m * n];
        let mut analysis = vec![0.0; n * m];
        for j in 0..m {
            for k in 0..n {
                // sin(k π (j+1) / (M+1)) evaluated on the integer phase to limit round-off.
                let phase = ((k + 1) * (j + 1)) % (2 * (m + 1));
                let v = amp * (PI * phase as f64 / (m + 1) as f64).sin();
                synthesis[j * n + k] = v;
                analysis[k * m + j] = h * v;
            }
        }
        Self { grid: *grid, points: m, synthesis, analysis }
    }

    pub fn grid(&self) -> &ModeGrid {
        &self.grid
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Total number of physical nodes, `M^d`.
    pub fn physical_len(&self) -> usize {
        self.points.pow(self.grid.dimension() as u32)
    }

    /// Node coordinates along one axis.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.grid.length() / (self.points + 1) as f64;
        (1..=self.points).map(|j| j as f64 * h).collect()
    }

    /// Quadrature weight `h^d` that makes Parseval exact on the nodes.
    pub fn quadrature_weight(&self) -> f64 {
        let h = self.grid.length() / (self.points + 1) as f64;
        h.powi(self.grid.dimension() as i32)
    }

    pub fn to_physical(&self, u: &SpectralField) -> Vec<f64> {
        let n = self.grid.modes();
        let m = self.points;
        let dim = self.grid.dimension();
        let mut data = u.coeffs().to_vec();
        let mut shape = vec![n; dim];
        for axis in 0..dim {
            data = apply_axis(&data, &shape, axis, &self.synthesis, m);
            shape[axis] = m;
        }
        data
    }

    /// Galerkin projection of nodal values onto the first `N` modes.
    pub fn to_spectral(&self, values: &[f64]) -> SpectralField {
        let n = self.grid.modes();
        let m = self.points;
        let dim = self.grid.dimension();
        debug_assert_eq!(values.len(), self.physical_len());
        let mut data = values.to_vec();
        let mut shape = vec![m; dim];
        for axis in 0..dim {
            data = apply_axis(&data, &shape, axis, &self.analysis, n);
            shape[axis] = n;
        }
        SpectralField { grid: self.grid, coeffs: data }
    }
}

/// Applies the row-major `out × shape[axis]` matrix along one axis of a row-major tensor.
fn apply_axis(data: &[f64], shape: &[usize], axis: usize, matrix: &[f64], out: usize) -> Vec<f64> {
    let inp = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut result = vec![0.0; outer * out * inner];
    for o in 0..outer {
        for i_out in 0..out {
            let row = &matrix[i_out * inp..(i_out + 1) * inp];
            let dst = &mut result[(o * out + i_out) * inner..(o * out + i_out + 1) * inner];
            for (i_in, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let src = &data[(o * inp + i_in) * inner..(o * inp + i_in + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }
    result
}

/// Nodal values on the default padded grid.
pub fn to_physical(u: &SpectralField) -> Vec<f64> {
    SpectralTransform::new(u.grid()).to_physical(u)
}

/// Inverse of [`to_physical`] on the default padded grid.
pub fn to_spectral(grid: &ModeGrid, values: &[f64]) -> SpectralField {
    SpectralTransform::new(grid).to_spectral(values)
}
