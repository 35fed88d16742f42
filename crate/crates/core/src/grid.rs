//! Periodic position/momentum lattices and the ℏ-Fourier transform.
//!
//! Positions are `x_j = -L + j·Δx` with `Δx = 2L/N`; momenta are `ξ_m = m·Δξ`
//! with `Δξ = πℏ/L` and `m ∈ [-N/2, N/2)`, stored at index `m + N/2` so that
//! `ξ = 0` is a lattice point. Multi-dimensional arrays are row-major with the
//! last axis varying fastest.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::fft::{transform_axis, Direction, Plan};
use crate::linalg::{Vector, MAX_DIM};
use crate::{Error, Result};

/// Largest accepted total number of lattice points.
pub const MAX_POINTS: usize = 1 << 24;

/// A `[-L, L)^d` box with `N` points per axis, tied to a value of ℏ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    points: usize,
    hbar: f64,
}

impl GridSpec {
    /// `N` must be even; power-of-two sizes take the fast transform path.
    pub fn new(dim: usize, half_width: f64, points: usize, hbar: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!("hbar {hbar} must be positive")));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!("{points} points per axis; need an even number ≥ 2")));
        }
        match points.checked_pow(dim as u32) {
            Some(total) if total <= MAX_POINTS => {}
            _ => {
                return Err(Error::SizeGuard {
                    size: points.saturating_pow(dim as u32),
                    limit: MAX_POINTS,
                })
            }
        }
        Ok(Self {
            dim,
            half_width,
            points,
            hbar,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Same lattice at a different ℏ.
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Self::new(self.dim, self.half_width, self.points, hbar)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    pub fn dxi(&self) -> f64 {
        PI * self.hbar / self.half_width
    }

    /// Cell volume `Δx^d`.
    pub fn position_cell(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Cell volume `Δξ^d`.
    pub fn momentum_cell(&self) -> f64 {
        self.dxi().powi(self.dim as i32)
    }

    /// The momentum window is `[-limit, limit)` on every axis.
    pub fn momentum_limit(&self) -> f64 {
        self.dxi() * (self.points / 2) as f64
    }

    pub fn position_axis(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn momentum_axis(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.dxi()
    }

    /// Per-axis lattice indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn position(&self, flat: usize) -> Vector {
        let idx = self.multi_index(flat);
        let mut v = Vector::zeros(self.dim);
        for axis in 0..self.dim {
            v[axis] = self.position_axis(idx[axis]);
        }
        v
    }

    pub fn momentum(&self, flat: usize) -> Vector {
        let idx = self.multi_index(flat);
        let mut v = Vector::zeros(self.dim);
        for axis in 0..self.dim {
            v[axis] = self.momentum_axis(idx[axis]);
        }
        v
    }

    /// Whether `x` lies strictly inside the position box.
    pub fn contains_position(&self, x: &Vector) -> bool {
        x.iter().all(|c| c.abs() < self.half_width)
    }

    /// Whether `xi` lies strictly inside the momentum window.
    pub fn contains_momentum(&self, xi: &Vector) -> bool {
        let limit = self.momentum_limit();
        xi.iter().all(|c| c.abs() < limit)
    }

    /// Flat index of the momentum lattice point nearest to `xi`.
    pub fn nearest_momentum_index(&self, xi: &Vector) -> Option<usize> {
        let mut idx = [0; MAX_DIM];
        for axis in 0..self.dim {
            let k = (xi[axis] / self.dxi()).round() + (self.points / 2) as f64;
            if k < 0.0 || k >= self.points as f64 {
                return None;
            }
            idx[axis] = k as usize;
        }
        Some(self.flat_index(&idx[..self.dim]))
    }

    fn same_lattice(&self, other: &Self) -> bool {
        self == other
    }
}

/// Whether wavefunction values are samples in position or in momentum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Position,
    Momentum,
}

/// Samples of a complex function on a [`GridSpec`] lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    representation: Representation,
}

impl Wavefunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, representation: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            representation,
        })
    }

    pub fn zeros(grid: GridSpec, representation: Representation) -> Self {
        Self {
            grid,
            values: alloc::vec![Complex64::new(0.0, 0.0); grid.len()],
            representation,
        }
    }

    /// Samples `f` at every position lattice point.
    pub fn from_position_fn<F: FnMut(&Vector) -> Complex64>(grid: GridSpec, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self {
            grid,
            values,
            representation: Representation::Position,
        }
    }

    /// Samples `f` at every momentum lattice point.
    pub fn from_momentum_fn<F: FnMut(&Vector) -> Complex64>(grid: GridSpec, mut f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.momentum(i))).collect();
        Self {
            grid,
            values,
            representation: Representation::Momentum,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Lattice coordinate of sample `i` in the current representation.
    pub fn coordinate(&self, i: usize) -> Vector {
        match self.representation {
            Representation::Position => self.grid.position(i),
            Representation::Momentum => self.grid.momentum(i),
        }
    }

    fn cell(&self) -> f64 {
        match self.representation {
            Representation::Position => self.grid.position_cell(),
            Representation::Momentum => self.grid.momentum_cell(),
        }
    }

    pub fn expect(&self, representation: Representation) -> Result<()> {
        if self.representation != representation {
            return Err(Error::Representation {
                expected: representation,
                found: self.representation,
            });
        }
        Ok(())
    }

    /// Pointwise product with a real weight sampled on the same lattice.
    pub fn multiply_real(&mut self, weights: &[f64]) {
        debug_assert_eq!(weights.len(), self.values.len());
        self.values.iter_mut().zip(weights).for_each(|(v, w)| *v *= *w);
    }

    pub fn scale(&mut self, s: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self + s·other`.
    pub fn axpy(&mut self, s: Complex64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        self.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a += s * b);
        Ok(())
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.values
            .iter_mut()
            .zip(&other.values)
            .for_each(|(a, b)| *a -= b);
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch);
        }
        other.expect(self.representation)
    }
}

/// The plane wave `e^{i⟨ξ₀,x⟩/ℏ}` sampled in position.
pub fn plane_wave(grid: GridSpec, xi0: &Vector) -> Result<Wavefunction> {
    if xi0.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: xi0.dim(),
        });
    }
    let limit = grid.momentum_limit();
    for (axis, &value) in xi0.iter().enumerate() {
        if !(value.abs() < limit) {
            return Err(Error::MomentumAliasing { axis, value, limit });
        }
    }
    let hbar = grid.hbar();
    Ok(Wavefunction::from_position_fn(grid, |x| {
        Complex64::from_polar(1.0, xi0.dot(x) / hbar)
    }))
}

/// `(𝓕_ℏ f)(ξ) = (2πℏ)^{-d/2} Σ_x f(x) e^{-i⟨ξ,x⟩/ℏ} Δx^d` on the momentum
/// lattice. Unitary with the quadrature weights of each side.
pub fn hbar_fourier(f: &Wavefunction) -> Result<Wavefunction> {
    f.expect(Representation::Position)?;
    let grid = *f.grid();
    let (d, n) = (grid.dim(), grid.points_per_axis());
    let mut data = f.values().to_vec();
    let plan = Plan::new(n, Direction::Forward);
    for axis in 0..d {
        transform_axis(&mut data, d, n, axis, &plan);
    }
    // DFT index (m mod N) holds (-1)^m times the value at momentum index m + N/2.
    let scale = (2.0 * PI * grid.hbar()).powf(-(d as f64) / 2.0) * grid.position_cell();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); data.len()];
    let half = n / 2;
    for (k_flat, slot) in out.iter_mut().enumerate() {
        let k = grid.multi_index(k_flat);
        let mut src = [0usize; MAX_DIM];
        let mut negate = false;
        for axis in 0..d {
            src[axis] = (k[axis] + half) % n;
            negate ^= (k[axis] + half) % 2 == 1;
        }
        let v = data[grid.flat_index(&src[..d])] * scale;
        *slot = if negate { -v } else { v };
    }
    Wavefunction::new(grid, out, Representation::Momentum)
}

/// Inverse of [`hbar_fourier`].
pub fn hbar_inverse_fourier(g: &Wavefunction) -> Result<Wavefunction> {
    g.expect(Representation::Momentum)?;
    let grid = *g.grid();
    let (d, n) = (grid.dim(), grid.points_per_axis());
    let half = n / 2;
    let scale = (2.0 * PI * grid.hbar()).powf(-(d as f64) / 2.0) * grid.momentum_cell();
    let mut data = alloc::vec![Complex64::new(0.0, 0.0); g.values().len()];
    for (k_flat, v) in g.values().iter().enumerate() {
        let k = grid.multi_index(k_flat);
        let mut dst = [0usize; MAX_DIM];
        let mut negate = false;
        for axis in 0..d {
            dst[axis] = (k[axis] + half) % n;
            negate ^= (k[axis] + half) % 2 == 1;
        }
        let v = *v * scale;
        data[grid.flat_index(&dst[..d])] = if negate { -v } else { v };
    }
    let plan = Plan::new(n, Direction::Backward);
    for axis in 0..d {
        transform_axis(&mut data, d, n, axis, &plan);
    }
    Wavefunction::new(grid, data, Representation::Position)
}

/// Quadrature-weighted `L²` norm.
pub fn l2_norm(f: &Wavefunction) -> f64 {
    let sum: f64 = f.values().iter().map(|v| v.norm_sqr()).sum();
    (sum * f.cell()).sqrt()
}

/// `⟨f, g⟩ = Σ conj(f)·g·Δ^d`, conjugate-linear in the first slot.
pub fn inner_product(f: &Wavefunction, g: &Wavefunction) -> Result<Complex64> {
    f.check_compatible(g)?;
    let sum: Complex64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * f.cell())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_identity() {
        let g = GridSpec::new(2, 3.0, 64, 0.01).unwrap();
        let lhs = g.dx() * g.dxi();
        assert!((lhs - 2.0 * PI * 0.01 / 64.0).abs() < 1e-15);
        assert_eq!(g.momentum_axis(32), 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0, 1.0, 8, 1.0).is_err());
        assert!(GridSpec::new(4, 1.0, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 1.0, 7, 1.0).is_err());
        assert!(GridSpec::new(1, -1.0, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 1.0, 8, 0.0).is_err());
    }

    #[test]
    fn plane_wave_value_at_quarter_period() {
        let g = GridSpec::new(1, PI, 8, 1.0).unwrap();
        let f = plane_wave(g, &Vector::from_slice(&[1.0])).unwrap();
        // x_6 = -π + 6·π/4 = π/2
        let v = f.values()[6];
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_rejects_aliased_momentum() {
        let g = GridSpec::new(1, 1.0, 8, 0.1).unwrap();
        let err = plane_wave(g, &Vector::from_slice(&[g.momentum_limit()])).unwrap_err();
        assert!(matches!(err, Error::MomentumAliasing { .. }));
    }

    #[test]
    fn transform_checks_representation() {
        let g = GridSpec::new(1, 1.0, 8, 0.1).unwrap();
        let f = Wavefunction::zeros(g, Representation::Momentum);
        assert!(matches!(hbar_fourier(&f), Err(Error::Representation { .. })));
        let f = Wavefunction::zeros(g, Representation::Position);
        assert!(hbar_inverse_fourier(&f).is_err());
    }
}
