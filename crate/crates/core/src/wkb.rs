//! Leading-order propagation of a plane wave through a chain and the
//! residual against exact application of the quantized chain.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_momentum, jacobian_chain, phase_cocycle, ChainSpec};
use crate::fio::FioChain;
use crate::grid::{l2_norm, plane_wave, GridSpec, Wavefunction};
use crate::linalg::Vector;
use crate::symbols::{leading_symbol_product_on_orbit, SymbolSpec};
use crate::{Error, Result};

/// The ingredients of `e^{iA_n/ℏ} e_{ξ_n}(x) (det ∇p^{(n)}(ξ_0))^{1/2} b₀^{(n)}(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WkbState {
    pub xi_n: Vector,
    pub a_n: f64,
    pub det_prefactor: f64,
    pub b0_profile: Wavefunction,
}

impl WkbState {
    /// Evaluates the ansatz on the grid of the amplitude profile.
    pub fn evaluate(&self) -> Wavefunction {
        let grid = *self.b0_profile.grid();
        let hbar = grid.hbar();
        let mut out = self.b0_profile.clone();
        for (i, v) in out.values_mut().iter_mut().enumerate() {
            let phase = (self.a_n + self.xi_n.dot(&grid.position(i))) / hbar;
            *v *= Complex64::from_polar(self.det_prefactor, phase);
        }
        out
    }
}

/// Builds the leading-order state after `n` steps from `e_{ξ_0}`.
pub fn wkb_state(
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    xi0: &Vector,
    n: usize,
    grid: GridSpec,
) -> Result<WkbState> {
    let orbit = evolve_momentum(chain, xi0, n)?;
    let limit = grid.momentum_limit();
    for xi in &orbit {
        for (axis, &value) in xi.iter().enumerate() {
            if !(value.abs() < limit) {
                return Err(Error::MomentumAliasing { axis, value, limit });
            }
        }
    }
    let a_n = phase_cocycle(chain, xi0, n)?;
    let (_, det) = jacobian_chain(chain, xi0, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let b = if n == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            leading_symbol_product_on_orbit(chain, symbols, &grid.position(i), &orbit)?
        };
        values.push(b);
    }
    Ok(WkbState {
        xi_n: orbit[n],
        a_n,
        det_prefactor: det.sqrt(),
        b0_profile: Wavefunction::new(grid, values, crate::grid::Representation::Position)?,
    })
}

/// The leading-order ansatz on `grid`; `n = 0` gives the plane wave itself.
pub fn wkb_ansatz(
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    xi0: &Vector,
    n: usize,
    grid: GridSpec,
) -> Result<Wavefunction> {
    if n == 0 {
        return plane_wave(grid, xi0);
    }
    Ok(wkb_state(chain, symbols, xi0, n, grid)?.evaluate())
}

/// Absolute and relative `L²` distance between the exact chain image and the
/// ansatz.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WkbResidual {
    pub abs: f64,
    pub rel: f64,
    pub ansatz_norm: f64,
}

/// Compares `P̂_n···P̂_1 e_{ξ_0}` with the ansatz. The first symbol's input
/// cutoff acts on the plane wave inside `P̂_1`, so the box truncation is exact.
pub fn wkb_residual(
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    grid: GridSpec,
    xi0: &Vector,
    n: usize,
) -> Result<WkbResidual> {
    let ops = FioChain::build(chain, symbols, grid, n)?;
    wkb_residual_with(&ops, chain, symbols, xi0, n)
}

/// As [`wkb_residual`] with prebuilt operators.
pub fn wkb_residual_with(
    ops: &FioChain,
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    xi0: &Vector,
    n: usize,
) -> Result<WkbResidual> {
    let grid = *ops.grid();
    let ansatz = wkb_ansatz(chain, symbols, xi0, n, grid)?;
    let ansatz_norm = l2_norm(&ansatz);
    if !(ansatz_norm > 0.0) {
        return Err(Error::Degenerate(alloc::format!(
            "ansatz vanishes: the orbit of {xi0:?} leaves the symbol supports"
        )));
    }
    let exact = ops.chain_apply(&plane_wave(grid, xi0)?)?;
    let abs = l2_norm(&exact.difference(&ansatz)?);
    Ok(WkbResidual {
        abs,
        rel: abs / ansatz_norm,
        ansatz_norm,
    })
}
