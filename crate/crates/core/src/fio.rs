//! Quantization of one classical step and products of such operators.
//!
//! For a product-form symbol the operator factors as
//!
//! ```text
//! P f(x') = v₁(x') Σ_θ k_θ(x') (𝓕_ℏ(u f))(θ),
//! k_θ(x') = (2πℏ)^{-d/2} Δθ^d (det ∇p(θ))^{1/2} g v₂(θ) e^{i(⟨p(θ),x'⟩ + α(θ))/ℏ},
//! ```
//!
//! where θ runs over the momentum lattice points inside the support of `v₂`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{pullback_position, ChainSpec, MomentumMap};
use crate::grid::{hbar_fourier, hbar_inverse_fourier, GridSpec, Representation, Wavefunction};
use crate::linalg::{DenseOperator, LinearOperator, Vector, MAX_DIM};
use crate::symbols::{symbol_for, SymbolSpec};
use crate::{Error, Result};

/// Largest `N^d` for which dense matrices are built.
pub const DENSE_LIMIT: usize = 4096;

/// Phase factors are re-anchored with an exact exponential this often.
const ANCHOR: usize = 32;

#[derive(Clone, Debug)]
struct ActiveMomentum {
    index: usize,
    theta: Vector,
    p: Vector,
    /// `(det ∇p(θ))^{1/2} g v₂(θ) e^{iα(θ)/ℏ}`
    weight: Complex64,
}

/// One quantized step `P̂` on a fixed grid.
#[derive(Clone)]
pub struct FioOperator {
    map: Arc<dyn MomentumMap>,
    symbol: SymbolSpec,
    grid: GridSpec,
    active: Vec<ActiveMomentum>,
    input_weights: Option<Vec<f64>>,
    output_weights: Vec<f64>,
}

impl FioOperator {
    /// Validates supports against the grid and precomputes the active
    /// momentum set. Any support that would wrap around the periodic box or
    /// leave the momentum window is refused.
    pub fn new(map: Arc<dyn MomentumMap>, symbol: SymbolSpec, grid: GridSpec) -> Result<Self> {
        let d = grid.dim();
        for found in [map.dim(), symbol.dim()] {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        let half = grid.half_width();
        let limit = grid.momentum_limit();
        let out_support = symbol.output_cutoff().support();
        if !out_support.inside_symmetric(half) {
            return Err(Error::SupportLeak(format!(
                "output cutoff support {:?}..{:?} is not inside the position box (-{half}, {half})",
                out_support.lower, out_support.upper
            )));
        }
        if let Some(u) = symbol.input_cutoff() {
            if !u.support().inside_symmetric(half) {
                return Err(Error::SupportLeak(format!(
                    "input cutoff support {:?}..{:?} is not inside the position box (-{half}, {half})",
                    u.support().lower,
                    u.support().upper
                )));
            }
        }
        let mom_support = symbol.momentum_cutoff().support();
        if !mom_support.inside_symmetric(limit) {
            return Err(Error::SupportLeak(format!(
                "momentum cutoff support {:?}..{:?} is not inside the momentum window (-{limit}, {limit})",
                mom_support.lower, mom_support.upper
            )));
        }

        let corners = out_support.corners();
        let mut active = Vec::new();
        for index in 0..grid.len() {
            let theta = grid.momentum(index);
            let c = symbol.momentum_weight(&theta);
            if c == 0.0 {
                continue;
            }
            let det = map.grad_p(&theta).determinant();
            if !(det > 0.0) {
                return Err(Error::SingularJacobian { det });
            }
            let p = map.p(&theta);
            if !grid.contains_momentum(&p) {
                return Err(Error::SupportLeak(format!(
                    "image momentum p({theta:?}) = {p:?} leaves the momentum window (-{limit}, {limit})"
                )));
            }
            for corner in &corners {
                let x = pullback_position(map.as_ref(), &theta, corner);
                if !grid.contains_position(&x) {
                    return Err(Error::SupportLeak(format!(
                        "output corner {corner:?} pulls back to {x:?} at momentum {theta:?}, outside the position box"
                    )));
                }
            }
            let phase = map.alpha(&theta) / grid.hbar();
            let weight = Complex64::from_polar(det.sqrt() * c, phase) * symbol.gain();
            active.push(ActiveMomentum {
                index,
                theta,
                p,
                weight,
            });
        }

        let input_weights = symbol
            .input_cutoff()
            .map(|_| (0..grid.len()).map(|i| symbol.input_weight(&grid.position(i))).collect());
        let output_weights = (0..grid.len())
            .map(|i| symbol.output_weight(&grid.position(i)))
            .collect();
        Ok(Self {
            map,
            symbol,
            grid,
            active,
            input_weights,
            output_weights,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn symbol(&self) -> &SymbolSpec {
        &self.symbol
    }

    pub fn map(&self) -> &dyn MomentumMap {
        self.map.as_ref()
    }

    /// Number of momentum lattice points inside the momentum cutoff.
    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    /// Active lattice momenta in storage order.
    pub fn active_momenta(&self) -> impl Iterator<Item = &Vector> {
        self.active.iter().map(|a| &a.theta)
    }

    fn check_input(&self, f: &Wavefunction, representation: Representation) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        f.expect(representation)
    }

    /// `P̂ f`.
    pub fn apply(&self, f: &Wavefunction) -> Result<Wavefunction> {
        self.check_input(f, Representation::Position)?;
        let mut g = f.clone();
        if let Some(u) = &self.input_weights {
            g.multiply_real(u);
        }
        let spectrum = hbar_fourier(&g)?;
        let norm = self.transform_scale() * self.grid.momentum_cell();
        let coefs: Vec<Complex64> = self
            .active
            .iter()
            .map(|a| a.weight * spectrum.values()[a.index] * norm)
            .collect();
        let mut out = self.synthesize(&coefs);
        out.iter_mut()
            .zip(&self.output_weights)
            .for_each(|(v, w)| *v *= *w);
        Wavefunction::new(self.grid, out, Representation::Position)
    }

    /// `P̂* g`.
    pub fn adjoint_apply(&self, g: &Wavefunction) -> Result<Wavefunction> {
        self.check_input(g, Representation::Position)?;
        let weighted: Vec<Complex64> = g
            .values()
            .iter()
            .zip(&self.output_weights)
            .map(|(v, w)| v * *w)
            .collect();
        let sums = self.analyze(&weighted);
        let scale = self.transform_scale() * self.grid.position_cell();
        let mut spectrum = Wavefunction::zeros(self.grid, Representation::Momentum);
        for (a, s) in self.active.iter().zip(sums) {
            spectrum.values_mut()[a.index] = a.weight.conj() * s * scale;
        }
        let mut out = hbar_inverse_fourier(&spectrum)?;
        if let Some(u) = &self.input_weights {
            out.multiply_real(u);
        }
        Ok(out)
    }

    /// The matrix of [`apply`](Self::apply) on the lattice basis. Entries act
    /// on raw samples and equal the matrix in quadrature-orthonormal
    /// coordinates, so its spectral norm is the `L²` operator norm.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.size_guard()?;
        let kernel = self.momentum_kernel()?;
        let analysis = self.analysis_matrix();
        Ok(kernel.matmul(&analysis)?.with_description("fio"))
    }

    /// The `N^d × A` kernel from orthonormal coordinates on the active momenta
    /// to orthonormal position coordinates: `to_dense = kernel · analysis`,
    /// where `analysis` is the unitary Fourier matrix restricted to the
    /// active rows and multiplied by `u`.
    pub fn momentum_kernel(&self) -> Result<DenseOperator> {
        self.size_guard()?;
        let (rows, cols) = (self.grid.len(), self.active.len());
        let scale = (self.grid.len() as f64).powf(-0.5);
        let mut k = DenseOperator::zeros(rows, cols);
        let mut tables = self.empty_tables();
        for (j, a) in self.active.iter().enumerate() {
            self.fill_tables(&a.p, 1.0, &mut tables);
            let mut column = vec![Complex64::new(0.0, 0.0); rows];
            accumulate_tensor(&mut column, &tables, self.grid.dim(), a.weight * scale);
            for (i, v) in column.iter().enumerate() {
                k[(i, j)] = *v * self.output_weights[i];
            }
        }
        Ok(k.with_description("fio kernel"))
    }

    /// An `A × A` matrix with the same singular values as
    /// [`to_dense`](Self::to_dense), from the `R` factors of the kernel and of
    /// the adjoint analysis factor.
    pub fn compressed(&self) -> Result<DenseOperator> {
        let k = self.momentum_kernel()?.qr_r_factor();
        let f = self.analysis()?.adjoint().qr_r_factor();
        Ok(k.matmul(&f.adjoint())?.with_description("fio compressed"))
    }

    /// The `A × N^d` analysis factor of [`to_dense`](Self::to_dense).
    pub fn analysis(&self) -> Result<DenseOperator> {
        self.size_guard()?;
        Ok(self.analysis_matrix().with_description("fio analysis"))
    }

    fn analysis_matrix(&self) -> DenseOperator {
        let (rows, cols) = (self.active.len(), self.grid.len());
        let scale = (self.grid.len() as f64).powf(-0.5);
        let mut m = DenseOperator::zeros(rows, cols);
        let mut tables = self.empty_tables();
        for (i, a) in self.active.iter().enumerate() {
            self.fill_tables(&a.theta, -1.0, &mut tables);
            let mut row = vec![Complex64::new(0.0, 0.0); cols];
            accumulate_tensor(&mut row, &tables, self.grid.dim(), Complex64::new(scale, 0.0));
            for (j, v) in row.iter().enumerate() {
                let u = self.input_weights.as_ref().map_or(1.0, |u| u[j]);
                m[(i, j)] = *v * u;
            }
        }
        m
    }

    fn size_guard(&self) -> Result<()> {
        if self.grid.len() > DENSE_LIMIT {
            return Err(Error::SizeGuard {
                size: self.grid.len(),
                limit: DENSE_LIMIT,
            });
        }
        Ok(())
    }

    fn transform_scale(&self) -> f64 {
        (2.0 * PI * self.grid.hbar()).powf(-(self.grid.dim() as f64) / 2.0)
    }

    fn empty_tables(&self) -> Vec<Vec<Complex64>> {
        vec![vec![Complex64::new(0.0, 0.0); self.grid.points_per_axis()]; self.grid.dim()]
    }

    /// `tables[a][j] = e^{i·sign·k_a·x_j/ℏ}` on the position lattice.
    fn fill_tables(&self, k: &Vector, sign: f64, tables: &mut [Vec<Complex64>]) {
        let x0 = -self.grid.half_width();
        let dx = self.grid.dx();
        let hbar = self.grid.hbar();
        for (a, table) in tables.iter_mut().enumerate() {
            let freq = sign * k[a] / hbar;
            let step = Complex64::from_polar(1.0, freq * dx);
            let mut current = Complex64::new(1.0, 0.0);
            for (j, slot) in table.iter_mut().enumerate() {
                if j % ANCHOR == 0 {
                    current = Complex64::from_polar(1.0, freq * (x0 + j as f64 * dx));
                }
                *slot = current;
                current *= step;
            }
        }
    }

    /// `Σ_θ c_θ e^{i⟨p(θ),x'⟩/ℏ}` on the position lattice.
    fn synthesize(&self, coefs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut tables = self.empty_tables();
        for (a, c) in self.active.iter().zip(coefs) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            self.fill_tables(&a.p, 1.0, &mut tables);
            accumulate_tensor(&mut out, &tables, self.grid.dim(), *c);
        }
        out
    }

    /// `Σ_{x'} e^{-i⟨p(θ),x'⟩/ℏ} h(x')` for every active θ.
    fn analyze(&self, h: &[Complex64]) -> Vec<Complex64> {
        let mut tables = self.empty_tables();
        self.active
            .iter()
            .map(|a| {
                self.fill_tables(&a.p, -1.0, &mut tables);
                contract_tensor(h, &tables, self.grid.dim())
            })
            .collect()
    }
}

impl core::fmt::Debug for FioOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FioOperator")
            .field("grid", &self.grid)
            .field("symbol", &self.symbol)
            .field("active", &self.active.len())
            .finish()
    }
}

/// `out[i_0, …] += c · Π_a tables[a][i_a]`.
fn accumulate_tensor(out: &mut [Complex64], tables: &[Vec<Complex64>], d: usize, c: Complex64) {
    match d {
        1 => out.iter_mut().zip(&tables[0]).for_each(|(o, t)| *o += c * t),
        2 => {
            let n = tables[1].len();
            for (row, t0) in out.chunks_mut(n).zip(&tables[0]) {
                let s = c * t0;
                row.iter_mut().zip(&tables[1]).for_each(|(o, t)| *o += s * t);
            }
        }
        _ => {
            debug_assert!(d <= MAX_DIM);
            let n = tables[0].len();
            for (block, t0) in out.chunks_mut(n * n).zip(&tables[0]) {
                accumulate_tensor(block, &tables[1..], 2, c * t0);
            }
        }
    }
}

/// `Σ_{i_0, …} h[i_0, …] · Π_a tables[a][i_a]`.
fn contract_tensor(h: &[Complex64], tables: &[Vec<Complex64>], d: usize) -> Complex64 {
    match d {
        1 => h.iter().zip(&tables[0]).map(|(a, b)| a * b).sum(),
        _ => {
            let n = tables[0].len();
            let inner = h.len() / n;
            h.chunks(inner)
                .zip(&tables[0])
                .map(|(block, t0)| contract_tensor(block, &tables[1..], d - 1) * t0)
                .sum()
        }
    }
}

impl LinearOperator for FioOperator {
    fn input_len(&self) -> usize {
        self.grid.len()
    }
    fn output_len(&self) -> usize {
        self.grid.len()
    }
    fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = Wavefunction::new(self.grid, v.to_vec(), Representation::Position)?;
        Ok(self.apply(&f)?.into_values())
    }
    fn apply_adjoint_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = Wavefunction::new(self.grid, v.to_vec(), Representation::Position)?;
        Ok(self.adjoint_apply(&g)?.into_values())
    }
}

/// The product `P̂_n ∘ … ∘ P̂_1` on one grid.
#[derive(Clone, Debug)]
pub struct FioChain {
    operators: Vec<Arc<FioOperator>>,
}

impl FioChain {
    pub fn new(operators: Vec<Arc<FioOperator>>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or(Error::ChainTooShort { len: 0, requested: 1 })?;
        if operators.iter().any(|op| op.grid != first.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { operators })
    }

    /// Quantizes the first `n` maps of `chain` with the matching symbols.
    /// Consecutive steps with the same map and symbol share one operator.
    pub fn build(chain: &ChainSpec, symbols: &[SymbolSpec], grid: GridSpec, n: usize) -> Result<Self> {
        if n == 0 || n > chain.len() {
            return Err(Error::ChainTooShort {
                len: chain.len(),
                requested: n,
            });
        }
        let mut operators: Vec<Arc<FioOperator>> = Vec::with_capacity(n);
        for j in 0..n {
            let map = chain.map_arc(j);
            let symbol = *symbol_for(symbols, j)?;
            let reuse = operators.iter().find(|op| {
                Arc::ptr_eq(&op.map, &map) && op.symbol == symbol
            });
            let op = match reuse {
                Some(op) => Arc::clone(op),
                None => Arc::new(FioOperator::new(map, symbol, grid)?),
            };
            operators.push(op);
        }
        Self::new(operators)
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.operators[0].grid
    }

    pub fn operators(&self) -> &[Arc<FioOperator>] {
        &self.operators
    }

    /// `P̂_n ∘ … ∘ P̂_1 f`.
    pub fn chain_apply(&self, f: &Wavefunction) -> Result<Wavefunction> {
        let mut g = self.operators[0].apply(f)?;
        for op in &self.operators[1..] {
            g = op.apply(&g)?;
        }
        Ok(g)
    }

    /// `P̂_1* ∘ … ∘ P̂_n* g`.
    pub fn chain_adjoint_apply(&self, g: &Wavefunction) -> Result<Wavefunction> {
        let mut f = g.clone();
        for op in self.operators.iter().rev() {
            f = op.adjoint_apply(&f)?;
        }
        Ok(f)
    }

    /// Dense matrix of the whole product.
    pub fn to_dense(&self) -> Result<DenseOperator> {
        let mut cache: Vec<(&Arc<FioOperator>, DenseOperator)> = Vec::new();
        let mut product: Option<DenseOperator> = None;
        for op in &self.operators {
            let m = match cache.iter().find(|(o, _)| Arc::ptr_eq(o, op)) {
                Some((_, m)) => m.clone(),
                None => {
                    let m = op.to_dense()?;
                    cache.push((op, m.clone()));
                    m
                }
            };
            product = Some(match product {
                None => m,
                Some(p) => m.matmul(&p)?,
            });
        }
        Ok(product
            .expect("chain is non-empty")
            .with_description(format!("chain of {}", self.len())))
    }
}

/// Triangular factors of one distinct operator, kept while compressing a
/// chain.
struct Factors<'a> {
    op: &'a Arc<FioOperator>,
    kernel: DenseOperator,
    analysis: DenseOperator,
    kernel_r: Option<DenseOperator>,
}

impl FioChain {
    /// Spectral norms of the prefixes `P̂_k ∘ … ∘ P̂_1` for each `k` in `ns`
    /// (increasing, each in `1..=len`), exact up to rounding.
    ///
    /// Every step factors as `K_j F_j` with `K_j` of size `N^d × A_j`, so a
    /// prefix equals `K_k (F_k K_{k-1}) ⋯ (F_2 K_1) F_1`. Replacing `K_k` and
    /// `F_1*` by the `R` factors of their thin QR decompositions drops unitary
    /// factors, leaving a matrix of size `A_k × A_1`.
    pub fn prefix_norms(&self, ns: &[usize]) -> Result<Vec<f64>> {
        if ns.windows(2).any(|w| w[0] >= w[1]) || ns.first() == Some(&0) || ns.last().is_some_and(|&n| n > self.len()) {
            return Err(Error::InvalidParameter(format!(
                "prefix lengths {ns:?} must increase within 1..={}",
                self.len()
            )));
        }
        let mut factors: Vec<Factors<'_>> = Vec::new();
        let mut index_of = Vec::with_capacity(self.len());
        for op in &self.operators {
            let found = factors.iter().position(|f| Arc::ptr_eq(f.op, op));
            let i = match found {
                Some(i) => i,
                None => {
                    factors.push(Factors {
                        op,
                        kernel: op.momentum_kernel()?,
                        analysis: op.analysis()?,
                        kernel_r: None,
                    });
                    factors.len() - 1
                }
            };
            index_of.push(i);
        }
        let mut out = Vec::with_capacity(ns.len());
        let mut wanted = ns.iter().peekable();
        // S = (F_k K_{k-1}) ⋯ (F_2 K_1) R(F_1*)^*
        let mut s = factors[index_of[0]].analysis.adjoint().qr_r_factor().adjoint();
        let mut transfers: Vec<((usize, usize), DenseOperator)> = Vec::new();
        for k in 1..=self.len() {
            if k > 1 {
                let key = (index_of[k - 1], index_of[k - 2]);
                let t = match transfers.iter().find(|(kk, _)| *kk == key) {
                    Some((_, t)) => t,
                    None => {
                        let t = factors[key.0].analysis.matmul(&factors[key.1].kernel)?;
                        transfers.push((key, t));
                        &transfers.last().expect("just pushed").1
                    }
                };
                s = t.matmul(&s)?;
            }
            if wanted.peek() == Some(&&k) {
                wanted.next();
                let f = &mut factors[index_of[k - 1]];
                let r = f.kernel_r.get_or_insert_with(|| f.kernel.qr_r_factor());
                out.push(r.matmul(&s)?.spectral_norm());
                if wanted.peek().is_none() {
                    break;
                }
            }
        }
        Ok(out)
    }
}

impl LinearOperator for FioChain {
    fn input_len(&self) -> usize {
        self.grid().len()
    }
    fn output_len(&self) -> usize {
        self.grid().len()
    }
    fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = Wavefunction::new(*self.grid(), v.to_vec(), Representation::Position)?;
        Ok(self.chain_apply(&f)?.into_values())
    }
    fn apply_adjoint_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let g = Wavefunction::new(*self.grid(), v.to_vec(), Representation::Position)?;
        Ok(self.chain_adjoint_apply(&g)?.into_values())
    }
}
