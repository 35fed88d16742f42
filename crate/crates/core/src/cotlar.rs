//! Almost-orthogonal decomposition of the leading-order chain operator into
//! momentum blocks, and the Cotlar–Stein bound for operator families.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_momentum, jacobian_chain, phase_cocycle, ChainSpec};
use crate::fio::DENSE_LIMIT;
use crate::grid::GridSpec;
use crate::linalg::{DenseOperator, Vector};
use crate::symbols::{leading_symbol_product_on_orbit, smoothstep, symbol_for, SymbolSpec};
use crate::{Error, Result};

/// `χ₁(t) = s(t+1) - s(t)`: supported in `[-1, 1]`, and its integer
/// translates sum to one by telescoping.
pub fn chi1(t: f64) -> f64 {
    smoothstep(t + 1.0) - smoothstep(t)
}

/// The family `χ_{ℏ,ℓ}(ξ̃) = Π_a χ₁(ξ̃_a/(2πℏ) - ℓ_a)`, `ℓ ∈ ℤ^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionOfUnity {
    dims: usize,
    hbar: f64,
}

impl PartitionOfUnity {
    pub fn new(dims: usize, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("hbar {hbar} must be positive")));
        }
        Ok(Self { dims, hbar })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn scale(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    pub fn weight(&self, index: &[i64], xi_tilde: &Vector) -> f64 {
        debug_assert_eq!(index.len(), self.dims);
        index
            .iter()
            .enumerate()
            .map(|(a, &l)| chi1(xi_tilde[a] / self.scale() - l as f64))
            .product()
    }

    /// Every index whose bump can be nonzero somewhere on `points`, in
    /// lexicographic order. With `dims = 0` this is the single empty index.
    pub fn indices_covering(&self, points: &[Vector]) -> Vec<Vec<i64>> {
        let mut ranges = Vec::with_capacity(self.dims);
        for a in 0..self.dims {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for p in points {
                lo = lo.min(p[a]);
                hi = hi.max(p[a]);
            }
            if !lo.is_finite() {
                return Vec::new();
            }
            ranges.push(((lo / self.scale()).floor() as i64 - 1, (hi / self.scale()).ceil() as i64 + 1));
        }
        let mut out = vec![Vec::new()];
        for (lo, hi) in ranges {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (lo..=hi).map(move |l| {
                        let mut v = prefix.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

/// The leading-order chain operator as a kernel from the active momentum
/// lattice to positions, in orthonormal coordinates on both sides:
///
/// `K(x, θ) = N^{-d/2} (det ∇p^{(n)}(θ))^{1/2} b₀^{(n)}(x, θ) e^{i(⟨p^{(n)}(θ), x⟩ + A_n(θ))/ℏ}`.
///
/// Composing with the unitary Fourier matrix restricted to the active rows
/// gives the position-space operator, with the same norms for all products
/// used here.
#[derive(Clone, Debug)]
pub struct WkbKernel {
    pub kernel: DenseOperator,
    /// Active lattice momenta θ (columns of the kernel).
    pub thetas: Vec<Vector>,
    /// `ξ̃`-part of `p^{(n)}(θ)` for each column.
    pub xi_tilde_n: Vec<Vector>,
    /// Block rank `r`.
    pub rank: usize,
    pub grid: GridSpec,
}

/// Builds the leading-order kernel of an `n`-step block-structured chain.
pub fn wkb_kernel(chain: &ChainSpec, symbols: &[SymbolSpec], grid: GridSpec, n: usize) -> Result<WkbKernel> {
    let rank = chain.block_rank().ok_or(Error::MissingBlockStructure)?;
    if grid.len() > DENSE_LIMIT {
        return Err(Error::SizeGuard {
            size: grid.len(),
            limit: DENSE_LIMIT,
        });
    }
    if n == 0 || n > chain.len() {
        return Err(Error::ChainTooShort {
            len: chain.len(),
            requested: n,
        });
    }
    let first = symbol_for(symbols, 0)?;
    let d = grid.dim();
    let hbar = grid.hbar();
    let scale = (grid.len() as f64).powf(-0.5);
    let positions: Vec<Vector> = (0..grid.len()).map(|i| grid.position(i)).collect();
    let mut columns = Vec::new();
    let mut thetas = Vec::new();
    let mut xi_tilde_n = Vec::new();
    for k in 0..grid.len() {
        let theta = grid.momentum(k);
        if first.momentum_weight(&theta) == 0.0 {
            continue;
        }
        let orbit = evolve_momentum(chain, &theta, n)?;
        let (_, det) = jacobian_chain(chain, &theta, n)?;
        let a_n = phase_cocycle(chain, &theta, n)?;
        let pref = det.sqrt() * scale;
        let xi_n = orbit[n];
        let mut column = Vec::with_capacity(grid.len());
        for x in &positions {
            let b = leading_symbol_product_on_orbit(chain, symbols, x, &orbit)?;
            column.push(if b == Complex64::new(0.0, 0.0) {
                b
            } else {
                b * Complex64::from_polar(pref, (xi_n.dot(x) + a_n) / hbar)
            });
        }
        columns.push(column);
        thetas.push(theta);
        xi_tilde_n.push(xi_n.slice(rank, d));
    }
    let kernel = DenseOperator::from_columns(grid.len(), columns)?.with_description("leading-order kernel");
    Ok(WkbKernel {
        kernel,
        thetas,
        xi_tilde_n,
        rank,
        grid,
    })
}

/// One member `A_ℓ` of a block family.
#[derive(Clone, Debug)]
pub struct Block {
    pub index: Vec<i64>,
    pub op: DenseOperator,
    /// `false` when `χ_{ℏ,ℓ}` vanishes on every active momentum.
    pub nonzero: bool,
    /// Partition weight of each kernel column.
    pub weights: Vec<f64>,
}

/// `A_ℓ`: the kernel with `χ_{ℏ,ℓ}(ξ̃_n(θ))` inserted in the momentum sum.
pub fn block_operator(kernel: &WkbKernel, partition: &PartitionOfUnity, index: &[i64]) -> Result<Block> {
    let k = kernel.grid.dim() - kernel.rank;
    if partition.dims() != k || index.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: index.len(),
        });
    }
    let weights: Vec<f64> = kernel
        .xi_tilde_n
        .iter()
        .map(|xi| partition.weight(index, xi))
        .collect();
    let nonzero = weights.iter().any(|w| *w != 0.0);
    Ok(Block {
        index: index.to_vec(),
        op: kernel.kernel.scale_columns(&weights).with_description(alloc::format!("block {index:?}")),
        nonzero,
        weights,
    })
}

/// The nonzero blocks `A_ℓ` of a leading-order kernel and their parent `A`.
#[derive(Clone, Debug)]
pub struct BlockFamily {
    pub blocks: Vec<Block>,
    pub parent: DenseOperator,
}

impl BlockFamily {
    pub fn build(kernel: &WkbKernel) -> Result<Self> {
        let k = kernel.grid.dim() - kernel.rank;
        let partition = PartitionOfUnity::new(k, kernel.grid.hbar())?;
        let mut blocks = Vec::new();
        for index in partition.indices_covering(&kernel.xi_tilde_n) {
            let block = block_operator(kernel, &partition, &index)?;
            if block.nonzero {
                blocks.push(block);
            }
        }
        Ok(Self {
            blocks,
            parent: kernel.kernel.clone(),
        })
    }

    pub fn operators(&self) -> Vec<DenseOperator> {
        self.blocks.iter().map(|b| b.op.clone()).collect()
    }

    /// `‖Σ_ℓ A_ℓ - A‖`.
    pub fn reconstruction_error(&self) -> Result<f64> {
        let mut sum = DenseOperator::zeros(self.parent.rows(), self.parent.cols());
        for b in &self.blocks {
            sum = sum.add(&b.op)?;
        }
        Ok(sum.sub(&self.parent)?.spectral_norm())
    }

    /// Euclidean index separation `‖ℓ - m‖` of blocks `i` and `j`.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        self.blocks[i]
            .index
            .iter()
            .zip(&self.blocks[j].index)
            .map(|(a, b)| ((a - b) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Pairwise norms and the resulting Cotlar–Stein constant.
#[derive(Clone, Debug, PartialEq)]
pub struct CotlarStein {
    /// `R = max(sup_α Σ_β ‖A_α*A_β‖^{1/2}, sup_α Σ_β ‖A_αA_β*‖^{1/2})`.
    pub bound: f64,
    /// `‖A_α*A_β‖`, row-major `len × len`.
    pub star_left: Vec<f64>,
    /// `‖A_αA_β*‖`, row-major `len × len`.
    pub star_right: Vec<f64>,
    pub len: usize,
}

impl CotlarStein {
    pub fn star_left(&self, a: usize, b: usize) -> f64 {
        self.star_left[a * self.len + b]
    }

    pub fn star_right(&self, a: usize, b: usize) -> f64 {
        self.star_right[a * self.len + b]
    }
}

/// Computes all pairwise products of the family. Products over the long side
/// are reduced to the short side through thin-QR triangular factors, which
/// leaves their norms unchanged.
pub fn cotlar_stein_bound(family: &[DenseOperator]) -> Result<CotlarStein> {
    let len = family.len();
    if let Some(first) = family.first() {
        for op in family {
            if op.rows() != first.rows() || op.cols() != first.cols() {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "family members of shapes {}x{} and {}x{}",
                    first.rows(),
                    first.cols(),
                    op.rows(),
                    op.cols()
                )));
            }
        }
    }
    let tall = family.first().map_or(true, |f| f.rows() >= f.cols());
    // For tall members A = QR, so A_α A_β* has the norm of R_α R_β*. For wide
    // members A* = QR, so A_α*A_β has the norm of R_α R_β*.
    let factors: Vec<DenseOperator> = family
        .iter()
        .map(|a| if tall { a.qr_r_factor() } else { a.adjoint().qr_r_factor() })
        .collect();
    let mut star_left = vec![0.0; len * len];
    let mut star_right = vec![0.0; len * len];
    for a in 0..len {
        for b in a..len {
            let direct = if tall {
                family[a].adjoint_matmul(&family[b])?
            } else {
                family[a].matmul(&family[b].adjoint())?
            };
            let reduced = factors[a].matmul(&factors[b].adjoint())?;
            let (left, right) = if tall {
                (direct.spectral_norm(), reduced.spectral_norm())
            } else {
                (reduced.spectral_norm(), direct.spectral_norm())
            };
            for (i, j) in [(a, b), (b, a)] {
                star_left[i * len + j] = left;
                star_right[i * len + j] = right;
            }
        }
    }
    let row_sup = |m: &[f64]| {
        (0..len)
            .map(|a| (0..len).map(|b| m[a * len + b].sqrt()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    Ok(CotlarStein {
        bound: row_sup(&star_left).max(row_sup(&star_right)),
        star_left,
        star_right,
        len,
    })
}

/// Outcome of fitting `‖A_m*A_ℓ‖ ≈ C (1 + ‖m - ℓ‖)^{-N}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayExponent {
    /// Every off-diagonal product vanishes exactly.
    Infinite,
    Finite {
        exponent: f64,
        r_squared: f64,
        separations: usize,
    },
}

/// Norms below this fraction of the largest off-diagonal norm are roundoff
/// and count as exact zeros in [`offdiagonal_decay_fit`].
pub const ZERO_FLOOR: f64 = 1e-8;

/// Fits the decay exponent from `(separation, norm)` pairs. Diagonal pairs
/// and zeros (up to [`ZERO_FLOOR`]) are dropped; each separation contributes
/// its largest norm.
pub fn offdiagonal_decay_fit(pairs: &[(f64, f64)]) -> Result<DecayExponent> {
    let peak = pairs
        .iter()
        .filter(|p| p.0 > 0.0)
        .fold(0.0f64, |m, p| m.max(p.1));
    let mut by_sep: Vec<(f64, f64)> = Vec::new();
    for &(sep, norm) in pairs {
        if sep <= 0.0 || !(norm > ZERO_FLOOR * peak) {
            continue;
        }
        match by_sep.iter_mut().find(|(s, _)| (*s - sep).abs() < 1e-9) {
            Some(entry) => entry.1 = entry.1.max(norm),
            None => by_sep.push((sep, norm)),
        }
    }
    if by_sep.is_empty() {
        return Ok(DecayExponent::Infinite);
    }
    if by_sep.len() < 5 {
        return Err(Error::Degenerate(alloc::format!(
            "{} distinct nonzero separations, at least 5 required",
            by_sep.len()
        )));
    }
    let points: Vec<(f64, f64)> = by_sep.iter().map(|&(s, v)| ((1.0 + s).ln(), v.ln())).collect();
    let fit = crate::bounds::linear_fit(&points, 5)?;
    Ok(DecayExponent::Finite {
        exponent: -fit.slope,
        r_squared: fit.r_squared,
        separations: by_sep.len(),
    })
}

/// `(‖ℓ - m‖, ‖A_m*A_ℓ‖)` for every ordered pair of distinct blocks.
pub fn separation_pairs(family: &BlockFamily, cs: &CotlarStein) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for a in 0..family.blocks.len() {
        for b in 0..family.blocks.len() {
            if a != b {
                out.push((family.separation(a, b), cs.star_left(a, b)));
            }
        }
    }
    out
}
