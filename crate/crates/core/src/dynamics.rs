//! Classical data: momentum maps `ξ ↦ p(ξ)` with phases `α(ξ)`, their
//! canonical transformations `(x, ξ) ↦ (x', p(ξ))`, and quantities
//! accumulated along orbits.

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{SmallMatrix, Vector};
use crate::{Error, Result};

/// Invariant splitting `ξ = (ξ_(r), ξ̃)` with `p(ξ) = (m(ξ), p̃(ξ̃))`.
///
/// The first `r` coordinates form `ξ_(r)`, the remaining `d - r` form `ξ̃`.
pub trait CoisotropicBlock: Send + Sync {
    fn rank(&self) -> usize;
    /// The first `r` components of `p`.
    fn m(&self, xi: &Vector) -> Vector;
    fn tilde_p(&self, xi_tilde: &Vector) -> Vector;
    fn grad_tilde_p(&self, xi_tilde: &Vector) -> SmallMatrix;
}

/// One canonical transformation preserving the foliation `{ξ = const}`,
/// with generating function `⟨p(θ), x'⟩ - ⟨θ, x⟩ + α(θ)`.
pub trait MomentumMap: Send + Sync {
    fn dim(&self) -> usize;
    fn p(&self, xi: &Vector) -> Vector;
    /// Analytic Jacobian `∂p_i/∂ξ_j`.
    fn grad_p(&self, xi: &Vector) -> SmallMatrix;
    fn alpha(&self, xi: &Vector) -> f64;
    fn grad_alpha(&self, xi: &Vector) -> Vector;
    fn block(&self) -> Option<&dyn CoisotropicBlock> {
        None
    }
}

/// Scalar phase `α(ξ) = offset + ⟨ξ, Cξ⟩/2` with `C` diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticPhase {
    pub offset: f64,
    pub curvature: Vector,
}

impl QuadraticPhase {
    pub fn zero(dim: usize) -> Self {
        Self {
            offset: 0.0,
            curvature: Vector::zeros(dim),
        }
    }

    pub fn isotropic(dim: usize, c: f64) -> Self {
        Self {
            offset: 0.0,
            curvature: Vector::filled(dim, c),
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn value(&self, xi: &Vector) -> f64 {
        self.offset
            + 0.5
                * xi
                    .iter()
                    .zip(self.curvature.iter())
                    .map(|(x, c)| c * x * x)
                    .sum::<f64>()
    }

    pub fn gradient(&self, xi: &Vector) -> Vector {
        let mut g = *xi;
        g.iter_mut()
            .zip(self.curvature.iter())
            .for_each(|(x, c)| *x *= c);
        g
    }
}

/// `p(ξ) = Mξ` with a constant matrix and a quadratic phase.
///
/// A block rank `r` may be declared when the last `d - r` rows of `M` vanish
/// in their first `r` columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: SmallMatrix,
    phase: QuadraticPhase,
    block_rank: Option<usize>,
}

impl LinearMap {
    pub fn new(matrix: SmallMatrix, phase: QuadraticPhase) -> Result<Self> {
        if phase.curvature.dim() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.dim(),
                found: phase.curvature.dim(),
            });
        }
        let det = matrix.determinant();
        if !(det > 0.0) {
            return Err(Error::SingularJacobian { det });
        }
        Ok(Self {
            matrix,
            phase,
            block_rank: None,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: SmallMatrix::identity(dim),
            phase: QuadraticPhase::zero(dim),
            block_rank: None,
        }
    }

    pub fn diagonal(diag: &[f64], phase: QuadraticPhase) -> Result<Self> {
        Self::new(SmallMatrix::diagonal(diag), phase)
    }

    /// Declares the coisotropic split with `r` leading coordinates.
    pub fn with_block_rank(mut self, r: usize) -> Result<Self> {
        let d = self.matrix.dim();
        if r > d {
            return Err(Error::InvalidParameter(alloc::format!("block rank {r} exceeds dimension {d}")));
        }
        for i in r..d {
            for j in 0..r {
                if self.matrix[(i, j)] != 0.0 {
                    return Err(Error::MissingBlockStructure);
                }
            }
        }
        self.block_rank = Some(r);
        Ok(self)
    }

    pub fn matrix(&self) -> &SmallMatrix {
        &self.matrix
    }

    pub fn phase(&self) -> &QuadraticPhase {
        &self.phase
    }
}

impl MomentumMap for LinearMap {
    fn dim(&self) -> usize {
        self.matrix.dim()
    }
    fn p(&self, xi: &Vector) -> Vector {
        self.matrix.mul_vec(xi)
    }
    fn grad_p(&self, _xi: &Vector) -> SmallMatrix {
        self.matrix
    }
    fn alpha(&self, xi: &Vector) -> f64 {
        self.phase.value(xi)
    }
    fn grad_alpha(&self, xi: &Vector) -> Vector {
        self.phase.gradient(xi)
    }
    fn block(&self) -> Option<&dyn CoisotropicBlock> {
        self.block_rank.map(|_| self as &dyn CoisotropicBlock)
    }
}

impl CoisotropicBlock for LinearMap {
    fn rank(&self) -> usize {
        self.block_rank.unwrap_or(0)
    }
    fn m(&self, xi: &Vector) -> Vector {
        self.p(xi).slice(0, self.rank())
    }
    fn tilde_p(&self, xi_tilde: &Vector) -> Vector {
        let r = self.rank();
        self.matrix.block(r, self.dim()).mul_vec(xi_tilde)
    }
    fn grad_tilde_p(&self, _xi_tilde: &Vector) -> SmallMatrix {
        self.matrix.block(self.rank(), self.dim())
    }
}

/// The two-dimensional surface model `p(X, ε) = (e^{-τ√(2ε)} X, ε)`.
///
/// `ε` plays the role of energy and is left invariant, so the split has
/// `r = 1` with `p̃ = id`. Requires `ε > 0` wherever it is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceMap {
    tau: f64,
    phase: QuadraticPhase,
}

impl SurfaceMap {
    pub fn new(tau: f64, phase: QuadraticPhase) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("rate τ = {tau} must be ≥ 0")));
        }
        if phase.curvature.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: phase.curvature.dim(),
            });
        }
        Ok(Self { tau, phase })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `a(ε) = √(2ε)`, the speed on the energy shell.
    pub fn speed(energy: f64) -> f64 {
        (2.0 * energy.max(0.0)).sqrt()
    }

    fn contraction(&self, energy: f64) -> f64 {
        (-self.tau * Self::speed(energy)).exp()
    }
}

impl MomentumMap for SurfaceMap {
    fn dim(&self) -> usize {
        2
    }
    fn p(&self, xi: &Vector) -> Vector {
        Vector::from_slice(&[self.contraction(xi[1]) * xi[0], xi[1]])
    }
    fn grad_p(&self, xi: &Vector) -> SmallMatrix {
        let e = self.contraction(xi[1]);
        let a = Self::speed(xi[1]);
        // d/dε e^{-τa(ε)} = -τ e^{-τa}/a
        let cross = if a > 0.0 { -self.tau * e * xi[0] / a } else { 0.0 };
        SmallMatrix::from_rows(&[&[e, cross], &[0.0, 1.0]])
    }
    fn alpha(&self, xi: &Vector) -> f64 {
        self.phase.value(xi)
    }
    fn grad_alpha(&self, xi: &Vector) -> Vector {
        self.phase.gradient(xi)
    }
    fn block(&self) -> Option<&dyn CoisotropicBlock> {
        Some(self)
    }
}

impl CoisotropicBlock for SurfaceMap {
    fn rank(&self) -> usize {
        1
    }
    fn m(&self, xi: &Vector) -> Vector {
        Vector::from_slice(&[self.contraction(xi[1]) * xi[0]])
    }
    fn tilde_p(&self, xi_tilde: &Vector) -> Vector {
        *xi_tilde
    }
    fn grad_tilde_p(&self, _xi_tilde: &Vector) -> SmallMatrix {
        SmallMatrix::identity(1)
    }
}

/// An ordered list of maps `κ_1, …, κ_n` sharing one dimension.
#[derive(Clone)]
pub struct ChainSpec {
    maps: Vec<Arc<dyn MomentumMap>>,
}

impl ChainSpec {
    pub fn new(maps: Vec<Arc<dyn MomentumMap>>) -> Result<Self> {
        let first = maps.first().ok_or(Error::ChainTooShort { len: 0, requested: 1 })?;
        let d = first.dim();
        for m in &maps {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
        }
        Ok(Self { maps })
    }

    /// The same map repeated `n ≥ 1` times.
    pub fn repeat(map: Arc<dyn MomentumMap>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ChainTooShort { len: 0, requested: 1 });
        }
        Ok(Self {
            maps: (0..n).map(|_| Arc::clone(&map)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    /// Map `κ_{j+1}` (zero-based).
    pub fn map(&self, j: usize) -> &dyn MomentumMap {
        self.maps[j].as_ref()
    }

    pub fn map_arc(&self, j: usize) -> Arc<dyn MomentumMap> {
        Arc::clone(&self.maps[j])
    }

    /// `self` followed by `tail`.
    pub fn concat(&self, tail: &Self) -> Result<Self> {
        let mut maps = self.maps.clone();
        maps.extend(tail.maps.iter().cloned());
        Self::new(maps)
    }

    /// Maps `κ_{from+1}, …, κ_len`.
    pub fn tail(&self, from: usize) -> Result<Self> {
        Self::new(self.maps[from.min(self.len())..].to_vec())
    }

    /// The first `n` maps.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        self.check_len(n)?;
        Self::new(self.maps[..n].to_vec())
    }

    /// The common block rank, if every map carries a split with the same rank.
    pub fn block_rank(&self) -> Option<usize> {
        let r = self.maps[0].block()?.rank();
        self.maps
            .iter()
            .all(|m| m.block().map(|b| b.rank()) == Some(r))
            .then_some(r)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::ChainTooShort {
                len: self.len(),
                requested: n,
            });
        }
        Ok(())
    }
}

impl core::fmt::Debug for ChainSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ChainSpec")
            .field("len", &self.len())
            .field("dim", &self.dim())
            .finish()
    }
}

/// A classical orbit `(x_j, ξ_j)` and the quantities accumulated along it.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub xi_list: Vec<Vector>,
    pub x_list: Vec<Vector>,
    /// `A_0 = 0, A_1, …, A_n`.
    pub a_partial: Vec<f64>,
    /// `∇p_j(ξ_{j-1})` for `j = 1..=n`.
    pub jac_list: Vec<SmallMatrix>,
    pub det_chain: f64,
}

/// `[ξ_0, ξ_1 = p_1(ξ_0), …, ξ_n]`.
pub fn evolve_momentum(chain: &ChainSpec, xi0: &Vector, n: usize) -> Result<Vec<Vector>> {
    chain.check_len(n)?;
    check_dim(chain.dim(), xi0)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(*xi0);
    for j in 0..n {
        let next = chain.map(j).p(&out[j]);
        out.push(next);
    }
    Ok(out)
}

/// `A_n(ξ_0) = α_1(ξ_0) + α_2(ξ_1) + … + α_n(ξ_{n-1})`.
pub fn phase_cocycle(chain: &ChainSpec, xi0: &Vector, n: usize) -> Result<f64> {
    let orbit = evolve_momentum(chain, xi0, n)?;
    Ok((0..n).map(|j| chain.map(j).alpha(&orbit[j])).sum())
}

/// The Jacobian `∇p_n(ξ_{n-1})···∇p_1(ξ_0)` and the product of per-step
/// determinants.
pub fn jacobian_chain(chain: &ChainSpec, xi0: &Vector, n: usize) -> Result<(SmallMatrix, f64)> {
    let orbit = evolve_momentum(chain, xi0, n)?;
    let mut m = SmallMatrix::identity(chain.dim());
    let mut det = 1.0;
    for j in 0..n {
        let step = chain.map(j).grad_p(&orbit[j]);
        let step_det = step.determinant();
        if !(step_det > 0.0) {
            return Err(Error::SingularJacobian { det: step_det });
        }
        m = step * m;
        det *= step_det;
    }
    Ok((m, det))
}

/// Product of per-step determinants of `∇p̃` along the `ξ̃` orbit.
pub fn tilde_det_chain(chain: &ChainSpec, xi_tilde0: &Vector, n: usize) -> Result<f64> {
    chain.check_len(n)?;
    let mut xi = *xi_tilde0;
    let mut det = 1.0;
    for j in 0..n {
        let block = chain.map(j).block().ok_or(Error::MissingBlockStructure)?;
        let step_det = block.grad_tilde_p(&xi).determinant();
        if !(step_det > 0.0) {
            return Err(Error::SingularJacobian { det: step_det });
        }
        det *= step_det;
        xi = block.tilde_p(&xi);
    }
    Ok(det)
}

/// The position `x = ∇p(ξ)ᵀx' + ∇α(ξ)` that `κ` sends to `x'` at momentum `ξ`.
pub fn pullback_position(map: &dyn MomentumMap, xi: &Vector, x_prime: &Vector) -> Vector {
    map.grad_p(xi).transpose().mul_vec(x_prime) + map.grad_alpha(xi)
}

/// `κ(x, ξ) = ((∇p(ξ)ᵀ)^{-1}(x - ∇α(ξ)), p(ξ))`.
pub fn apply_canonical(map: &dyn MomentumMap, x: &Vector, xi: &Vector) -> Result<(Vector, Vector)> {
    check_dim(map.dim(), x)?;
    check_dim(map.dim(), xi)?;
    let jac = map.grad_p(xi);
    let det = jac.determinant();
    if !(det > 0.0) {
        return Err(Error::SingularJacobian { det });
    }
    let x_prime = jac.transpose().solve(&(*x - map.grad_alpha(xi)))?;
    Ok((x_prime, map.p(xi)))
}

/// Iterates [`apply_canonical`] `n` times from `(x_0, ξ_0)`.
pub fn classical_trajectory(chain: &ChainSpec, x0: &Vector, xi0: &Vector, n: usize) -> Result<Trajectory> {
    chain.check_len(n)?;
    let mut xi_list = Vec::with_capacity(n + 1);
    let mut x_list = Vec::with_capacity(n + 1);
    let mut a_partial = Vec::with_capacity(n + 1);
    let mut jac_list = Vec::with_capacity(n);
    xi_list.push(*xi0);
    x_list.push(*x0);
    a_partial.push(0.0);
    let mut det_chain = 1.0;
    for j in 0..n {
        let map = chain.map(j);
        let (xi, x) = (xi_list[j], x_list[j]);
        let jac = map.grad_p(&xi);
        let (x_next, xi_next) = apply_canonical(map, &x, &xi)?;
        det_chain *= jac.determinant();
        a_partial.push(a_partial[j] + map.alpha(&xi));
        jac_list.push(jac);
        x_list.push(x_next);
        xi_list.push(xi_next);
    }
    Ok(Trajectory {
        xi_list,
        x_list,
        a_partial,
        jac_list,
        det_chain,
    })
}

fn check_dim(d: usize, v: &Vector) -> Result<()> {
    if v.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: v.dim(),
        });
    }
    Ok(())
}
