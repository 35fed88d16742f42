//! Compactly supported product-form symbols, the one-step transfer of
//! amplitudes, and the leading amplitude of a chain.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_momentum, pullback_position, ChainSpec, MomentumMap};
use crate::grid::{Representation, Wavefunction};
use crate::linalg::{Vector, MAX_DIM};
use crate::{Error, Result};

/// Default plateau side length as a fraction of the support side length.
pub const DEFAULT_PLATEAU_FRACTION: f64 = 0.7;

/// `s(t) = g(t)/(g(t) + g(1-t))` with `g(t) = e^{-1/t}` for `t > 0`.
///
/// Smooth, 0 for `t ≤ 0`, 1 for `t ≥ 1`, and `s(t) + s(1-t) = 1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let g = |u: f64| (-1.0 / u).exp();
    let a = g(t);
    a / (a + g(1.0 - t))
}

/// A closed axis-aligned box `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox {
    pub lower: Vector,
    pub upper: Vector,
}

impl AxisBox {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::DegenerateBox(format!(
                "bounds of lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::DegenerateBox(format!("axis {axis}: [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            lower: Vector::from_slice(lower),
            upper: Vector::from_slice(upper),
        })
    }

    /// `[-h, h]^d`.
    pub fn symmetric(dim: usize, h: f64) -> Result<Self> {
        let lo = [-h; MAX_DIM];
        let hi = [h; MAX_DIM];
        Self::new(&lo[..dim], &hi[..dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn volume(&self) -> f64 {
        (self.upper - self.lower).iter().product()
    }

    pub fn contains(&self, p: &Vector) -> bool {
        (0..self.dim()).all(|a| self.lower[a] <= p[a] && p[a] <= self.upper[a])
    }

    /// Whether `other` lies in the interior of `self`.
    pub fn strictly_contains(&self, other: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lower[a] < other.lower[a] && other.upper[a] < self.upper[a])
    }

    /// Whether `self` lies inside `(-limit, limit)^d`.
    pub fn inside_symmetric(&self, limit: f64) -> bool {
        (0..self.dim()).all(|a| -limit < self.lower[a] && self.upper[a] < limit)
    }

    /// The `2^d` corners.
    pub fn corners(&self) -> Vec<Vector> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut v = self.lower;
                for a in 0..d {
                    if mask >> a & 1 == 1 {
                        v[a] = self.upper[a];
                    }
                }
                v
            })
            .collect()
    }

    /// Projection onto the coordinates `start..end`.
    pub fn project(&self, start: usize, end: usize) -> Result<Self> {
        Self::new(&self.lower[start..end], &self.upper[start..end])
    }

    /// Tensor lattice with `samples` points per axis, endpoints included.
    pub fn lattice(&self, samples: usize) -> Result<Vec<Vector>> {
        if samples < 2 {
            return Err(Error::Degenerate(format!(
                "sampling lattice needs at least 2 points per axis, got {samples}"
            )));
        }
        let d = self.dim();
        let total = samples.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut v = self.lower;
            for a in (0..d).rev() {
                let i = rest % samples;
                rest /= samples;
                let t = i as f64 / (samples - 1) as f64;
                v[a] = self.lower[a] + t * (self.upper[a] - self.lower[a]);
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// A smooth bump equal to 1 on `plateau` and 0 outside `support`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffBox {
    plateau: AxisBox,
    support: AxisBox,
}

impl CutoffBox {
    pub fn new(plateau: AxisBox, support: AxisBox) -> Result<Self> {
        if plateau.dim() != support.dim() {
            return Err(Error::DegenerateBox(format!(
                "plateau has dimension {}, support {}",
                plateau.dim(),
                support.dim()
            )));
        }
        if !support.strictly_contains(&plateau) {
            return Err(Error::DegenerateBox(format!(
                "plateau {:?}..{:?} is not strictly inside support {:?}..{:?}",
                plateau.lower, plateau.upper, support.lower, support.upper
            )));
        }
        Ok(Self { plateau, support })
    }

    /// Plateau centered in `support` with side lengths scaled by `fraction`.
    pub fn with_fraction(support: AxisBox, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::DegenerateBox(format!("plateau fraction {fraction} not in (0, 1)")));
        }
        let center = (support.lower + support.upper).scale(0.5);
        let half = (support.upper - support.lower).scale(0.5 * fraction);
        let plateau = AxisBox {
            lower: center - half,
            upper: center + half,
        };
        Self::new(plateau, support)
    }

    /// Convenience for `[lower, upper]` with the default plateau fraction.
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::with_fraction(AxisBox::new(lower, upper)?, DEFAULT_PLATEAU_FRACTION)
    }

    pub fn plateau(&self) -> &AxisBox {
        &self.plateau
    }

    pub fn support(&self) -> &AxisBox {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn eval(&self, point: &Vector) -> f64 {
        let mut value = 1.0;
        for a in 0..self.dim() {
            let t = point[a];
            let (lo, hi) = (self.support.lower[a], self.support.upper[a]);
            if t <= lo || t >= hi {
                return 0.0;
            }
            let (plo, phi) = (self.plateau.lower[a], self.plateau.upper[a]);
            value *= smoothstep((t - lo) / (plo - lo)) * smoothstep((hi - t) / (hi - phi));
        }
        value
    }
}

/// Value at `point` of the bump with the given plateau and support.
pub fn box_bump(point: &Vector, plateau: &AxisBox, support: &AxisBox) -> Result<f64> {
    Ok(CutoffBox::new(*plateau, *support)?.eval(point))
}

/// A principal symbol `a₀(x, x', θ) = u(x)·g·v₁(x')·v₂(θ)` in product form.
///
/// `u` is the optional input cutoff on `Ω`, `v₁` the output cutoff on `Ω₁`,
/// `v₂` the momentum cutoff on `Ω₂`, and `g` a constant gain with `|g| ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolSpec {
    input_cutoff: Option<CutoffBox>,
    output_cutoff: CutoffBox,
    momentum_cutoff: CutoffBox,
    gain: Complex64,
}

impl SymbolSpec {
    pub fn new(output_cutoff: CutoffBox, momentum_cutoff: CutoffBox) -> Result<Self> {
        if output_cutoff.dim() != momentum_cutoff.dim() {
            return Err(Error::DimensionMismatch {
                expected: output_cutoff.dim(),
                found: momentum_cutoff.dim(),
            });
        }
        Ok(Self {
            input_cutoff: None,
            output_cutoff,
            momentum_cutoff,
            gain: Complex64::new(1.0, 0.0),
        })
    }

    pub fn with_input_cutoff(mut self, cutoff: CutoffBox) -> Result<Self> {
        if cutoff.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: cutoff.dim(),
            });
        }
        self.input_cutoff = Some(cutoff);
        Ok(self)
    }

    /// Drops the input cutoff, making the symbol independent of `x`.
    pub fn without_input_cutoff(mut self) -> Self {
        self.input_cutoff = None;
        self
    }

    pub fn with_gain(mut self, gain: Complex64) -> Result<Self> {
        if !(gain.norm() <= 1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "symbol gain {gain} has modulus above 1"
            )));
        }
        self.gain = gain;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.output_cutoff.dim()
    }

    pub fn input_cutoff(&self) -> Option<&CutoffBox> {
        self.input_cutoff.as_ref()
    }

    pub fn output_cutoff(&self) -> &CutoffBox {
        &self.output_cutoff
    }

    pub fn momentum_cutoff(&self) -> &CutoffBox {
        &self.momentum_cutoff
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn x_independent(&self) -> bool {
        self.input_cutoff.is_none()
    }

    pub fn input_weight(&self, x: &Vector) -> f64 {
        self.input_cutoff.map_or(1.0, |c| c.eval(x))
    }

    pub fn output_weight(&self, x_prime: &Vector) -> f64 {
        self.output_cutoff.eval(x_prime)
    }

    pub fn momentum_weight(&self, theta: &Vector) -> f64 {
        self.momentum_cutoff.eval(theta)
    }

    pub fn a0(&self, x: &Vector, x_prime: &Vector, theta: &Vector) -> Complex64 {
        self.gain * (self.input_weight(x) * self.output_weight(x_prime) * self.momentum_weight(theta))
    }
}

/// Picks the symbol of step `j` (zero-based); steps beyond the end of the
/// list reuse its last entry.
pub fn symbol_for(symbols: &[SymbolSpec], j: usize) -> Result<&SymbolSpec> {
    symbols
        .get(j)
        .or_else(|| symbols.last())
        .ok_or(Error::ChainTooShort { len: 0, requested: j + 1 })
}

/// Four-point Lagrange weights for offset `t ∈ [0, 1)` from the second node.
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Separable cubic interpolation of position samples; lattice points outside
/// the box count as zero.
pub fn interpolate(f: &Wavefunction, x: &Vector) -> Complex64 {
    let grid = f.grid();
    let d = grid.dim();
    let n = grid.points_per_axis() as isize;
    let dx = grid.dx();
    let mut base = [0isize; MAX_DIM];
    let mut weights = [[0.0; 4]; MAX_DIM];
    for a in 0..d {
        let s = (x[a] + grid.half_width()) / dx;
        if !s.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        let i = s.floor();
        base[a] = i as isize - 1;
        weights[a] = cubic_weights(s - i);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let stencil = 4usize.pow(d as u32);
    'outer: for s in 0..stencil {
        let mut rest = s;
        let mut w = 1.0;
        let mut flat = 0usize;
        for a in 0..d {
            let o = rest % 4;
            rest /= 4;
            let idx = base[a] + o as isize;
            if idx < 0 || idx >= n {
                continue 'outer;
            }
            w *= weights[a][o];
            flat = flat * n as usize + idx as usize;
        }
        // flat was built with axis 0 most significant, matching row-major order
        acc += f.values()[flat] * w;
    }
    acc
}

/// `(T^ξ b)(x') = a₀(x, x', ξ)·b(x)` with `x = ∇p(ξ)ᵀx' + ∇α(ξ)`.
pub fn transfer_step(
    map: &dyn MomentumMap,
    symbol: &SymbolSpec,
    xi: &Vector,
    b: &Wavefunction,
) -> Result<Wavefunction> {
    b.expect(Representation::Position)?;
    let grid = *b.grid();
    if map.dim() != grid.dim() || symbol.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: map.dim(),
        });
    }
    Ok(Wavefunction::from_position_fn(grid, |x_prime| {
        let x = pullback_position(map, xi, x_prime);
        if !grid.contains_position(&x) {
            return Complex64::new(0.0, 0.0);
        }
        let a = symbol.a0(&x, x_prime, xi);
        if a == Complex64::new(0.0, 0.0) {
            return a;
        }
        a * interpolate(b, &x)
    }))
}

/// `b₀^{(n)}(x_n) = Π_{j=1}^n a₀^{(j)}(x_{j-1}, x_j, ξ_{j-1})` along the orbit
/// of `ξ_0`, with positions reconstructed backwards from `x_n`.
pub fn leading_symbol_product(
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    x_n: &Vector,
    xi0: &Vector,
    n: usize,
) -> Result<Complex64> {
    let orbit = evolve_momentum(chain, xi0, n)?;
    leading_symbol_product_on_orbit(chain, symbols, x_n, &orbit)
}

/// As [`leading_symbol_product`] with a precomputed momentum orbit `ξ_0..ξ_n`.
pub fn leading_symbol_product_on_orbit(
    chain: &ChainSpec,
    symbols: &[SymbolSpec],
    x_n: &Vector,
    orbit: &[Vector],
) -> Result<Complex64> {
    let n = orbit.len() - 1;
    let mut product = Complex64::new(1.0, 0.0);
    let mut x_next = *x_n;
    for j in (0..n).rev() {
        let map = chain.map(j);
        let det = map.grad_p(&orbit[j]).determinant();
        if !(det > 0.0) {
            return Err(Error::SingularJacobian { det });
        }
        let x = pullback_position(map, &orbit[j], &x_next);
        product *= symbol_for(symbols, j)?.a0(&x, &x_next, &orbit[j]);
        if product == Complex64::new(0.0, 0.0) {
            return Ok(product);
        }
        x_next = x;
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_symmetry_and_limits() {
        assert_eq!(smoothstep(-0.5), 0.0);
        assert_eq!(smoothstep(1.5), 1.0);
        assert!((smoothstep(0.5) - 0.5).abs() < 1e-15);
        for t in [0.1, 0.25, 0.9] {
            assert!((smoothstep(t) + smoothstep(1.0 - t) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bump_plateau_support_and_ramp_midpoint() {
        let support = AxisBox::new(&[-1.0, -2.0], &[1.0, 2.0]).unwrap();
        let plateau = AxisBox::new(&[-0.5, -1.0], &[0.5, 1.0]).unwrap();
        let at = |x: f64, y: f64| box_bump(&Vector::from_slice(&[x, y]), &plateau, &support).unwrap();
        assert_eq!(at(0.0, 0.0), 1.0);
        assert_eq!(at(1.5, 0.0), 0.0);
        assert!((at(0.75, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_boxes_are_rejected() {
        assert!(AxisBox::new(&[1.0], &[1.0]).is_err());
        let support = AxisBox::new(&[-1.0], &[1.0]).unwrap();
        assert!(CutoffBox::new(support, support).is_err());
        assert!(CutoffBox::with_fraction(support, 1.0).is_err());
    }

    #[test]
    fn gain_modulus_is_bounded() {
        let c = CutoffBox::from_bounds(&[-1.0], &[1.0]).unwrap();
        let s = SymbolSpec::new(c, c).unwrap();
        assert!(s.with_gain(Complex64::new(0.0, 1.0)).is_ok());
        assert!(s.with_gain(Complex64::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let w = cubic_weights(0.3);
        let nodes = [-1.0, 0.0, 1.0, 2.0];
        let f = |t: f64| 2.0 * t * t * t - t + 0.5;
        let interp: f64 = nodes.iter().zip(w).map(|(x, w)| f(*x) * w).sum();
        assert!((interp - f(0.3)).abs() < 1e-14);
    }
}
