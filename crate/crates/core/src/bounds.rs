//! Measured operator norms of chains and the dispersion bounds they are
//! compared against.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{jacobian_chain, tilde_det_chain, ChainSpec};
use crate::fio::{FioChain, FioOperator, DENSE_LIMIT};
use crate::linalg::{power_iteration, DenseOperator, LinearOperator};
use crate::symbols::AxisBox;
use crate::{Error, Result};

/// Default relative tolerance on successive Rayleigh quotients.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default iteration cap for power iteration.
pub const DEFAULT_MAX_ITER: usize = 500;
/// Default sampling lattice size per axis for sup/inf evaluation.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    /// Exact largest singular value from the dense matrix.
    DenseSvd,
    /// Matrix-free power iteration on `P*P`.
    PowerIteration,
}

/// A measured operator norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub converged: bool,
    pub iterations: usize,
}

/// Power-iteration settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

/// One row of a norm sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub scenario: String,
    pub hbar: f64,
    pub n: usize,
    pub measured_norm: f64,
    pub trivial_bound: f64,
    pub thm2_bound: f64,
    pub thm3_bound: Option<f64>,
    pub converged: bool,
    /// Filled by callers that time their runs.
    pub wall_ms: Option<f64>,
}

/// Largest singular value of a dense matrix.
pub fn dense_norm(m: &DenseOperator) -> NormEstimate {
    NormEstimate {
        value: m.spectral_norm(),
        method: NormMethod::DenseSvd,
        converged: true,
        iterations: 0,
    }
}

/// Largest singular value of any [`LinearOperator`] by power iteration.
pub fn power_norm<A: LinearOperator + ?Sized>(op: &A, settings: PowerSettings) -> Result<NormEstimate> {
    let res = power_iteration(op, settings.tol, settings.max_iter, settings.seed)?;
    Ok(NormEstimate {
        value: res.value,
        method: NormMethod::PowerIteration,
        converged: res.converged,
        iterations: res.iterations,
    })
}

/// `‖P̂_n ∘ … ∘ P̂_1‖` on the grid.
pub fn operator_norm(chain: &FioChain, method: NormMethod, settings: PowerSettings) -> Result<NormEstimate> {
    match method {
        NormMethod::DenseSvd => Ok(NormEstimate {
            value: chain.prefix_norms(&[chain.len()])?[0],
            method: NormMethod::DenseSvd,
            converged: true,
            iterations: 0,
        }),
        NormMethod::PowerIteration => power_norm(chain, settings),
    }
}

/// Norm of one operator: dense when the grid is small enough, else power
/// iteration.
pub fn single_operator_norm(op: &FioOperator, settings: PowerSettings) -> Result<NormEstimate> {
    if op.grid().len() <= DENSE_LIMIT {
        Ok(dense_norm(&op.compressed()?))
    } else {
        power_norm(op, settings)
    }
}

/// `Π_j ‖P̂_j‖`, measuring each distinct operator once.
pub fn trivial_bound(chain: &FioChain, settings: PowerSettings) -> Result<f64> {
    let mut cache: Vec<(&Arc<FioOperator>, f64)> = Vec::new();
    let mut product = 1.0;
    for op in chain.operators() {
        let norm = match cache.iter().find(|(o, _)| Arc::ptr_eq(o, op)) {
            Some((_, v)) => *v,
            None => {
                let v = single_operator_norm(op, settings)?.value;
                cache.push((op, v));
                v
            }
        };
        product *= norm;
    }
    Ok(product)
}

fn check_inputs(chain: &ChainSpec, hbar: f64, n: usize, omega2_tilde: &AxisBox) -> Result<()> {
    if !(hbar > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("hbar {hbar} must be positive")));
    }
    if omega2_tilde.dim() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            found: omega2_tilde.dim(),
        });
    }
    if n > chain.len() {
        return Err(Error::ChainTooShort {
            len: chain.len(),
            requested: n,
        });
    }
    Ok(())
}

/// `sup_{ξ ∈ box} det ∇(p_n ∘ … ∘ p_1)(ξ)` over a sampling lattice.
pub fn sup_det(chain: &ChainSpec, n: usize, region: &AxisBox, samples: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for xi in region.lattice(samples)? {
        let (_, det) = jacobian_chain(chain, &xi, n)?;
        best = best.max(det);
    }
    Ok(best)
}

/// `(2πℏ)^{-d/2} |Ω̃₂|^{1/2} sup_{Ω̃₂} (det ∇p^{(n)})^{1/2}`.
pub fn thm2_bound(chain: &ChainSpec, hbar: f64, n: usize, omega2_tilde: &AxisBox, samples: usize) -> Result<f64> {
    check_inputs(chain, hbar, n, omega2_tilde)?;
    let d = chain.dim() as f64;
    let sup = sup_det(chain, n, omega2_tilde, samples)?;
    Ok((2.0 * PI * hbar).powf(-d / 2.0) * omega2_tilde.volume().sqrt() * sup.sqrt())
}

/// `(2πℏ)^{-r/2} sup_{Ω̃₂}(det ∇p^{(n)})^{1/2} / inf (det ∇p̃^{(n)})^{1/2}`,
/// the infimum taken over the `ξ̃` projection of `Ω̃₂`.
pub fn thm3_bound(chain: &ChainSpec, hbar: f64, n: usize, omega2_tilde: &AxisBox, samples: usize) -> Result<f64> {
    check_inputs(chain, hbar, n, omega2_tilde)?;
    let r = chain.block_rank().ok_or(Error::MissingBlockStructure)?;
    let d = chain.dim();
    let sup = sup_det(chain, n, omega2_tilde, samples)?;
    let inf_tilde = if r == d {
        1.0
    } else {
        let tilde_box = omega2_tilde.project(r, d)?;
        let mut inf = f64::INFINITY;
        for xi in tilde_box.lattice(samples)? {
            inf = inf.min(tilde_det_chain(chain, &xi, n)?);
        }
        inf
    };
    if !(inf_tilde > 0.0) {
        return Err(Error::SingularJacobian { det: inf_tilde });
    }
    Ok((2.0 * PI * hbar).powf(-(r as f64) / 2.0) * (sup / inf_tilde).sqrt())
}

/// Least-squares line through `(x, ln y)` or `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on `(x_i, y_i)`; needs at least `min_points`
/// points and non-constant `x`.
pub fn linear_fit(points: &[(f64, f64)], min_points: usize) -> Result<DecayFit> {
    if points.len() < min_points.max(2) {
        return Err(Error::Degenerate(alloc::format!(
            "{} points, at least {} required for a fit",
            points.len(),
            min_points.max(2)
        )));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    if !points.iter().all(|p| p.0.is_finite() && p.1.is_finite()) {
        return Err(Error::Degenerate("non-finite data in fit".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: points.len(),
    })
}

fn log_values(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&(x, y)| {
            if y > 0.0 {
                Ok((x, y.ln()))
            } else {
                Err(Error::Degenerate(alloc::format!("non-positive value {y} in a logarithmic fit")))
            }
        })
        .collect()
}

/// Slope of `ln y` against `x` (at least 4 points, all `y > 0`).
pub fn exponential_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    linear_fit(&log_values(points)?, 4)
}

/// Slope of `ln y` against `ln x` (at least 3 points, all positive).
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<DecayFit> {
    let logged: Result<Vec<(f64, f64)>> = log_values(points)?
        .into_iter()
        .map(|(x, ly)| {
            if x > 0.0 {
                Ok((x.ln(), ly))
            } else {
                Err(Error::Degenerate(alloc::format!("non-positive abscissa {x} in a power-law fit")))
            }
        })
        .collect();
    linear_fit(&logged?, 3)
}

/// Slope of `ln(measured_norm)` against `n`.
pub fn decay_rate_fit(reports: &[NormReport]) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n as f64, r.measured_norm))
        .collect();
    exponential_fit(&points)
}

/// Largest ℏ such that `measured ≤ bound` holds at every report with that ℏ
/// or smaller. `None` if the bound fails at the smallest ℏ.
pub fn empirical_hbar_threshold<F>(reports: &[NormReport], bound: F) -> Option<f64>
where
    F: Fn(&NormReport) -> Option<f64>,
{
    let mut hbars: Vec<f64> = reports.iter().map(|r| r.hbar).collect();
    hbars.sort_by(f64::total_cmp);
    hbars.dedup();
    let mut threshold = None;
    for h in hbars {
        let ok = reports
            .iter()
            .filter(|r| r.hbar == h)
            .all(|r| bound(r).map_or(true, |b| r.measured_norm <= b));
        if !ok {
            break;
        }
        threshold = Some(h);
    }
    threshold
}
