//! Ready-made model systems: the identity, a one-dimensional contraction,
//! a two-dimensional model of geodesic flow on a hyperbolic surface, and
//! diagonal root-space models with a chosen neutral block.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve_momentum, ChainSpec, LinearMap, MomentumMap, QuadraticPhase, SurfaceMap};
use crate::bounds::{power_norm, single_operator_norm, thm2_bound, thm3_bound, NormMethod, NormReport, PowerSettings};
use crate::fio::{FioChain, FioOperator};
use crate::grid::GridSpec;
use crate::symbols::{AxisBox, CutoffBox, SymbolSpec, DEFAULT_PLATEAU_FRACTION};
use crate::{Error, Result};

/// Names accepted by [`ScenarioSpec::preset`].
pub const SCENARIO_NAMES: [&str; 4] = ["identity", "isotropic_contraction", "surface_model", "block_root_model"];

/// The dynamics of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioKind {
    /// `p = id`, `α = 0`.
    Identity { dim: usize },
    /// `p(ξ) = e^{-λτ}ξ`, `α(ξ) = cξ²/2` in one dimension.
    IsotropicContraction { lambda: f64, tau: f64, phase_curvature: f64 },
    /// `p(X, ε) = (e^{-τ√(2ε)}X, ε)` on the energy window
    /// `[(1-η)²/2, (1+η)²/2]`.
    SurfaceModel { tau: f64, eta: f64 },
    /// Diagonal contraction `e^{-τ·rates[i]}` per coordinate; coordinates in
    /// `neutral` form the `ξ̃` block and are moved to the end.
    BlockRootModel { tau: f64, rates: Vec<f64>, neutral: Vec<usize> },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity { .. } => "identity",
            Self::IsotropicContraction { .. } => "isotropic_contraction",
            Self::SurfaceModel { .. } => "surface_model",
            Self::BlockRootModel { .. } => "block_root_model",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Identity { dim } => *dim,
            Self::IsotropicContraction { .. } => 1,
            Self::SurfaceModel { .. } => 2,
            Self::BlockRootModel { rates, .. } => rates.len(),
        }
    }

    /// Per-coordinate rates of the block-root model in the reordered
    /// coordinates (non-neutral first).
    fn reordered_rates(rates: &[f64], neutral: &[usize]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..rates.len())
            .filter(|i| !neutral.contains(i))
            .map(|i| rates[i])
            .collect();
        out.extend(neutral.iter().map(|&i| rates[i]));
        out
    }

    /// Distinct rates with multiplicities, restricted to non-neutral
    /// coordinates.
    pub fn root_multiplicities(&self) -> Vec<(f64, usize)> {
        let Self::BlockRootModel { rates, neutral, .. } = self else {
            return Vec::new();
        };
        let mut roots: Vec<(f64, usize)> = Vec::new();
        for (i, &rate) in rates.iter().enumerate() {
            if neutral.contains(&i) {
                continue;
            }
            match roots.iter_mut().find(|(r, _)| *r == rate) {
                Some(entry) => entry.1 += 1,
                None => roots.push((rate, 1)),
            }
        }
        roots
    }
}

/// Full description of a scenario: dynamics, grid and symbol supports.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub half_width: f64,
    pub points: usize,
    /// Input cutoff `Ω` of the first step.
    pub input_support: Option<AxisBox>,
    /// Output cutoff `Ω₁` of every step.
    pub output_support: AxisBox,
    /// Momentum cutoff `Ω₂` of every step.
    pub momentum_support: AxisBox,
    /// Sampling region for the bounds; must strictly contain `Ω₂`.
    pub omega2_tilde: AxisBox,
    pub plateau_fraction: f64,
    /// Constant added to `α`.
    pub phase_offset: f64,
}

/// A scenario instantiated at one ℏ.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub chain: ChainSpec,
    /// First entry carries the input cutoff, the second is reused for every
    /// later step.
    pub symbols: Vec<SymbolSpec>,
    pub grid: GridSpec,
    pub omega2_tilde: AxisBox,
    pub block_rank: Option<usize>,
}

fn boxed(lower: &[f64], upper: &[f64]) -> AxisBox {
    AxisBox::new(lower, upper).expect("preset boxes are valid")
}

impl ScenarioSpec {
    /// Default parameters and geometry for each named scenario.
    pub fn preset(name: &str) -> Result<Self> {
        let spec = match name {
            "identity" => Self {
                kind: ScenarioKind::Identity { dim: 1 },
                half_width: 1.0,
                points: 1024,
                input_support: Some(boxed(&[-0.8], &[0.8])),
                output_support: boxed(&[-0.8], &[0.8]),
                momentum_support: boxed(&[-1.0], &[1.0]),
                omega2_tilde: boxed(&[-1.1], &[1.1]),
                plateau_fraction: DEFAULT_PLATEAU_FRACTION,
                phase_offset: 0.0,
            },
            "isotropic_contraction" => Self {
                kind: ScenarioKind::IsotropicContraction {
                    lambda: 1.0,
                    tau: 0.35,
                    phase_curvature: 0.25,
                },
                half_width: 1.25,
                points: 512,
                input_support: Some(boxed(&[-0.5], &[0.5])),
                output_support: boxed(&[-0.5], &[0.5]),
                momentum_support: boxed(&[-1.0], &[1.0]),
                omega2_tilde: boxed(&[-1.2], &[1.2]),
                plateau_fraction: DEFAULT_PLATEAU_FRACTION,
                phase_offset: 0.0,
            },
            "surface_model" => Self {
                kind: ScenarioKind::SurfaceModel { tau: 0.35, eta: 0.1 },
                half_width: 0.5,
                points: 48,
                input_support: Some(boxed(&[-0.45, -0.45], &[0.45, 0.45])),
                output_support: boxed(&[-0.4, -0.4], &[0.4, 0.4]),
                momentum_support: boxed(&[-0.5, 0.415], &[0.5, 0.595]),
                omega2_tilde: boxed(&[-0.55, 0.405], &[0.55, 0.605]),
                plateau_fraction: DEFAULT_PLATEAU_FRACTION,
                phase_offset: 0.0,
            },
            "block_root_model" => Self {
                kind: ScenarioKind::BlockRootModel {
                    tau: 0.35,
                    rates: alloc::vec![1.0, 0.5],
                    neutral: alloc::vec![1],
                },
                half_width: 0.5,
                points: 48,
                input_support: Some(boxed(&[-0.45, -0.45], &[0.45, 0.45])),
                output_support: boxed(&[-0.4, -0.4], &[0.4, 0.4]),
                momentum_support: boxed(&[-0.5, -0.5], &[0.5, 0.5]),
                omega2_tilde: boxed(&[-0.55, -0.55], &[0.55, 0.55]),
                plateau_fraction: DEFAULT_PLATEAU_FRACTION,
                phase_offset: 0.0,
            },
            other => return Err(Error::UnknownScenario(other.into())),
        };
        Ok(spec)
    }

    /// The contraction model on a wide fine grid (`L = 4`, `N = 4096`), with
    /// room for the plane-wave residual to be resolved at ℏ down to 1/800.
    pub fn wide_contraction() -> Self {
        Self {
            half_width: 4.0,
            points: 4096,
            input_support: Some(boxed(&[-1.0], &[1.0])),
            output_support: boxed(&[-3.0], &[3.0]),
            momentum_support: boxed(&[-1.5], &[1.5]),
            omega2_tilde: boxed(&[-1.6], &[1.6]),
            ..Self::preset("isotropic_contraction").expect("preset exists")
        }
    }

    /// The surface model with energy window `η = 0.25` on `L = 0.75`, wide
    /// enough in `ε` for seven momentum blocks at ℏ = 1e-2. Its momentum
    /// window only admits ℏ ≳ 7e-3 at 48 points per axis.
    pub fn wide_surface_model() -> Self {
        let eta: f64 = 0.25;
        let (lo, hi) = (0.5 * (1.0 - eta).powi(2), 0.5 * (1.0 + eta).powi(2));
        Self {
            kind: ScenarioKind::SurfaceModel { tau: 0.35, eta },
            half_width: 0.75,
            points: 48,
            input_support: Some(boxed(&[-0.675, -0.675], &[0.675, 0.675])),
            output_support: boxed(&[-0.6, -0.6], &[0.6, 0.6]),
            momentum_support: boxed(&[-0.5, lo + 0.01], &[0.5, hi - 0.01]),
            omega2_tilde: boxed(&[-0.55, lo], &[0.55, hi]),
            plateau_fraction: DEFAULT_PLATEAU_FRACTION,
            phase_offset: 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// One step of the dynamics.
    pub fn map(&self) -> Result<Arc<dyn MomentumMap>> {
        let d = self.dim();
        let phase = |c: f64| QuadraticPhase::isotropic(d, c).with_offset(self.phase_offset);
        let map: Arc<dyn MomentumMap> = match &self.kind {
            ScenarioKind::Identity { dim } => {
                if *dim == 0 || *dim > 3 {
                    return Err(Error::InvalidParameter(alloc::format!("identity dimension {dim} not in 1..=3")));
                }
                Arc::new(LinearMap::new(crate::linalg::SmallMatrix::identity(d), phase(0.0))?.with_block_rank(0)?)
            }
            ScenarioKind::IsotropicContraction {
                lambda,
                tau,
                phase_curvature,
            } => {
                if !(lambda * tau >= 0.0) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "contraction exponent λτ = {} must be ≥ 0",
                        lambda * tau
                    )));
                }
                Arc::new(LinearMap::diagonal(&[(-lambda * tau).exp()], phase(*phase_curvature))?)
            }
            ScenarioKind::SurfaceModel { tau, eta } => {
                if !(*eta >= 0.0 && *eta < 1.0) {
                    return Err(Error::InvalidParameter(alloc::format!("η = {eta} must lie in [0, 1)")));
                }
                Arc::new(SurfaceMap::new(*tau, phase(0.0))?)
            }
            ScenarioKind::BlockRootModel { tau, rates, neutral } => {
                if !(2..=3).contains(&rates.len()) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "block-root model needs 2 or 3 rates, got {}",
                        rates.len()
                    )));
                }
                if rates.iter().any(|r| !(r * tau >= 0.0)) {
                    return Err(Error::InvalidParameter("rates times τ must be ≥ 0".into()));
                }
                let mut seen = alloc::vec![false; rates.len()];
                for &j in neutral {
                    if j >= rates.len() || core::mem::replace(&mut seen[j], true) {
                        return Err(Error::InvalidParameter(alloc::format!(
                            "neutral coordinate list {neutral:?} is not a set of indices below {}",
                            rates.len()
                        )));
                    }
                }
                let diag: Vec<f64> = ScenarioKind::reordered_rates(rates, neutral)
                    .iter()
                    .map(|r| (-tau * r).exp())
                    .collect();
                let r = rates.len() - neutral.len();
                Arc::new(LinearMap::diagonal(&diag, phase(0.0))?.with_block_rank(r)?)
            }
        };
        Ok(map)
    }

    fn check_nesting(&self, grid: &GridSpec) -> Result<()> {
        let d = self.dim();
        let mut boxes = alloc::vec![("Ω₁", &self.output_support), ("Ω₂", &self.momentum_support), ("Ω̃₂", &self.omega2_tilde)];
        if let Some(input) = &self.input_support {
            boxes.push(("Ω", input));
        }
        for (label, b) in &boxes {
            if b.dim() != d {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{label} has dimension {}, scenario needs {d}",
                    b.dim()
                )));
            }
        }
        if !self.omega2_tilde.strictly_contains(&self.momentum_support) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Ω̃₂ {:?}..{:?} must strictly contain Ω₂ {:?}..{:?}",
                self.omega2_tilde.lower,
                self.omega2_tilde.upper,
                self.momentum_support.lower,
                self.momentum_support.upper
            )));
        }
        let limit = grid.momentum_limit();
        if !self.omega2_tilde.inside_symmetric(limit) {
            return Err(Error::InvalidParameter(alloc::format!(
                "Ω̃₂ must lie inside the momentum window (-{limit}, {limit}) at ħ = {}",
                grid.hbar()
            )));
        }
        if let ScenarioKind::SurfaceModel { eta, .. } = self.kind {
            let (lo, hi) = (0.5 * (1.0 - eta).powi(2), 0.5 * (1.0 + eta).powi(2));
            let (elo, ehi) = (self.omega2_tilde.lower[1], self.omega2_tilde.upper[1]);
            if elo < lo - 1e-12 || ehi > hi + 1e-12 {
                return Err(Error::InvalidParameter(alloc::format!(
                    "energy range [{elo}, {ehi}] of Ω̃₂ leaves the window [{lo}, {hi}] for η = {eta}"
                )));
            }
        }
        Ok(())
    }

    /// Instantiates the scenario at `hbar`, checking support nesting, orbit
    /// containment for `n_max` steps and the aliasing guards of the
    /// quantized operators.
    pub fn build(&self, hbar: f64, n_max: usize) -> Result<Scenario> {
        let grid = GridSpec::new(self.dim(), self.half_width, self.points, hbar)?;
        self.check_nesting(&grid)?;
        let map = self.map()?;
        let chain = ChainSpec::repeat(Arc::clone(&map), n_max.max(1))?;
        for corner in self.momentum_support.corners() {
            for xi in evolve_momentum(&chain, &corner, n_max.max(1))? {
                if !self.omega2_tilde.contains(&xi) {
                    return Err(Error::InvalidParameter(alloc::format!(
                        "orbit of Ω₂ corner {corner:?} reaches {xi:?}, outside Ω̃₂"
                    )));
                }
            }
        }
        let out = CutoffBox::with_fraction(self.output_support, self.plateau_fraction)?;
        let mom = CutoffBox::with_fraction(self.momentum_support, self.plateau_fraction)?;
        let later = SymbolSpec::new(out, mom)?;
        let first = match &self.input_support {
            Some(b) => later.with_input_cutoff(CutoffBox::with_fraction(*b, self.plateau_fraction)?)?,
            None => later,
        };
        for symbol in [first, later] {
            FioOperator::new(Arc::clone(&map), symbol, grid)?;
        }
        Ok(Scenario {
            name: self.name().into(),
            spec: self.clone(),
            block_rank: chain.block_rank(),
            chain,
            symbols: alloc::vec![first, later],
            grid,
            omega2_tilde: self.omega2_tilde,
        })
    }

    /// The closed-form decay predicted for the diagonal models,
    /// `(2πℏ)^{-r/2} Π_α e^{-nτ m_α α/2}` over non-neutral roots, with
    /// multiplicities `m_α` in the exponent. For the surface model the slowest
    /// rate `1 - η` on the energy window is used.
    pub fn diagonal_decay_bound(&self, hbar: f64, n: usize) -> Option<f64> {
        let n = n as f64;
        match &self.kind {
            ScenarioKind::SurfaceModel { tau, eta } => {
                Some((2.0 * PI * hbar).powf(-0.5) * (-n * tau * (1.0 - eta) / 2.0).exp())
            }
            ScenarioKind::BlockRootModel { tau, rates, neutral } => {
                let r = (rates.len() - neutral.len()) as f64;
                let exponent: f64 = self
                    .kind
                    .root_multiplicities()
                    .iter()
                    .map(|(rate, m)| *m as f64 * rate)
                    .sum();
                Some((2.0 * PI * hbar).powf(-r / 2.0) * (-n * tau * exponent / 2.0).exp())
            }
            ScenarioKind::Identity { .. } => Some(1.0),
            ScenarioKind::IsotropicContraction { .. } => None,
        }
    }
}

impl Scenario {
    /// One report per distinct `n` in `ns`, in increasing `n`. The dense
    /// method reuses prefix products, so a sweep over `1..=n` costs one
    /// small matrix product per step. Bounds use `samples` lattice
    /// points per axis of `Ω̃₂`.
    pub fn norm_reports(
        &self,
        ns: &[usize],
        method: NormMethod,
        settings: PowerSettings,
        samples: usize,
    ) -> Result<Vec<NormReport>> {
        let mut ns: Vec<usize> = ns.to_vec();
        ns.sort_unstable();
        ns.dedup();
        let Some(&n_max) = ns.last() else {
            return Ok(Vec::new());
        };
        if ns[0] == 0 {
            return Err(Error::ChainTooShort { len: self.chain.len(), requested: 0 });
        }
        let ops = FioChain::build(&self.chain, &self.symbols, self.grid, n_max)?;
        let mut step_norms: Vec<(&Arc<FioOperator>, f64)> = Vec::new();
        let mut trivial = Vec::with_capacity(n_max);
        let mut acc = 1.0;
        for op in ops.operators() {
            let v = match step_norms.iter().find(|(o, _)| Arc::ptr_eq(o, op)) {
                Some((_, v)) => *v,
                None => {
                    let v = single_operator_norm(op, settings)?.value;
                    step_norms.push((op, v));
                    v
                }
            };
            acc *= v;
            trivial.push(acc);
        }
        let mut measured: Vec<(f64, bool)> = Vec::with_capacity(ns.len());
        match method {
            NormMethod::DenseSvd => {
                measured.extend(ops.prefix_norms(&ns)?.into_iter().map(|v| (v, true)));
            }
            NormMethod::PowerIteration => {
                for &n in &ns {
                    let prefix = FioChain::new(ops.operators()[..n].to_vec())?;
                    let est = power_norm(&prefix, settings)?;
                    measured.push((est.value, est.converged));
                }
            }
        }
        let mut out = Vec::with_capacity(ns.len());
        for (&n, &(value, converged)) in ns.iter().zip(&measured) {
            let thm3 = match self.block_rank {
                Some(_) => Some(thm3_bound(&self.chain, self.grid.hbar(), n, &self.omega2_tilde, samples)?),
                None => None,
            };
            out.push(NormReport {
                scenario: self.name.clone(),
                hbar: self.grid.hbar(),
                n,
                measured_norm: value,
                trivial_bound: trivial[n - 1],
                thm2_bound: thm2_bound(&self.chain, self.grid.hbar(), n, &self.omega2_tilde, samples)?,
                thm3_bound: thm3,
                converged,
                wall_ms: None,
            });
        }
        Ok(out)
    }
}

/// Shorthand for `ScenarioSpec::preset(name)?.build(hbar, n_max)`.
pub fn build_scenario(name: &str, hbar: f64, n_max: usize) -> Result<Scenario> {
    ScenarioSpec::preset(name)?.build(hbar, n_max)
}
