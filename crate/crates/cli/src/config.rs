//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use hyperdisp_core::bounds::{NormMethod, PowerSettings, DEFAULT_MAX_ITER, DEFAULT_SAMPLES, DEFAULT_TOL};
use hyperdisp_core::linalg::Vector;
use hyperdisp_core::scenarios::{Scenario, ScenarioKind, ScenarioSpec};
use hyperdisp_core::symbols::AxisBox;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "scenario")]
    pub scenarios: Vec<ScenarioConfig>,
    pub hbar: HbarConfig,
    pub chain: ChainConfig,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub cotlar: CotlarConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A preset plus optional overrides. Unset fields keep the preset value.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// `"default"` or `"wide"`.
    #[serde(default)]
    pub geometry: Option<String>,
    pub half_width: Option<f64>,
    pub points: Option<usize>,
    pub dim: Option<usize>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub phase_curvature: Option<f64>,
    pub eta: Option<f64>,
    pub rates: Option<Vec<f64>>,
    pub neutral: Option<Vec<usize>>,
    pub phase_offset: Option<f64>,
    pub plateau_fraction: Option<f64>,
    pub input_support: Option<BoxConfig>,
    pub output_support: Option<BoxConfig>,
    pub momentum_support: Option<BoxConfig>,
    pub omega2_tilde: Option<BoxConfig>,
    /// Initial momentum for the plane-wave runs; defaults to the centre of
    /// the momentum support.
    pub xi0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbarConfig {
    pub values: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    #[serde(default = "default_spacing")]
    pub spacing: String,
}

fn default_spacing() -> String {
    "log".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    /// Fixed chain length.
    pub n: Option<usize>,
    /// `n = round(k |log ℏ|)`.
    pub k: Option<f64>,
    /// Report every length `1..=n` instead of `n` alone.
    #[serde(default)]
    pub all_lengths: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_method() -> String {
    "dense_svd".into()
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CotlarConfig {
    /// Chain length of the block decomposition.
    #[serde(default = "default_cotlar_n")]
    pub n: usize,
}

fn default_cotlar_n() -> usize {
    2
}

impl Default for CotlarConfig {
    fn default() -> Self {
        Self { n: default_cotlar_n() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_results")]
    pub results: String,
    #[serde(default = "default_plot")]
    pub plot: String,
    #[serde(default = "default_fits")]
    pub fits: String,
    #[serde(default = "default_cotlar_file")]
    pub cotlar: String,
    /// Dump the leading-order ansatz of every propagate point.
    #[serde(default)]
    pub wavefunctions: bool,
}

fn default_dir() -> PathBuf {
    "out".into()
}
fn default_results() -> String {
    "results.csv".into()
}
fn default_plot() -> String {
    "plot.csv".into()
}
fn default_fits() -> String {
    "fits.csv".into()
}
fn default_cotlar_file() -> String {
    "cotlar.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            results: default_results(),
            plot: default_plot(),
            fits: default_fits(),
            cotlar: default_cotlar_file(),
            wavefunctions: false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The ℏ values in increasing order.
    pub fn hbars(&self) -> Result<Vec<f64>, CliError> {
        let h = &self.hbar;
        let mut out = match (&h.values, h.min, h.max, h.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(points)) => {
                if !(lo > 0.0 && hi >= lo) || points == 0 {
                    return Err(invalid(format!("hbar range [{lo}, {hi}] with {points} points is empty")));
                }
                let t = |i: usize| if points == 1 { 0.0 } else { i as f64 / (points - 1) as f64 };
                match h.spacing.as_str() {
                    "log" => (0..points).map(|i| (lo.ln() + t(i) * (hi / lo).ln()).exp()).collect(),
                    "linear" => (0..points).map(|i| lo + t(i) * (hi - lo)).collect(),
                    other => return Err(invalid(format!("hbar.spacing must be \"log\" or \"linear\", got {other:?}"))),
                }
            }
            _ => return Err(invalid("hbar needs either `values` or all of `min`, `max`, `points`")),
        };
        if out.is_empty() {
            return Err(invalid("hbar.values is empty"));
        }
        if let Some(bad) = out.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(invalid(format!("hbar value {bad} must be positive")));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }

    /// Chain length at `hbar`.
    pub fn chain_length(&self, hbar: f64) -> Result<usize, CliError> {
        let n = match (self.chain.n, self.chain.k) {
            (Some(n), None) => n,
            (None, Some(k)) => {
                if !(k > 0.0) {
                    return Err(invalid(format!("chain.k = {k} must be positive")));
                }
                (k * hbar.ln().abs()).round() as usize
            }
            _ => return Err(invalid("chain needs exactly one of `n` or `k`")),
        };
        if n == 0 {
            return Err(invalid(format!("chain length is 0 at hbar = {hbar}")));
        }
        Ok(n)
    }

    /// Lengths reported at `hbar`.
    pub fn lengths(&self, hbar: f64) -> Result<Vec<usize>, CliError> {
        let n = self.chain_length(hbar)?;
        Ok(if self.chain.all_lengths { (1..=n).collect() } else { vec![n] })
    }

    pub fn method(&self) -> Result<NormMethod, CliError> {
        match self.norm.method.as_str() {
            "dense_svd" => Ok(NormMethod::DenseSvd),
            "power_iteration" => Ok(NormMethod::PowerIteration),
            other => Err(invalid(format!(
                "norm.method must be \"dense_svd\" or \"power_iteration\", got {other:?}"
            ))),
        }
    }

    pub fn power_settings(&self) -> PowerSettings {
        PowerSettings {
            tol: self.norm.tol,
            max_iter: self.norm.max_iter,
            seed: self.seed,
        }
    }
}

fn axis_box(b: &BoxConfig, what: &str) -> Result<AxisBox, CliError> {
    AxisBox::new(&b.lower, &b.upper).map_err(|e| invalid(format!("{what}: {e}")))
}

impl ScenarioConfig {
    /// The preset with every override applied.
    pub fn spec(&self) -> Result<ScenarioSpec, CliError> {
        let mut spec = match self.geometry.as_deref().unwrap_or("default") {
            "default" => ScenarioSpec::preset(&self.name).map_err(|e| invalid(e.to_string()))?,
            "wide" => match self.name.as_str() {
                "isotropic_contraction" => ScenarioSpec::wide_contraction(),
                "surface_model" => ScenarioSpec::wide_surface_model(),
                other => return Err(invalid(format!("no wide geometry for scenario {other:?}"))),
            },
            other => return Err(invalid(format!("geometry must be \"default\" or \"wide\", got {other:?}"))),
        };
        let misplaced = |field: &str| invalid(format!("parameter `{field}` does not apply to scenario {:?}", self.name));
        match &mut spec.kind {
            ScenarioKind::Identity { dim } => {
                if let Some(d) = self.dim {
                    *dim = d;
                }
                for (f, set) in [("lambda", self.lambda.is_some()), ("tau", self.tau.is_some()), ("eta", self.eta.is_some())] {
                    if set {
                        return Err(misplaced(f));
                    }
                }
            }
            ScenarioKind::IsotropicContraction {
                lambda,
                tau,
                phase_curvature,
            } => {
                *lambda = self.lambda.unwrap_or(*lambda);
                *tau = self.tau.unwrap_or(*tau);
                *phase_curvature = self.phase_curvature.unwrap_or(*phase_curvature);
                if self.eta.is_some() {
                    return Err(misplaced("eta"));
                }
            }
            ScenarioKind::SurfaceModel { tau, eta } => {
                *tau = self.tau.unwrap_or(*tau);
                *eta = self.eta.unwrap_or(*eta);
                if self.lambda.is_some() {
                    return Err(misplaced("lambda"));
                }
            }
            ScenarioKind::BlockRootModel { tau, rates, neutral } => {
                *tau = self.tau.unwrap_or(*tau);
                if let Some(r) = &self.rates {
                    *rates = r.clone();
                }
                if let Some(j) = &self.neutral {
                    *neutral = j.clone();
                }
            }
        }
        if self.dim.is_some() && !matches!(spec.kind, ScenarioKind::Identity { .. }) {
            return Err(misplaced("dim"));
        }
        if let Some(l) = self.half_width {
            spec.half_width = l;
        }
        if let Some(n) = self.points {
            spec.points = n;
        }
        if let Some(c) = self.phase_offset {
            spec.phase_offset = c;
        }
        if let Some(f) = self.plateau_fraction {
            spec.plateau_fraction = f;
        }
        if let Some(b) = &self.input_support {
            spec.input_support = Some(axis_box(b, "input_support")?);
        }
        if let Some(b) = &self.output_support {
            spec.output_support = axis_box(b, "output_support")?;
        }
        if let Some(b) = &self.momentum_support {
            spec.momentum_support = axis_box(b, "momentum_support")?;
        }
        if let Some(b) = &self.omega2_tilde {
            spec.omega2_tilde = axis_box(b, "omega2_tilde")?;
        }
        Ok(spec)
    }

    /// Initial momentum of the plane-wave runs.
    pub fn xi0(&self, spec: &ScenarioSpec) -> Result<Vector, CliError> {
        match &self.xi0 {
            Some(v) => {
                if v.len() != spec.dim() {
                    return Err(invalid(format!(
                        "xi0 has {} entries, scenario {:?} has dimension {}",
                        v.len(),
                        self.name,
                        spec.dim()
                    )));
                }
                Ok(Vector::from_slice(v))
            }
            None => {
                let b = &spec.momentum_support;
                let mid: Vec<f64> = (0..b.dim()).map(|a| 0.5 * (b.lower[a] + b.upper[a])).collect();
                Ok(Vector::from_slice(&mid))
            }
        }
    }
}

/// One scenario instantiated at one ℏ, validated for the largest chain
/// length it will be used with.
#[derive(Clone, Debug)]
pub struct Point {
    pub scenario: Scenario,
    pub xi0: Vector,
    pub lengths: Vec<usize>,
}

impl ExperimentConfig {
    /// Builds and validates every (scenario, ℏ) point before any computation.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        if self.scenarios.is_empty() {
            return Err(invalid("at least one [[scenario]] is required"));
        }
        self.method()?;
        if !(self.norm.tol > 0.0) || self.norm.max_iter == 0 || self.norm.samples < 2 {
            return Err(invalid("norm needs tol > 0, max_iter ≥ 1 and samples ≥ 2"));
        }
        let hbars = self.hbars()?;
        let mut out = Vec::new();
        for sc in &self.scenarios {
            let spec = sc.spec()?;
            let xi0 = sc.xi0(&spec)?;
            for &hbar in &hbars {
                let lengths = self.lengths(hbar)?;
                let n_max = lengths.iter().copied().max().unwrap_or(1).max(self.cotlar.n);
                let scenario = spec
                    .build(hbar, n_max)
                    .map_err(|e| invalid(format!("scenario {:?} at hbar = {hbar}: {e}", sc.name)))?;
                out.push(Point { scenario, xi0, lengths });
            }
        }
        Ok(out)
    }
}
