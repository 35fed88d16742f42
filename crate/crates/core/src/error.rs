use alloc::string::String;

use thiserror::Error;

use crate::grid::Representation;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("momentum {value} on axis {axis} is outside the grid window |ξ| < {limit}")]
    MomentumAliasing { axis: usize, value: f64, limit: f64 },

    #[error("expected a wavefunction in {expected:?} representation, got {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular or orientation-reversing Jacobian (det = {det})")]
    SingularJacobian { det: f64 },

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("support leaves the admissible region: {0}")]
    SupportLeak(String),

    #[error("dense size {size} exceeds the limit {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("chain of length {len} cannot be evaluated for {requested} steps")]
    ChainTooShort { len: usize, requested: usize },

    #[error("map does not carry a coisotropic block structure")]
    MissingBlockStructure,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

pub type Result<T> = core::result::Result<T, Error>;
