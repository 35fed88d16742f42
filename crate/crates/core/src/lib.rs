//! Semiclassical Fourier integral operators whose canonical transformations
//! preserve the horizontal foliation `{ξ = const}`, and the machinery needed
//! to check hyperbolic dispersion estimates for long products of them.
//!
//! Everything lives on a periodic box `[-L, L)^d` (d ≤ 3) sampled with `N`
//! points per axis, tied to a value of ℏ. A canonical transformation is given
//! by its momentum map `ξ ↦ p(ξ)` and a scalar phase `α(ξ)`; the associated
//! operator is
//!
//! ```text
//! P f(x') = (2πℏ)^{-d} ∬ e^{i(⟨p(θ),x'⟩ - ⟨θ,x⟩ + α(θ))/ℏ} a(x, x', θ) f(x) dx dθ
//! ```
//!
//! evaluated through the ℏ-Fourier transform and a direct sum over the
//! momentum lattice.
//!
//! The crate is `no_std` (it needs `alloc`); file formats, configuration and
//! the command line live in the companion `hyperdisp-cli` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod cotlar;
pub mod dynamics;
mod error;
mod fft;
pub mod fio;
pub mod grid;
pub mod linalg;
pub mod scenarios;
pub mod symbols;
pub mod wkb;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use crate::bounds::{NormEstimate, NormMethod, NormReport};
pub use crate::dynamics::{ChainSpec, MomentumMap, Trajectory};
pub use crate::fio::{FioChain, FioOperator};
pub use crate::grid::{GridSpec, Representation, Wavefunction};
pub use crate::linalg::{DenseOperator, SmallMatrix, Vector};
pub use crate::symbols::{CutoffBox, SymbolSpec};
