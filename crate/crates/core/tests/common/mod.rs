#![allow(dead_code)]

use std::f64::consts::PI;

use hyperdisp_core::grid::{GridSpec, Representation, Wavefunction};
use hyperdisp_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_values(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_wave(rng: &mut ChaCha8Rng, grid: GridSpec) -> Wavefunction {
    Wavefunction::new(grid, random_values(rng, grid.len()), Representation::Position).unwrap()
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

/// The defining sum of the ℏ-Fourier transform, evaluated point by point.
pub fn direct_fourier(f: &Wavefunction) -> Vec<Complex64> {
    let grid = *f.grid();
    let d = grid.dim() as i32;
    let scale = (2.0 * PI * grid.hbar()).powf(-(d as f64) / 2.0) * grid.dx().powi(d);
    (0..grid.len())
        .map(|k| {
            let xi = grid.momentum(k);
            let s: Complex64 = f
                .values()
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -xi.dot(&grid.position(j)) / grid.hbar()))
                .sum();
            s * scale
        })
        .collect()
}
