//! In-place discrete Fourier transforms along one axis of a row-major array.
//!
//! Power-of-two lengths use an iterative radix-2 transform; other lengths fall
//! back to a direct O(N²) sum with a precomputed twiddle table.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `X[k] = Σ x[j] e^{-2πi jk/N}`
    Forward,
    /// `x[j] = Σ X[k] e^{+2πi jk/N}` (unnormalized)
    Backward,
}

pub(crate) struct Plan {
    len: usize,
    twiddles: Vec<Complex64>,
}

impl Plan {
    pub(crate) fn new(len: usize, direction: Direction) -> Self {
        let sign = match direction {
            Direction::Forward => -1.0,
            Direction::Backward => 1.0,
        };
        let twiddles = (0..len)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    pub(crate) fn process(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(data.len(), self.len);
        if self.len <= 1 {
            return;
        }
        if self.len.is_power_of_two() {
            self.radix2(data);
        } else {
            self.direct(data, scratch);
        }
    }

    fn radix2(&self, data: &mut [Complex64]) {
        let n = self.len;
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    fn direct(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.len;
        scratch.clear();
        scratch.extend_from_slice(data);
        for (k, out) in data.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for x in scratch.iter() {
                acc += *x * self.twiddles[idx];
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            *out = acc;
        }
    }
}

/// Applies `plan` along `axis` of a row-major `points^dim` array.
pub(crate) fn transform_axis(
    data: &mut [Complex64],
    dim: usize,
    points: usize,
    axis: usize,
    plan: &Plan,
) {
    let stride = points.pow((dim - 1 - axis) as u32);
    let outer = data.len() / (stride * points);
    let mut line = vec![Complex64::new(0.0, 0.0); points];
    let mut scratch = Vec::with_capacity(points);
    for o in 0..outer {
        for s in 0..stride {
            let base = o * stride * points + s;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            plan.process(&mut line, &mut scratch);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
}
