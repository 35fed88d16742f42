//! Small fixed-size vectors and matrices for phase-space points, and dense
//! complex operators with the spectral machinery used for norm measurements.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A point of `ℝ^d` with `d ≤ 3`, used for both positions and momenta.
#[derive(Clone, Copy, PartialEq)]
pub struct Vector {
    len: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "dimension {len} exceeds {MAX_DIM}");
        Self {
            len,
            data: [0.0; MAX_DIM],
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut v = Self::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        v
    }

    pub fn filled(len: usize, value: f64) -> Self {
        let mut v = Self::zeros(len);
        v.iter_mut().for_each(|x| *x = value);
        v
    }

    pub fn dim(&self) -> usize {
        self.len
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut v = *self;
        v.iter_mut().for_each(|x| *x *= s);
        v
    }

    /// Coordinates `start..end` as a new vector.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self::from_slice(&self[start..end])
    }

    /// Concatenation `(self, tail)`.
    pub fn concat(&self, tail: &Self) -> Self {
        let mut v = Self::zeros(self.len + tail.len);
        v[..self.len].copy_from_slice(self);
        v[self.len..].copy_from_slice(tail);
        v
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data[..self.len]
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.data[..self.len]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.len, rhs.len);
        self.iter_mut().zip(rhs.iter()).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.len, rhs.len);
        self.iter_mut().zip(rhs.iter()).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// A real `d × d` matrix, `d ≤ 3`, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct SmallMatrix {
    dim: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl SmallMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self {
            dim,
            data: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.data[i][i] = *d;
        }
        m
    }

    /// Builds a matrix from rows given as slices.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let mut m = Self::zeros(rows.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), rows.len(), "matrix must be square");
            m.data[i][..row.len()].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = self.data[j][i];
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.dim, v.dim());
        let mut out = Vector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.data[i][j] * v[j]).sum();
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.data;
        match self.dim {
            0 => 1.0,
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Solves `self · y = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        let n = self.dim;
        let mut a = self.data;
        let mut y = *b;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap_or(col);
            if a[pivot][col].abs() <= 1e-14 * scale {
                return Err(Error::SingularJacobian {
                    det: self.determinant(),
                });
            }
            a.swap(col, pivot);
            y.data.swap(col, pivot);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                y[row] -= f * y[col];
            }
        }
        for col in (0..n).rev() {
            let mut acc = y[col];
            for k in col + 1..n {
                acc -= a[col][k] * y[k];
            }
            y[col] = acc / a[col][col];
        }
        Ok(y)
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.data[i][j].abs());
            }
        }
        m
    }

    /// The sub-block with rows and columns in `start..end`.
    pub fn block(&self, start: usize, end: usize) -> Self {
        let mut m = Self::zeros(end - start);
        for i in start..end {
            for j in start..end {
                m.data[i - start][j - start] = self.data[i][j];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for SmallMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i][j]
    }
}

impl Mul for SmallMatrix {
    type Output = SmallMatrix;
    fn mul(self, rhs: SmallMatrix) -> SmallMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut m = SmallMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i][j] = (0..self.dim)
                    .map(|k| self.data[i][k] * rhs.data[k][j])
                    .sum();
            }
        }
        m
    }
}

impl fmt::Debug for SmallMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.dim).map(|i| &self.data[i][..self.dim]))
            .finish()
    }
}

/// A dense complex matrix acting between orthonormal coordinate systems, so
/// that its spectral norm is the operator norm of what it represents.
///
/// For operators on a position grid the coordinates are `f(x_j)·Δx^{d/2}`;
/// since both sides carry the same weight, the matrix also acts directly on
/// raw grid values.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    description: String,
}

impl DenseOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
            description: String::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Row-major construction.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            description: String::new(),
        })
    }

    /// Builds the matrix column by column.
    pub fn from_columns<I>(rows: usize, columns: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<Complex64>>,
    {
        let cols: Vec<Vec<Complex64>> = columns.into_iter().collect();
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "column {j} has {} entries, expected {rows}",
                    col.len()
                )));
            }
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    /// Random matrix with independent standard complex Gaussian-like entries
    /// (sum of uniforms), reproducible from `seed`.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        Self {
            rows,
            cols,
            data,
            description: String::from("random"),
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m.description = alloc::format!("adjoint({})", self.description);
        m
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows, "vector length does not match rows");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self^* · rhs` without materializing the adjoint.
    pub fn adjoint_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot form A^*B for {}x{} and {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let b_row = rhs.row(k);
            for (i, a) in self.row(k).iter().enumerate() {
                if *a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let a = a.conj();
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
            description: String::new(),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
            description: String::new(),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Scales column `j` by `weights[j]`.
    pub fn scale_columns(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.cols);
        let mut m = self.clone();
        for row in m.data.chunks_mut(self.cols) {
            for (v, w) in row.iter_mut().zip(weights) {
                *v *= *w;
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Largest singular value, exact up to rounding: the top eigenvalue of the
    /// smaller Gram matrix, found by Householder tridiagonalization and
    /// Sturm-sequence bisection.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 || self.is_zero() {
            return 0.0;
        }
        let gram = if self.cols <= self.rows {
            self.adjoint_matmul(self).expect("shapes agree")
        } else {
            self.matmul(&self.adjoint()).expect("shapes agree")
        };
        let top = hermitian_extreme_eigenvalue(&gram, Extreme::Largest);
        top.max(0.0).sqrt()
    }

    /// Upper-triangular factor `R` of a thin QR decomposition (`cols × cols`
    /// when `rows ≥ cols`), computed with Householder reflections.
    pub fn qr_r_factor(&self) -> Self {
        let m = self.rows;
        let n = self.cols;
        let mut a = self.clone();
        let steps = m.min(n);
        for k in 0..steps {
            let norm_x: f64 = (k..m).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                continue;
            }
            let x0 = a[(k, k)];
            let phase = if x0.norm() > 0.0 {
                x0 / x0.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            let mut v: Vec<Complex64> = (k..m).map(|i| a[(i, k)]).collect();
            v[0] += phase * norm_x;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            for j in k..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| vi.conj() * a[(k + t, j)])
                    .sum();
                let f = dot * (2.0 / vnorm2);
                for (t, vi) in v.iter().enumerate() {
                    let val = a[(k + t, j)] - vi * f;
                    a[(k + t, j)] = val;
                }
            }
        }
        let mut r = Self::zeros(steps, n);
        for i in 0..steps {
            for j in i..n {
                r[(i, j)] = a[(i, j)];
            }
        }
        r
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols,
                rhs.rows,
                rhs.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseOperator {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseOperator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseOperator")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("description", &self.description)
            .finish()
    }
}

/// Which end of the spectrum to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extreme {
    Largest,
    Smallest,
}

/// Reduces a Hermitian matrix to real symmetric tridiagonal form.
///
/// Returns `(diagonal, |off-diagonal|)`; the moduli suffice because a
/// diagonal unitary similarity makes every off-diagonal entry real.
pub fn hermitian_tridiagonal(h: &DenseOperator) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(h.rows(), h.cols(), "Hermitian matrix must be square");
    let n = h.rows();
    let mut a = h.clone();
    for k in 0..n.saturating_sub(2) {
        let norm_x: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // v = x + phase·‖x‖·e₁ on indices k+1..n
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] += phase * norm_x;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let m = n - k - 1;
        // p = β A₂₂ v over the trailing block
        let mut p = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let row = &a.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(aij, vj)| aij * vj).sum::<Complex64>() * beta;
        }
        let vp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kfac = vp * (beta / 2.0);
        let q: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kfac * vi).collect();
        // A₂₂ ← A₂₂ − v q^* − q v^*
        for i in 0..m {
            let row = &mut a.data[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..m {
                row[j] -= v[i] * q[j].conj() + q[i] * v[j].conj();
            }
        }
        // First column/row of the reflected block: −phase·‖x‖ e₁
        for i in k + 1..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
            a[(k, i)] = Complex64::new(0.0, 0.0);
        }
        a[(k + 1, k)] = -phase * norm_x;
        a[(k, k + 1)] = (-phase * norm_x).conj();
    }
    let diag = (0..n).map(|i| a[(i, i)].re).collect();
    let off = (0..n.saturating_sub(1)).map(|i| a[(i + 1, i)].norm()).collect();
    (diag, off)
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` that are
/// strictly less than `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs() + 1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1] } else { 0.0 } + if i + 1 < n { off[i] } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let width = (hi - lo).abs().max(f64::MIN_POSITIVE);
    lo -= 1e-12 * width;
    hi += 1e-12 * width;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest or smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_extreme_eigenvalue(h: &DenseOperator, which: Extreme) -> f64 {
    let (diag, off) = hermitian_tridiagonal(h);
    if diag.is_empty() {
        return 0.0;
    }
    let k = match which {
        Extreme::Largest => diag.len() - 1,
        Extreme::Smallest => 0,
    };
    tridiagonal_eigenvalue(&diag, &off, k)
}

/// All eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &DenseOperator) -> Vec<f64> {
    let (diag, off) = hermitian_tridiagonal(h);
    (0..diag.len())
        .map(|k| tridiagonal_eigenvalue(&diag, &off, k))
        .collect()
}

/// A linear map that can be applied together with its adjoint, in
/// orthonormal coordinates.
pub trait LinearOperator {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>>;
    fn apply_adjoint_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>>;
}

impl LinearOperator for DenseOperator {
    fn input_len(&self) -> usize {
        self.cols
    }
    fn output_len(&self) -> usize {
        self.rows
    }
    fn apply_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.apply(v))
    }
    fn apply_adjoint_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        Ok(self.apply_adjoint(v))
    }
}

/// Outcome of a power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIteration {
    /// Estimated largest singular value.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value by power iteration on `A^*A`, converged once two
/// successive Rayleigh quotients agree to `tol` (relative).
pub fn power_iteration<A: LinearOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<PowerIteration> {
    let n = op.input_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let mut previous: Option<f64> = None;
    for iter in 1..=max_iter {
        let w = op.apply_vec(&v)?;
        let rayleigh: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        if rayleigh == 0.0 {
            return Ok(PowerIteration {
                value: 0.0,
                iterations: iter,
                converged: true,
            });
        }
        if let Some(prev) = previous {
            if (rayleigh - prev).abs() <= tol * rayleigh {
                return Ok(PowerIteration {
                    value: rayleigh.sqrt(),
                    iterations: iter,
                    converged: true,
                });
            }
        }
        previous = Some(rayleigh);
        v = op.apply_adjoint_vec(&w)?;
        if normalize(&mut v) == 0.0 {
            return Ok(PowerIteration {
                value: 0.0,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(PowerIteration {
        value: previous.unwrap_or(0.0).sqrt(),
        iterations: max_iter,
        converged: false,
    })
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}
