//! Small dense matrices over any [`Scalar`], plus eigen/singular values of
//! complex matrices (delegated to `nalgebra`).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::error::{bail, Result};
use crate::field::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMat = Mat<Complex64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * rhs[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self − rhs`.
    pub fn distance(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (*a - *b).abs())
            .fold(0.0, f64::max)
    }

    /// Complex matrix obtained by replacing every entry with its complex block;
    /// quaternion matrices double in size.
    pub fn complex_embedding(&self) -> CMat {
        let d = T::FIELD.embedding_dim();
        let mut out = CMat::zeros(self.rows * d, self.cols * d);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let b = self[(i, j)].embed();
                for r in 0..d {
                    for c in 0..d {
                        out[(i * d + r, j * d + c)] = b[r][c];
                    }
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl CMat {
    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.adjoint()) <= tol
    }
}

/// Eigenvalues of a general complex square matrix (complex Schur form).
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    if a.rows != a.cols {
        bail!(InvalidParameter, "eigenvalues need a square matrix");
    }
    if a.rows == 0 {
        return Ok(Vec::new());
    }
    match a.to_nalgebra().try_schur(f64::EPSILON, 10_000) {
        Some(s) => match s.eigenvalues() {
            Some(ev) => Ok(ev.iter().copied().collect()),
            None => bail!(NumericalFailure, "Schur form did not triangularize"),
        },
        None => bail!(NumericalFailure, "Schur iteration did not converge"),
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues_hermitian(a: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = a.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values, descending.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut sv: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Eigenvalues of a real (not necessarily symmetric) matrix given row-major.
/// Conjugate pairs come out exactly conjugate.
pub fn real_eigenvalues_general(n: usize, entries: &[f64]) -> Result<Vec<Complex64>> {
    let m = DMatrix::from_row_slice(n, n, entries);
    match m.try_schur(f64::EPSILON, 10_000) {
        Some(s) => Ok(s.complex_eigenvalues().iter().copied().collect()),
        None => bail!(NumericalFailure, "real Schur iteration did not converge"),
    }
}

/// `ln|det A|` and the sign of `det A` for a real square matrix (row-major), by
/// LU with partial pivoting. Returns `None` for an exactly singular matrix.
pub fn log_abs_det(n: usize, entries: &[f64]) -> Option<(f64, f64)> {
    assert_eq!(entries.len(), n * n);
    let mut a = entries.to_vec();
    let mut log_det = 0.0;
    let mut sign = 1.0;
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let d = a[k * n + k];
        if d < 0.0 {
            sign = -sign;
        }
        log_det += libm::log(d.abs());
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    Some((log_det, sign))
}

/// Approximate eigenvector of the tridiagonal matrix with diagonal `diag` and
/// symmetric off-diagonal `off`, by two steps of inverse iteration at `shift`.
/// The shifted system is solved by elimination with partial pivoting; exactly
/// zero pivots are replaced by `ε·scale`. Normalized to unit max-norm.
pub fn inverse_iteration(diag: &[Complex64], off: &[f64], shift: Complex64) -> Vec<Complex64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n);
    let scale = diag.iter().map(|d| d.norm()).chain(off.iter().map(|e| e.abs())).fold(shift.norm(), f64::max);
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut x = vec![Complex64::new(1.0, 0.0); n];
    for _ in 0..2 {
        solve_shifted_tridiagonal(diag, off, shift, &mut x, tiny);
        let norm = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    x
}

fn solve_shifted_tridiagonal(diag: &[Complex64], off: &[f64], shift: Complex64, b: &mut [Complex64], tiny: f64) {
    let n = diag.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut d: Vec<Complex64> = diag.iter().map(|&v| v - shift).collect();
    let mut sub: Vec<Complex64> = off.iter().map(|&e| Complex64::new(e, 0.0)).collect();
    let mut sup = sub.clone();
    // fill-in from row swaps
    let mut sup2 = vec![zero; n.saturating_sub(2)];
    let guard = |v: &mut Complex64| {
        if v.norm() == 0.0 {
            *v = Complex64::new(tiny, 0.0);
        }
    };
    for k in 0..n.saturating_sub(1) {
        if d[k].norm() >= sub[k].norm() {
            guard(&mut d[k]);
            let m = sub[k] / d[k];
            d[k + 1] -= m * sup[k];
            let bk = b[k];
            b[k + 1] -= m * bk;
        } else {
            let m = d[k] / sub[k];
            let (o1, r1) = (sup[k], d[k + 1]);
            let r2 = if k + 2 < n { sup[k + 1] } else { zero };
            d[k] = sub[k];
            sup[k] = r1;
            if k + 2 < n {
                sup2[k] = r2;
                sup[k + 1] = -m * r2;
            }
            d[k + 1] = o1 - m * r1;
            b.swap(k, k + 1);
            let bk = b[k];
            b[k + 1] -= m * bk;
        }
        sub[k] = zero;
    }
    guard(&mut d[n - 1]);
    for k in (0..n).rev() {
        let mut v = b[k];
        if k + 1 < n {
            v -= sup[k] * b[k + 1];
        }
        if k + 2 < n {
            v -= sup2[k] * b[k + 2];
        }
        b[k] = v / d[k];
    }
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets;
/// infinite when the sizes differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, z) in b.iter().enumerate() {
            if !used[j] {
                let d = (a[i] - z).norm();
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    worst
}

/// Collapses a spectrum in which every value appears twice (quaternion
/// embedding) by nearest pairing. Fails if a value has no partner within `tol`.
pub fn deduplicate_pairs(values: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    if values.len() % 2 != 0 {
        bail!(Inconsistent, "doubled spectrum has odd length {}", values.len());
    }
    let mut rest: Vec<Complex64> = values.to_vec();
    rest.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let mut out = Vec::with_capacity(values.len() / 2);
    while let Some(z) = rest.pop() {
        let (j, d) = rest
            .iter()
            .enumerate()
            .map(|(j, w)| (j, (z - w).norm()))
            .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if j == usize::MAX || d > tol {
            bail!(Inconsistent, "eigenvalue {z} has no partner within {tol:e}");
        }
        let w = rest.remove(j);
        out.push((z + w) * 0.5);
    }
    out.reverse();
    Ok(out)
}
