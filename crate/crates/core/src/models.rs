//! Matrix models: dense chiral matrices with rank-one couplings, their
//! Householder reduction to bidiagonal form, the interleaving permutation to a
//! zero-diagonal Jacobi matrix, the tridiagonal sampler for general β, and the
//! anti-bidiagonal presentation.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::eig;
use crate::error::{bail, Error, Result};
use crate::field::{Quaternion, Scalar, ScalarField};
use crate::linalg::{self, CMat, Mat};
use crate::random::{sample_chi, sample_gaussian, sample_haar_unit_vector, RngStream};

/// Off-diagonal entries below this are treated as a degenerate draw.
pub const DEGENERATE_ENTRY: f64 = 1e-13;

/// Tolerance used to pair the doubled eigenvalues of quaternion embeddings.
pub const QUATERNION_PAIRING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    beta: f64,
    m: usize,
    n: usize,
}

impl EnsembleParams {
    pub fn new(beta: f64, m: usize, n: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            bail!(InvalidParameter, "beta must be positive and finite, got {beta}");
        }
        if m == 0 || n == 0 {
            bail!(InvalidParameter, "m and n must be at least 1, got m = {m}, n = {n}");
        }
        Ok(Self { beta, m, n })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the Jacobi matrix: `2m` when `m ≤ n`, else `2n + 1`.
    pub fn dim(&self) -> usize {
        if self.m <= self.n {
            2 * self.m
        } else {
            2 * self.n + 1
        }
    }

    pub fn is_odd(&self) -> bool {
        self.m > self.n
    }

    /// Number of strictly positive eigenvalues of the unperturbed Jacobi matrix.
    pub fn s(&self) -> usize {
        self.m.min(self.n)
    }

    /// `a = |n − m| + 1 − 2/β`.
    pub fn a(&self) -> f64 {
        self.m.abs_diff(self.n) as f64 + 1.0 - 2.0 / self.beta
    }

    pub fn field(&self) -> Option<ScalarField> {
        ScalarField::from_beta(self.beta)
    }

    /// Zero eigenvalues of the full `(m+n)`-dimensional chiral matrix that the
    /// Jacobi reduction strips away.
    pub fn stripped_zeros(&self) -> usize {
        self.m + self.n - self.dim()
    }
}

/// Type of the rank-one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `Γ = l·u·u*`.
    Hermitian,
    /// `Γ = i·l·u·u*`.
    AntiHermitian,
}

impl Kind {
    /// The scalar that multiplies `u·u*` (or `e₁e₁ᵀ`) for a coupling of size `l`.
    pub fn coupling(self, l: f64) -> Complex64 {
        match self {
            Kind::Hermitian => Complex64::new(l, 0.0),
            Kind::AntiHermitian => Complex64::new(0.0, l),
        }
    }
}

/// How the direction `u` of the coupling is chosen when sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Haar,
    FirstBasis,
}

/// `m×n` Gaussian block `X` plus an optional rank-one coupling `Γ` in the
/// upper-left corner of `[[Γ, X], [X*, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseChiral<T> {
    x: Mat<T>,
    coupling: Option<(Kind, f64, Vec<T>)>,
}

impl<T: Scalar> DenseChiral<T> {
    /// `u` must have length `m` and unit norm.
    pub fn new(x: Mat<T>, coupling: Option<(Kind, f64, Vec<T>)>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            bail!(InvalidParameter, "X must be nonempty");
        }
        if let Some((_, l, u)) = &coupling {
            if !(*l >= 0.0 && l.is_finite()) {
                bail!(InvalidParameter, "coupling size must be nonnegative, got {l}");
            }
            if u.len() != x.rows() {
                bail!(InvalidParameter, "u has length {}, expected {}", u.len(), x.rows());
            }
            let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                bail!(InvalidParameter, "u must be a unit vector, |u| = {norm}");
            }
        }
        Ok(Self { x, coupling })
    }

    pub fn x(&self) -> &Mat<T> {
        &self.x
    }

    pub fn m(&self) -> usize {
        self.x.rows()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn kind(&self) -> Option<Kind> {
        self.coupling.as_ref().map(|c| c.0)
    }

    pub fn l(&self) -> f64 {
        self.coupling.as_ref().map_or(0.0, |c| c.1)
    }

    pub fn direction(&self) -> Option<&[T]> {
        self.coupling.as_ref().map(|c| c.2.as_slice())
    }

    /// Complex embedding of `Γ` (size `m·d` with `d` the embedding dimension).
    pub fn gamma(&self) -> CMat {
        let d = T::FIELD.embedding_dim();
        let m = self.m();
        match &self.coupling {
            None => CMat::zeros(m * d, m * d),
            Some((kind, l, u)) => {
                let uu = Mat::from_fn(m, m, |i, j| u[i] * u[j].conj());
                uu.complex_embedding().scale_complex(kind.coupling(*l))
            }
        }
    }

    /// The full `(m+n)·d` square complex matrix `[[Γ, X], [X*, 0]]`.
    pub fn assemble_full(&self) -> CMat {
        let (m, n) = (self.m(), self.n());
        let d = T::FIELD.embedding_dim();
        let xe = self.x.complex_embedding();
        let g = self.gamma();
        let size = (m + n) * d;
        CMat::from_fn(size, size, |i, j| {
            let top = i < m * d;
            let left = j < m * d;
            match (top, left) {
                (true, true) => g[(i, j)],
                (true, false) => xe[(i, j - m * d)],
                (false, true) => xe[(j, i - m * d)].conj(),
                (false, false) => Complex64::new(0.0, 0.0),
            }
        })
    }

    /// Eigenvalues of [`assemble_full`](Self::assemble_full), with the doubled
    /// quaternion spectrum collapsed.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let full = self.assemble_full();
        let ev = match self.kind() {
            Some(Kind::AntiHermitian) => linalg::eigenvalues(&full)?,
            _ => linalg::eigenvalues_hermitian(&full)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect(),
        };
        if T::FIELD == ScalarField::Quaternion {
            linalg::deduplicate_pairs(&ev, QUATERNION_PAIRING_TOL)
        } else {
            Ok(ev)
        }
    }
}

/// Draws `X` with i.i.d. entries of variance `β` and, for a coupling, the
/// direction `u` independently of `X`.
pub fn sample_dense<T: Scalar>(
    params: &EnsembleParams,
    coupling: Option<(Kind, f64)>,
    direction: Direction,
    rng: &mut RngStream,
) -> Result<DenseChiral<T>> {
    match params.field() {
        Some(f) if f == T::FIELD => {}
        _ => return Err(Error::UnsupportedField(params.beta())),
    }
    let (m, n) = (params.m(), params.n());
    let mut entries = Vec::with_capacity(m * n);
    for _ in 0..m * n {
        entries.push(sample_gaussian::<T>(params.beta(), rng)?);
    }
    let x = Mat::from_fn(m, n, |i, j| entries[i * n + j]);
    let coupling = match coupling {
        None => None,
        Some((kind, l)) => {
            let u = match direction {
                Direction::Haar => sample_haar_unit_vector::<T>(m, rng)?,
                Direction::FirstBasis => {
                    let mut e = vec![T::zero(); m];
                    e[0] = T::one();
                    e
                }
            };
            Some((kind, l, u))
        }
    };
    DenseChiral::new(x, coupling)
}

/// Positive entries of a lower-bidiagonal `m×n` matrix: `x` on the diagonal,
/// `y` on the subdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidiagonal {
    x: Vec<f64>,
    y: Vec<f64>,
    m: usize,
    n: usize,
}

impl Bidiagonal {
    pub fn new(x: Vec<f64>, y: Vec<f64>, m: usize, n: usize) -> Result<Self> {
        let s = m.min(n);
        let ylen = if m <= n { m - 1 } else { n };
        if m == 0 || n == 0 || x.len() != s || y.len() != ylen {
            bail!(
                InvalidParameter,
                "shape {m}x{n} needs {s} diagonal and {ylen} subdiagonal entries, got {} and {}",
                x.len(),
                y.len()
            );
        }
        if x.iter().chain(&y).any(|&v| !(v > 0.0)) {
            bail!(InvalidParameter, "bidiagonal entries must be strictly positive");
        }
        Ok(Self { x, y, m, n })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn to_matrix(&self) -> Mat<f64> {
        let mut b = Mat::zeros(self.m, self.n);
        for (j, &v) in self.x.iter().enumerate() {
            b[(j, j)] = v;
        }
        for (j, &v) in self.y.iter().enumerate() {
            b[(j + 1, j)] = v;
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalReport {
    /// Frobenius norm of `L·X·R − B`.
    pub residual: f64,
    /// `‖L e₁ − e₁‖`.
    pub first_column_error: f64,
}

/// Unitary `W = D·H` with `W v = |v| e₁`: `H` a Householder reflection and
/// `D = diag(phase, 1, …, 1)`.
struct Reflector<T> {
    w: Vec<T>,
    coef: f64,
    phase: T,
    norm: f64,
}

impl<T: Scalar> Reflector<T> {
    fn new(v: &[T]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            bail!(DegenerateInput, "exact zero pivot in Householder reduction");
        }
        let a = v[0].abs();
        let phi = if a > 0.0 { v[0].scale(1.0 / a) } else { T::one() };
        let mut w = v.to_vec();
        w[0] += phi.scale(norm);
        let ww = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        Ok(Self {
            w,
            coef: 2.0 / ww,
            phase: -phi.conj(),
            norm,
        })
    }

    /// `A[rows, cols] ← W · A[rows, cols]` where `rows` has the reflector's length.
    fn apply_left(&self, a: &mut Mat<T>, rows: Range<usize>, cols: Range<usize>) {
        let r0 = rows.start;
        for j in cols {
            let mut t = T::zero();
            for (i, wi) in self.w.iter().enumerate() {
                t += wi.conj() * a[(r0 + i, j)];
            }
            let t = t.scale(self.coef);
            for (i, wi) in self.w.iter().enumerate() {
                a[(r0 + i, j)] -= *wi * t;
            }
            a[(r0, j)] = self.phase * a[(r0, j)];
        }
    }

    /// `A[rows, cols] ← A[rows, cols] · W*` where `cols` has the reflector's length.
    fn apply_right_adjoint(&self, a: &mut Mat<T>, rows: Range<usize>, cols: Range<usize>) {
        let c0 = cols.start;
        for i in rows {
            let mut s = T::zero();
            for (k, wk) in self.w.iter().enumerate() {
                s += a[(i, c0 + k)] * *wk;
            }
            let s = s.scale(self.coef);
            for (k, wk) in self.w.iter().enumerate() {
                a[(i, c0 + k)] -= s * wk.conj();
            }
            a[(i, c0)] = a[(i, c0)] * self.phase.conj();
        }
    }
}

/// Alternating right/left reflections reducing `X` to the lower-bidiagonal
/// `B = L·X·R` with nonnegative real entries. Left reflections only touch rows
/// `2..m`, so `L e₁ = e₁`.
pub fn bidiagonalize<T: Scalar>(x: &Mat<T>) -> Result<(Bidiagonal, BidiagonalReport)> {
    let (m, n) = (x.rows(), x.cols());
    let mut work = x.clone();
    let mut left = Mat::<T>::identity(m);
    let mut right = Mat::<T>::identity(n);
    let s = m.min(n);
    let steps_left = if m <= n { m - 1 } else { n };
    let mut xs = Vec::with_capacity(s);
    let mut ys = Vec::with_capacity(steps_left);
    for j in 0..s {
        let row: Vec<T> = (j..n).map(|c| work[(j, c)].conj()).collect();
        let r = Reflector::new(&row)?;
        r.apply_right_adjoint(&mut work, 0..m, j..n);
        r.apply_right_adjoint(&mut right, 0..n, j..n);
        xs.push(r.norm);
        if j < steps_left {
            let col: Vec<T> = (j + 1..m).map(|i| work[(i, j)]).collect();
            let r = Reflector::new(&col)?;
            r.apply_left(&mut work, j + 1..m, 0..n);
            r.apply_left(&mut left, j + 1..m, 0..m);
            ys.push(r.norm);
        }
    }
    let b = Bidiagonal::new(xs, ys, m, n)?;
    let bt = b.to_matrix();
    let lxr = left.matmul(x).matmul(&right);
    let residual = Mat::from_fn(m, n, |i, j| lxr[(i, j)] - T::from_real(bt[(i, j)])).frobenius_norm();
    let first_column_error = (0..m)
        .map(|i| {
            let target = if i == 0 { T::one() } else { T::zero() };
            (left[(i, 0)] - target).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    Ok((b, BidiagonalReport { residual, first_column_error }))
}

/// Zero-diagonal symmetric tridiagonal matrix with positive off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    a: Vec<f64>,
}

impl JacobiMatrix {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            bail!(InvalidParameter, "a Jacobi matrix needs at least one off-diagonal entry");
        }
        if let Some(v) = a.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            bail!(InvalidParameter, "off-diagonal entries must be positive, found {v}");
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.len() + 1
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut j = Mat::zeros(n, n);
        for (k, &v) in self.a.iter().enumerate() {
            j[(k, k + 1)] = v;
            j[(k + 1, k)] = v;
        }
        j
    }
}

/// Jacobi matrix of the chGβE for any `β > 0`, rejecting and redrawing
/// degenerate samples. Also returns the number of rejected draws.
pub fn sample_chiral_jacobi_counted(
    params: &EnsembleParams,
    rng: &mut RngStream,
) -> Result<(JacobiMatrix, usize)> {
    let (beta, m, n) = (params.beta(), params.m(), params.n());
    let s = params.s();
    let ylen = if m <= n { m - 1 } else { n };
    let mut rejected = 0;
    loop {
        let mut a = Vec::with_capacity(params.dim() - 1);
        for j in 1..=s {
            a.push(sample_chi(beta * (n - j + 1) as f64, rng)?);
            if j <= ylen {
                a.push(sample_chi(beta * (m - j) as f64, rng)?);
            }
        }
        if a.iter().all(|&v| v >= DEGENERATE_ENTRY) {
            return Ok((JacobiMatrix::new(a)?, rejected));
        }
        rejected += 1;
    }
}

pub fn sample_chiral_jacobi(params: &EnsembleParams, rng: &mut RngStream) -> Result<JacobiMatrix> {
    sample_chiral_jacobi_counted(params, rng).map(|(j, _)| j)
}

/// `perm[k]` is the index in `[[0, B], [B*, 0]]` (rows of `B` first, then
/// columns) that becomes index `k` of the Jacobi form. The first `N` entries
/// span the Jacobi block; the rest index the stripped zero block.
pub fn jacobi_permutation(m: usize, n: usize) -> Vec<usize> {
    let mut p = Vec::with_capacity(m + n);
    for k in 0..m.min(n) {
        p.push(k);
        p.push(m + k);
    }
    if m > n {
        p.extend(n..m);
    } else {
        p.extend(m + m..m + n);
    }
    p
}

/// Interleaves `a = (x₁, y₁, x₂, y₂, …)`.
pub fn permute_to_jacobi(b: &Bidiagonal) -> JacobiMatrix {
    let mut a = Vec::with_capacity(b.x.len() + b.y.len());
    for (j, &x) in b.x.iter().enumerate() {
        a.push(x);
        if let Some(&y) = b.y.get(j) {
            a.push(y);
        }
    }
    JacobiMatrix { a }
}

/// `J + l·e₁e₁ᵀ` or `J + i·l·e₁e₁ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedJacobi {
    base: JacobiMatrix,
    l: f64,
    kind: Kind,
}

pub fn perturb(j: JacobiMatrix, l: f64, kind: Kind) -> Result<PerturbedJacobi> {
    if !(l > 0.0 && l.is_finite()) {
        bail!(InvalidParameter, "coupling l must be positive, got {l}");
    }
    Ok(PerturbedJacobi { base: j, l, kind })
}

impl PerturbedJacobi {
    pub fn base(&self) -> &JacobiMatrix {
        &self.base
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The single nonzero diagonal entry, `l` or `i·l`.
    pub fn corner(&self) -> Complex64 {
        self.kind.coupling(self.l)
    }

    pub fn trace(&self) -> Complex64 {
        self.corner()
    }

    pub fn to_dense(&self) -> CMat {
        let j = self.base.to_dense();
        let mut out = CMat::from_fn(j.rows(), j.cols(), |r, c| Complex64::new(j[(r, c)], 0.0));
        out[(0, 0)] = self.corner();
        out
    }
}

/// `σ` (0-based) with `output[i][j] = M[σ(i)][σ(j)]`: indices of the opposite
/// parity to `N` descending from the top, then the rest ascending.
pub fn antibidiagonal_permutation(n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (1..=n).rev().step_by(2).map(|k| k - 1).collect();
    let start = if n % 2 == 0 { 1 } else { 2 };
    p.extend((start..=n).step_by(2).map(|k| k - 1));
    p
}

/// Permutation-similar form of `J + l·e₁e₁ᵀ` with nonzeros on the two central
/// antidiagonals and `l` at `(⌊N/2⌋, ⌊N/2⌋)` (0-based).
pub fn antibidiagonal_form(pj: &PerturbedJacobi) -> Result<Mat<f64>> {
    if pj.kind != Kind::Hermitian {
        bail!(InvalidParameter, "the real anti-bidiagonal form needs a Hermitian coupling");
    }
    let mut m = pj.base.to_dense();
    m[(0, 0)] = pj.l;
    let s = antibidiagonal_permutation(pj.dim());
    Ok(Mat::from_fn(m.rows(), m.cols(), |i, j| m[(s[i], s[j])]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// Largest distance in a nearest matching of the two spectra.
    pub max_discrepancy: f64,
    pub dense: Vec<Complex64>,
    /// Eigenvalues of the perturbed Jacobi matrix followed by the stripped zeros.
    pub reduced: Vec<Complex64>,
    pub bidiagonal_residual: f64,
    pub jacobi: PerturbedJacobi,
}

impl ReductionReport {
    /// Dense eigenvalues with modulus below `tol`, minus those of the Jacobi part.
    pub fn extra_zeros(&self, tol: f64, stripped: usize) -> isize {
        let dense = self.dense.iter().filter(|z| z.norm() < tol).count() as isize;
        let jac = self.reduced[..self.reduced.len() - stripped]
            .iter()
            .filter(|z| z.norm() < tol)
            .count() as isize;
        dense - jac
    }
}

/// Pushes one realization through `Y = U*X`, bidiagonalization and the
/// permutation, and compares the spectrum of the resulting perturbed Jacobi
/// matrix (padded with the stripped zeros) against the dense spectrum.
pub fn dense_reduction_check<T: Scalar>(d: &DenseChiral<T>) -> Result<ReductionReport> {
    let Some((kind, l, u)) = &d.coupling else {
        bail!(InvalidParameter, "the reduction check needs a coupling");
    };
    let dense = d.eigenvalues()?;
    // W u = e₁, so U = W* maps e₁ to u and U*·X = W·X.
    let w = Reflector::new(u)?;
    let mut y = d.x.clone();
    w.apply_left(&mut y, 0..d.m(), 0..d.n());
    let (b, rep) = bidiagonalize(&y)?;
    let pj = perturb(permute_to_jacobi(&b), *l, *kind)?;
    let mut reduced: Vec<Complex64> = match kind {
        Kind::Hermitian => eig::eig_hermitian(&pj)?
            .config
            .z()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect(),
        Kind::AntiHermitian => eig::eig_nonhermitian(&pj)?.raw,
    };
    let stripped = d.m() + d.n() - pj.dim();
    reduced.extend(core::iter::repeat(Complex64::new(0.0, 0.0)).take(stripped));
    Ok(ReductionReport {
        max_discrepancy: linalg::multiset_distance(&dense, &reduced),
        dense,
        reduced,
        bidiagonal_residual: rep.residual,
        jacobi: pj,
    })
}

/// A dense model over whichever field `β` selects.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyDense {
    Real(DenseChiral<f64>),
    Complex(DenseChiral<Complex64>),
    Quaternion(DenseChiral<Quaternion>),
}

macro_rules! dispatch {
    ($self:expr, $d:ident => $body:expr) => {
        match $self {
            AnyDense::Real($d) => $body,
            AnyDense::Complex($d) => $body,
            AnyDense::Quaternion($d) => $body,
        }
    };
}

impl AnyDense {
    pub fn sample(
        params: &EnsembleParams,
        coupling: Option<(Kind, f64)>,
        direction: Direction,
        rng: &mut RngStream,
    ) -> Result<Self> {
        Ok(match params.field() {
            Some(ScalarField::Real) => AnyDense::Real(sample_dense(params, coupling, direction, rng)?),
            Some(ScalarField::Complex) => {
                AnyDense::Complex(sample_dense(params, coupling, direction, rng)?)
            }
            Some(ScalarField::Quaternion) => {
                AnyDense::Quaternion(sample_dense(params, coupling, direction, rng)?)
            }
            None => return Err(Error::UnsupportedField(params.beta())),
        })
    }

    pub fn field(&self) -> ScalarField {
        match self {
            AnyDense::Real(_) => ScalarField::Real,
            AnyDense::Complex(_) => ScalarField::Complex,
            AnyDense::Quaternion(_) => ScalarField::Quaternion,
        }
    }

    pub fn assemble_full(&self) -> CMat {
        dispatch!(self, d => d.assemble_full())
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        dispatch!(self, d => d.eigenvalues())
    }

    pub fn reduction_check(&self) -> Result<ReductionReport> {
        dispatch!(self, d => dense_reduction_check(d))
    }

    /// Nonzero singular values of `X`.
    pub fn singular_values(&self) -> Vec<f64> {
        let (sv, d) = dispatch!(self, d => (
            linalg::singular_values(&d.x().complex_embedding()),
            d.x().complex_embedding().rows() / d.m()
        ));
        sv.into_iter().step_by(d).collect()
    }

    /// Bidiagonal form of `X` itself (no rotation by `U*`).
    pub fn bidiagonalize(&self) -> Result<(Bidiagonal, BidiagonalReport)> {
        dispatch!(self, d => bidiagonalize(d.x()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_derived_quantities() {
        let p = EnsembleParams::new(2.0, 2, 3).unwrap();
        assert_eq!((p.dim(), p.s(), p.stripped_zeros()), (4, 2, 1));
        assert_eq!(p.a(), 1.0 + 1.0 - 1.0);
        let p = EnsembleParams::new(4.0, 3, 1).unwrap();
        assert_eq!((p.dim(), p.is_odd()), (3, true));
        assert_eq!(p.a(), 2.0 + 1.0 - 0.5);
        assert!(EnsembleParams::new(0.0, 1, 1).is_err());
        assert!(EnsembleParams::new(1.0, 0, 1).is_err());
    }

    #[test]
    fn dense_needs_classical_beta() {
        let p = EnsembleParams::new(0.7, 2, 2).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert_eq!(
            AnyDense::sample(&p, None, Direction::Haar, &mut rng),
            Err(Error::UnsupportedField(0.7))
        );
    }

    #[test]
    fn assembled_blocks() {
        let p = EnsembleParams::new(2.0, 2, 3).unwrap();
        let mut rng = RngStream::new(3, 0);
        let d: DenseChiral<Complex64> = sample_dense(&p, None, Direction::Haar, &mut rng).unwrap();
        let h = d.assemble_full();
        assert_eq!(h.rows(), 5);
        assert_eq!(h.max_abs_diff(&h.adjoint()), 0.0);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(h[(i, j)], c(0.0, 0.0));
            }
        }

        // u = e₁ puts l in the corner and nowhere else
        let p = EnsembleParams::new(1.0, 2, 2).unwrap();
        let mut r1 = RngStream::new(5, 0);
        let mut r2 = RngStream::new(5, 0);
        let d0: DenseChiral<f64> = sample_dense(&p, None, Direction::FirstBasis, &mut r1).unwrap();
        let d1: DenseChiral<f64> =
            sample_dense(&p, Some((Kind::Hermitian, 1.0)), Direction::FirstBasis, &mut r2).unwrap();
        let diff = Mat::from_fn(4, 4, |i, j| d1.assemble_full()[(i, j)] - d0.assemble_full()[(i, j)]);
        let mut e = CMat::zeros(4, 4);
        e[(0, 0)] = c(1.0, 0.0);
        assert_eq!(diff, e);

        let d2: DenseChiral<f64> =
            sample_dense(&p, Some((Kind::AntiHermitian, 0.7)), Direction::Haar, &mut r2).unwrap();
        let g = d2.gamma();
        assert!(g.max_abs_diff(&g.adjoint().scale_complex(c(-1.0, 0.0))) < 1e-15);
    }

    #[test]
    fn quaternion_spectrum_doubles() {
        let p = EnsembleParams::new(4.0, 1, 1).unwrap();
        let mut rng = RngStream::new(11, 0);
        let d: DenseChiral<Quaternion> = sample_dense(&p, None, Direction::Haar, &mut rng).unwrap();
        let h = d.assemble_full();
        assert_eq!(h.rows(), 4);
        let ev = linalg::eigenvalues_hermitian(&h);
        let q = d.x()[(0, 0)].abs();
        let want = [-q, -q, q, q];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(d.eigenvalues().unwrap().len(), 2);
    }

    #[test]
    fn two_by_two_chiral_eigenvalues() {
        let z = c(0.6, -0.8) * 2.5;
        let d = DenseChiral::new(Mat::from_fn(1, 1, |_, _| z), None).unwrap();
        let ev = d.eigenvalues().unwrap();
        assert!(linalg::multiset_distance(&ev, &[c(2.5, 0.0), c(-2.5, 0.0)]) < 1e-14);
    }

    #[test]
    fn bidiagonal_input_is_fixed_point() {
        let b = Bidiagonal::new(vec![1.5, 0.5], vec![2.0], 2, 3).unwrap();
        let (out, rep) = bidiagonalize(&b.to_matrix()).unwrap();
        for (p, q) in out.x().iter().chain(out.y()).zip(b.x().iter().chain(b.y())) {
            assert!((p - q).abs() < 1e-15);
        }
        assert!(rep.residual < 1e-15);
    }

    fn moments(m: &CMat, k: usize) -> f64 {
        // ⟨e₁, M^k e₁⟩ for the top-left entry
        let mut p = CMat::identity(m.rows());
        for _ in 0..k {
            p = p.matmul(m);
        }
        p[(0, 0)].re
    }

    #[test]
    fn bidiagonalization_preserves_invariants() {
        for (beta, m, n) in [(1.0, 3, 2), (2.0, 2, 3), (4.0, 3, 3), (2.0, 4, 1)] {
            let p = EnsembleParams::new(beta, m, n).unwrap();
            for seed in 0..5 {
                let mut rng = RngStream::new(seed, 9);
                let d = AnyDense::sample(&p, None, Direction::Haar, &mut rng).unwrap();
                let (b, rep) = d.bidiagonalize().unwrap();
                assert!(rep.residual < 1e-12, "residual {}", rep.residual);
                assert_eq!(rep.first_column_error, 0.0);
                let sv_x = d.singular_values();
                let mut sv_b = linalg::singular_values(&b.to_matrix().complex_embedding());
                sv_b.truncate(sv_x.len());
                for (s, t) in sv_x.iter().zip(&sv_b) {
                    assert!((s - t).abs() < 1e-12 * (1.0 + s));
                }
                // first-row moments of XX* and BB* agree
                let x = dispatch!(&d, dd => dd.x().complex_embedding());
                let xx = x.matmul(&x.adjoint());
                let be = b.to_matrix().complex_embedding();
                let bb = be.matmul(&be.adjoint());
                for k in 1..=3 {
                    let (u, v) = (moments(&xx, k), moments(&bb, k));
                    assert!((u - v).abs() < 1e-10 * (1.0 + u.abs()), "k={k}: {u} vs {v}");
                }
            }
        }
    }

    #[test]
    fn jacobi_sampler_layout() {
        let mut rng = RngStream::new(2, 0);
        let j = sample_chiral_jacobi(&EnsembleParams::new(2.0, 1, 1).unwrap(), &mut rng).unwrap();
        assert_eq!(j.dim(), 2);
        let j = sample_chiral_jacobi(&EnsembleParams::new(2.0, 2, 1).unwrap(), &mut rng).unwrap();
        assert_eq!(j.dim(), 3);
        let j = sample_chiral_jacobi(&EnsembleParams::new(0.3, 5, 7).unwrap(), &mut rng).unwrap();
        assert_eq!(j.a().len(), 9);
        assert!(j.a().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn jacobi_sampler_chi_parameters() {
        // β=1, m=n=2: (x₁, y₁, x₂) ~ (χ₂, χ₁, χ₁); E[χ_k²] = k
        let p = EnsembleParams::new(1.0, 2, 2).unwrap();
        let mut rng = RngStream::new(8, 1);
        let reps = 200_000;
        let mut sums = [0.0; 3];
        for _ in 0..reps {
            let j = sample_chiral_jacobi(&p, &mut rng).unwrap();
            for (s, a) in sums.iter_mut().zip(j.a()) {
                *s += a * a;
            }
        }
        for (s, k) in sums.iter().zip([2.0, 1.0, 1.0]) {
            let se = (2.0 * k / reps as f64).sqrt();
            assert!((s / reps as f64 - k).abs() < 4.0 * se);
        }
    }

    #[test]
    fn permutation_maps_block_matrix_to_jacobi() {
        for (m, n) in [(1, 1), (2, 2), (2, 3), (1, 3), (3, 1), (4, 2)] {
            let xs: Vec<f64> = (0..m.min(n)).map(|k| 1.0 + k as f64).collect();
            let ys: Vec<f64> = (0..if m <= n { m - 1 } else { n }).map(|k| 0.5 + k as f64).collect();
            let b = Bidiagonal::new(xs, ys, m, n).unwrap();
            let bm = b.to_matrix();
            let g = Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
                (true, false) => bm[(i, j - m)],
                (false, true) => bm[(j, i - m)],
                _ => 0.0,
            });
            let p = jacobi_permutation(m, n);
            let jac = permute_to_jacobi(&b);
            let big = jac.dim();
            let pg = Mat::from_fn(m + n, m + n, |i, j| g[(p[i], p[j])]);
            for i in 0..m + n {
                for j in 0..m + n {
                    let want = if i < big && j < big { jac.to_dense()[(i, j)] } else { 0.0 };
                    assert_eq!(pg[(i, j)], want, "({m},{n}) at ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn perturbation_trace_and_small_case() {
        let pj = perturb(JacobiMatrix::new(vec![1.0]).unwrap(), 2.0, Kind::Hermitian).unwrap();
        assert_eq!(pj.trace(), c(2.0, 0.0));
        let ev = linalg::eigenvalues_hermitian(&pj.to_dense());
        assert!((ev[0] - (1.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((ev[1] - (1.0 + 2f64.sqrt())).abs() < 1e-14);
        let pj = perturb(JacobiMatrix::new(vec![1.0]).unwrap(), 2.0, Kind::AntiHermitian).unwrap();
        assert_eq!(pj.trace(), c(0.0, 2.0));
        assert!(perturb(JacobiMatrix::new(vec![1.0]).unwrap(), 0.0, Kind::Hermitian).is_err());
    }

    #[test]
    fn antibidiagonal_small_cases() {
        assert_eq!(antibidiagonal_permutation(6), vec![5, 3, 1, 0, 2, 4]);
        assert_eq!(antibidiagonal_permutation(5), vec![4, 2, 0, 1, 3]);
        let pj = perturb(JacobiMatrix::new(vec![0.7]).unwrap(), 1.3, Kind::Hermitian).unwrap();
        let q = antibidiagonal_form(&pj).unwrap();
        assert_eq!(q, Mat::from_fn(2, 2, |i, j| [[0.0, 0.7], [0.7, 1.3]][i][j]));
    }

    proptest! {
        #[test]
        fn antibidiagonal_structure(a in prop::collection::vec(0.1..3.0f64, 1..9), l in 0.1..3.0f64) {
            let big = a.len() + 1;
            let pj = perturb(JacobiMatrix::new(a).unwrap(), l, Kind::Hermitian).unwrap();
            let q = antibidiagonal_form(&pj).unwrap();
            let mid = big / 2;
            let mut nonzeros = 0;
            for i in 0..big {
                for j in 0..big {
                    if q[(i, j)] != 0.0 {
                        nonzeros += 1;
                        let on_anti = i + j == big - 1 || i + j == big;
                        prop_assert!(on_anti || (i == mid && j == mid));
                    }
                }
            }
            prop_assert_eq!(q[(mid, mid)], l);
            prop_assert_eq!(nonzeros, 2 * (big - 1) + 1);
            // undoing the permutation recovers the matrix
            let s = antibidiagonal_permutation(big);
            let mut back = Mat::<f64>::zeros(big, big);
            for i in 0..big {
                for j in 0..big {
                    back[(s[i], s[j])] = q[(i, j)];
                }
            }
            let dense = pj.to_dense();
            for i in 0..big {
                for j in 0..big {
                    prop_assert_eq!(back[(i, j)], dense[(i, j)].re);
                }
            }
            let e1 = linalg::eigenvalues_hermitian(&q.complex_embedding());
            let e2 = linalg::eigenvalues_hermitian(&dense);
            for (x, y) in e1.iter().zip(&e2) {
                prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn reduction_check_small_grid() {
        for (beta, m, n) in [(2.0, 2, 3), (1.0, 3, 1), (4.0, 2, 2), (2.0, 1, 1)] {
            for kind in [Kind::Hermitian, Kind::AntiHermitian] {
                let p = EnsembleParams::new(beta, m, n).unwrap();
                for seed in 0..5 {
                    let mut rng = RngStream::new(seed, 0);
                    let d = AnyDense::sample(&p, Some((kind, 0.8)), Direction::Haar, &mut rng).unwrap();
                    let rep = d.reduction_check().unwrap();
                    assert!(rep.max_discrepancy < 1e-10, "{beta} {m} {n} {kind:?}: {}", rep.max_discrepancy);
                }
            }
        }
    }

    #[test]
    fn quadratic_case_antihermitian() {
        // m = n = 1: eigenvalues (il ± √(4x² − l²))/2
        let x = 0.9;
        let l = 1.0;
        let d = DenseChiral::new(
            Mat::from_fn(1, 1, |_, _| c(0.0, x)),
            Some((Kind::AntiHermitian, l, vec![c(0.0, 1.0)])),
        )
        .unwrap();
        let disc = (4.0 * x * x - l * l).sqrt();
        let want = [c(disc / 2.0, l / 2.0), c(-disc / 2.0, l / 2.0)];
        assert!(linalg::multiset_distance(&d.eigenvalues().unwrap(), &want) < 1e-14);
        let rep = dense_reduction_check(&d).unwrap();
        assert!(rep.max_discrepancy < 1e-14);
    }
}
