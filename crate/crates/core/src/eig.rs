//! Spectra of the (perturbed) Jacobi matrices and the maps back from spectral
//! data to matrices.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::error::{bail, Error, Result};
use crate::models::{perturb, JacobiMatrix, Kind, PerturbedJacobi};
use crate::poly;

/// A root `r` of the real polynomial `Q` counts as real when
/// `|Im r| ≤ REAL_ROOT_TOL·(1 + |r|)`.
pub const REAL_ROOT_TOL: f64 = 1e-9;

/// `±λ` pairs of an unperturbed spectrum must agree to `PAIRING_TOL·(1 + scale)`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Largest `|α_k|` accepted from the Lanczos recurrence on a symmetric measure.
pub const LANCZOS_DIAGONAL_TOL: f64 = 1e-9;

/// Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson shifts.
/// Returns eigenvalues in ascending order together with the first component
/// of each normalized eigenvector (only row 0 of the eigenvector matrix is
/// accumulated).
pub fn tridiagonal_ql(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        bail!(InvalidParameter, "tridiagonal sizes {} and {} do not match", n, off.len());
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    let budget = 50 * n;
    let mut iterations = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > budget {
                bail!(NumericalFailure, "QL did not converge within {budget} iterations");
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let t = z[i + 1];
                z[i + 1] = s * z[i] + c * t;
                z[i] = c * z[i] - s * t;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok((idx.iter().map(|&k| d[k]).collect(), idx.iter().map(|&k| z[k]).collect()))
}

/// Coefficients `κ₀..κ_N` (ascending) of `det(z − M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    pub kappa: Vec<Complex64>,
}

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.kappa.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        poly::eval_complex_coeffs(&self.kappa, z)
    }

    /// Largest deviation from the real/imaginary pattern of the kind: all real
    /// for a Hermitian coupling; for an anti-Hermitian one `κ_j` is real when
    /// `N − j` is even and imaginary otherwise.
    pub fn parity_defect(&self, kind: Kind) -> f64 {
        let n = self.degree();
        self.kappa
            .iter()
            .enumerate()
            .map(|(j, k)| match kind {
                Kind::Hermitian => k.im.abs(),
                Kind::AntiHermitian if (n - j) % 2 == 0 => k.im.abs(),
                Kind::AntiHermitian => k.re.abs(),
            })
            .fold(0.0, f64::max)
    }
}

/// Determinant recurrence `p_k = (z − d_k) p_{k−1} − a_{k−1}² p_{k−2}`.
pub fn char_poly(pj: &PerturbedJacobi) -> CharPoly {
    let a = pj.base().a();
    let d1 = pj.corner();
    let zero = Complex64::new(0.0, 0.0);
    let mut prev2: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
    let mut prev: Vec<Complex64> = vec![-d1, Complex64::new(1.0, 0.0)];
    for k in 2..=pj.dim() {
        let ak = a[k - 2] * a[k - 2];
        let mut next = vec![zero; k + 1];
        for (j, &c) in prev.iter().enumerate() {
            next[j + 1] += c;
        }
        for (j, &c) in prev2.iter().enumerate() {
            next[j] -= c * ak;
        }
        prev2 = prev;
        prev = next;
    }
    CharPoly { kappa: prev }
}

/// `Q(w) = i^N κ(w/i)` for the anti-Hermitian coupling, which has real
/// coefficients; computed by its own recurrence `q_k = (w + l δ_{k1}) q_{k−1}
/// + a_{k−1}² q_{k−2}`.
pub fn rotated_char_poly(a: &[f64], l: f64) -> Vec<f64> {
    let mut prev2 = vec![1.0];
    let mut prev = vec![l, 1.0];
    for k in 2..=a.len() + 1 {
        let ak = a[k - 2] * a[k - 2];
        let mut next = vec![0.0; k + 1];
        for (j, &c) in prev.iter().enumerate() {
            next[j + 1] += c;
        }
        for (j, &c) in prev2.iter().enumerate() {
            next[j] += c * ak;
        }
        prev2 = prev;
        prev = next;
    }
    prev
}

/// Eigenvalues of `J + l e₁e₁ᵀ` in the order `z₁ > −z₂ > z₃ > … > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianConfig {
    z: Vec<f64>,
}

impl HermitianConfig {
    /// Accepts the points in any order; fails unless sorting by modulus gives
    /// strictly decreasing moduli with signs `+, −, +, …`.
    pub fn new(mut z: Vec<f64>) -> Result<Self> {
        if z.len() < 2 {
            bail!(InvalidConfiguration, "need at least two points, got {}", z.len());
        }
        if z.iter().any(|v| !v.is_finite()) {
            bail!(InvalidConfiguration, "non-finite point");
        }
        z.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        for (j, &v) in z.iter().enumerate() {
            let want_positive = j % 2 == 0;
            if v == 0.0 || (v > 0.0) != want_positive {
                bail!(InvalidConfiguration, "points are not sign-alternating at position {}", j + 1);
            }
            if j > 0 && !(z[j - 1].abs() > v.abs()) {
                bail!(InvalidConfiguration, "moduli are not strictly decreasing at position {}", j + 1);
            }
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn trace(&self) -> f64 {
        self.z.iter().sum()
    }
}

/// Point class of a non-Hermitian eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Imaginary,
    Pair,
}

/// `L` points on the positive imaginary axis and `M` mirror pairs `±x + iy`
/// in the open upper half plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexConfig {
    imag: Vec<f64>,
    pairs: Vec<(f64, f64)>,
}

impl ComplexConfig {
    pub fn new(mut imag: Vec<f64>, mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if imag.len() + 2 * pairs.len() == 0 {
            bail!(InvalidConfiguration, "empty configuration");
        }
        if imag.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
            bail!(InvalidConfiguration, "imaginary points must lie strictly above 0");
        }
        if pairs.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
            bail!(InvalidConfiguration, "pairs need x > 0 and y > 0");
        }
        imag.sort_by(|a, b| b.total_cmp(a));
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.total_cmp(&a.0)));
        Ok(Self { imag, pairs })
    }

    /// Splits points into axis points and mirror pairs. A point counts as on
    /// the axis when `|Re z| ≤ tol·(1 + |z|)`; every other point needs a mirror
    /// partner `−z̄` within `tol·(1 + |z|)`.
    pub fn from_points(points: &[Complex64], tol: f64) -> Result<Self> {
        let mut imag = Vec::new();
        let mut right = Vec::new();
        let mut left = Vec::new();
        for &z in points {
            if z.re.abs() <= tol * (1.0 + z.norm()) {
                imag.push(z.im);
            } else if z.re > 0.0 {
                right.push(z);
            } else {
                left.push(z);
            }
        }
        if right.len() != left.len() {
            bail!(InvalidConfiguration, "points are not symmetric about the imaginary axis");
        }
        let mut pairs = Vec::with_capacity(right.len());
        for z in right {
            let (k, dist) = nearest(&left, -z.conj());
            if dist > tol * (1.0 + z.norm()) {
                bail!(InvalidConfiguration, "{z} has no mirror partner (distance {dist:e})");
            }
            let w = left.swap_remove(k);
            pairs.push(((z.re - w.re) / 2.0, (z.im + w.im) / 2.0));
        }
        Self::new(imag, pairs)
    }

    pub fn imag(&self) -> &[f64] {
        &self.imag
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn l_count(&self) -> usize {
        self.imag.len()
    }

    pub fn m_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim(&self) -> usize {
        self.imag.len() + 2 * self.pairs.len()
    }

    /// All `N` points: axis points first, then `x + iy, −x + iy` per pair.
    pub fn points(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.imag.iter().map(|&y| Complex64::new(0.0, y)).collect();
        for &(x, y) in &self.pairs {
            out.push(Complex64::new(x, y));
            out.push(Complex64::new(-x, y));
        }
        out
    }

    pub fn classes(&self) -> Vec<PointClass> {
        let mut out = vec![PointClass::Imaginary; self.imag.len()];
        out.extend(core::iter::repeat(PointClass::Pair).take(2 * self.pairs.len()));
        out
    }

    pub fn sum(&self) -> Complex64 {
        let im: f64 = self.imag.iter().sum::<f64>() + 2.0 * self.pairs.iter().map(|p| p.1).sum::<f64>();
        Complex64::new(0.0, im)
    }
}

fn nearest(points: &[Complex64], target: Complex64) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(k, w)| (k, (w - target).norm()))
        .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub config: HermitianConfig,
    /// `⟨v_j, e₁⟩` for the eigenvector of `config.z()[j]`.
    pub first_components: Vec<f64>,
    /// Points moved by at most [`TIE_ULPS`] ulps to restore strict order (see
    /// [`eig_hermitian`]).
    pub ties_resolved: usize,
}

/// Largest order violation, in ulps of the spectral scale, that
/// [`eig_hermitian`] repairs instead of reporting a failure.
pub const TIE_ULPS: f64 = 16.0;

fn next_toward_zero(x: f64) -> f64 {
    if x == 0.0 {
        x
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

/// Eigenvalues of `J + l e₁e₁ᵀ`, sorted by modulus.
///
/// When a Jacobi entry is tiny the matrix nearly decouples, and the exact
/// eigenvalues can differ from a `±λ` pair of the lower block by less than
/// one ulp. Ties of that size are resolved in the direction fixed by
/// interlacing (the coupling pushes every eigenvalue up) by moving the
/// point at most [`TIE_ULPS`] ulps, within the accuracy of the QL iteration.
/// Larger violations are reported as a numerical failure.
pub fn eig_hermitian(pj: &PerturbedJacobi) -> Result<HermitianEigen> {
    if pj.kind() != Kind::Hermitian {
        bail!(InvalidParameter, "eig_hermitian needs a Hermitian coupling");
    }
    let mut diag = vec![0.0; pj.dim()];
    diag[0] = pj.l();
    let (ev, v1) = tridiagonal_ql(&diag, pj.base().a())?;
    let mut idx: Vec<usize> = (0..ev.len()).collect();
    idx.sort_by(|&a, &b| ev[b].abs().total_cmp(&ev[a].abs()));
    let tol = TIE_ULPS * f64::EPSILON * ev.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut z: Vec<f64> = idx.iter().map(|&k| ev[k]).collect();
    let mut ties_resolved = 0;
    for j in 0..z.len() {
        let want_positive = j % 2 == 0;
        let right_sign = |v: f64| v != 0.0 && (v > 0.0) == want_positive;
        if !right_sign(z[j]) {
            if j + 1 < z.len() && right_sign(z[j + 1]) && z[j].abs() - z[j + 1].abs() <= tol {
                z.swap(j, j + 1);
                idx.swap(j, j + 1);
            } else if z[j].abs() <= tol {
                let tiny = if z[j] == 0.0 { f64::from_bits(1) } else { z[j].abs() };
                z[j] = if want_positive { tiny } else { -tiny };
            } else {
                continue;
            }
            ties_resolved += 1;
        }
        if j > 0 && z[j].abs() >= z[j - 1].abs() && z[j].abs() - z[j - 1].abs() <= tol {
            z[j] = next_toward_zero(z[j - 1].abs()).copysign(z[j]);
            ties_resolved += 1;
        }
    }
    let config = HermitianConfig::new(z)
        .map_err(|e| Error::NumericalFailure(alloc::format!("computed spectrum is invalid: {e}")))?;
    Ok(HermitianEigen {
        config,
        first_components: idx.iter().map(|&k| v1[k]).collect(),
        ties_resolved,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonHermitianEigen {
    pub config: ComplexConfig,
    /// Eigenvalues as found, before symmetrization.
    pub raw: Vec<Complex64>,
    /// Largest distance between a point and the mirror of its partner.
    pub pairing_error: f64,
    /// `|Σ z − i·l|` over the raw eigenvalues.
    pub trace_error: f64,
    /// Some root of `Q` fell near the real/complex classification threshold.
    pub ambiguous: bool,
    pub class_tol: f64,
}

/// Imaginary parts below this fraction of the spectral scale are recomputed
/// from the eigenvector in [`eig_nonhermitian`].
pub const SMALL_IM_FRACTION: f64 = 1e-8;

/// Eigenvalues of `J + i l e₁e₁ᵀ` through the real polynomial `Q`: its roots
/// `r` give `z = −i r`, real roots become axis points and conjugate pairs
/// become mirror pairs.
///
/// The root finder only fixes `Im z` to absolute accuracy, which is not
/// enough when the matrix nearly decouples. For an eigenvector `v`,
/// `Im z = l |v₁|² / ‖v‖²` exactly, so imaginary parts below
/// [`SMALL_IM_FRACTION`] of the scale are taken from inverse iteration.
pub fn eig_nonhermitian(pj: &PerturbedJacobi) -> Result<NonHermitianEigen> {
    if pj.kind() != Kind::AntiHermitian {
        bail!(InvalidParameter, "eig_nonhermitian needs an anti-Hermitian coupling");
    }
    let q = rotated_char_poly(pj.base().a(), pj.l());
    let roots = poly::roots(&q)?;
    let scale = roots.iter().fold(pj.l(), |m, r| m.max(r.norm()));
    let mut diag = vec![Complex64::new(0.0, 0.0); pj.dim()];
    diag[0] = pj.corner();
    let roots: Vec<Complex64> = roots
        .into_iter()
        .map(|r| {
            let z = Complex64::new(r.im, -r.re);
            if z.im.abs() > SMALL_IM_FRACTION * scale {
                return r;
            }
            let v = crate::linalg::inverse_iteration(&diag, pj.base().a(), z);
            let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let im = pj.l() * v[0].norm_sqr() / norm2;
            if im.is_finite() {
                Complex64::new(-im, r.im)
            } else {
                r
            }
        })
        .collect();
    let raw: Vec<Complex64> = roots.iter().map(|r| Complex64::new(r.im, -r.re)).collect();

    let mut imag = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut ambiguous = false;
    for r in &roots {
        let band = REAL_ROOT_TOL * (1.0 + r.norm());
        if r.im.abs() <= band {
            imag.push(-r.re);
        } else if r.im > 0.0 {
            upper.push(*r);
        } else {
            lower.push(*r);
        }
        if r.im.abs() > band && r.im.abs() <= 100.0 * band {
            ambiguous = true;
        }
    }
    if upper.len() != lower.len() {
        bail!(NumericalFailure, "non-real roots of Q are not in conjugate pairs");
    }
    let mut pairing_error: f64 = 0.0;
    let mut pairs = Vec::with_capacity(upper.len());
    for r in upper {
        let (k, dist) = nearest(&lower, r.conj());
        let s = lower.swap_remove(k);
        pairing_error = pairing_error.max(dist);
        // r = p + iq ↦ ±q − ip
        pairs.push(((r.im - s.im) / 2.0, -(r.re + s.re) / 2.0));
    }
    let trace_error = (raw.iter().sum::<Complex64>() - pj.corner()).norm();
    let config = ComplexConfig::new(imag, pairs)
        .map_err(|e| Error::NumericalFailure(alloc::format!("computed spectrum is invalid: {e}")))?;
    Ok(NonHermitianEigen {
        config,
        raw,
        pairing_error,
        trace_error,
        ambiguous,
        class_tol: REAL_ROOT_TOL,
    })
}

/// `Σ ½ w_j (δ_{λ_j} + δ_{−λ_j}) + w₀ δ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    w0: Option<f64>,
}

impl SpectralMeasure {
    /// Needs strictly decreasing positive `lambdas`, positive weights and a
    /// total mass within `1e−9` of 1 (it is then rescaled to exactly 1).
    pub fn new(lambdas: Vec<f64>, weights: Vec<f64>, w0: Option<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != weights.len() {
            bail!(InvalidParameter, "need as many weights as support points");
        }
        if lambdas.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            bail!(InvalidParameter, "support points must be positive");
        }
        if lambdas.windows(2).any(|w| !(w[0] > w[1])) {
            bail!(InvalidParameter, "support points must be distinct and decreasing");
        }
        if weights.iter().chain(w0.as_ref()).any(|&w| !(w > 0.0)) {
            bail!(InvalidParameter, "weights must be positive");
        }
        let total: f64 = weights.iter().sum::<f64>() + w0.unwrap_or(0.0);
        if (total - 1.0).abs() > 1e-9 {
            bail!(InvalidParameter, "weights sum to {total}, not 1");
        }
        Ok(Self {
            lambdas,
            weights: weights.into_iter().map(|w| w / total).collect(),
            w0: w0.map(|w| w / total),
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn w0(&self) -> Option<f64> {
        self.w0
    }

    /// Size of the Jacobi matrix carrying this measure.
    pub fn dim(&self) -> usize {
        2 * self.lambdas.len() + usize::from(self.w0.is_some())
    }

    pub fn moment(&self, k: u32) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let s: f64 = self.lambdas.iter().zip(&self.weights).map(|(l, w)| w * l.powi(k as i32)).sum();
        s + if k == 0 { self.w0.unwrap_or(0.0) } else { 0.0 }
    }

    /// Atoms and masses of the measure as a list of `(point, mass)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.dim());
        for (&l, &w) in self.lambdas.iter().zip(&self.weights) {
            out.push((l, w / 2.0));
            out.push((-l, w / 2.0));
        }
        if let Some(w0) = self.w0 {
            out.push((0.0, w0));
        }
        out
    }
}

/// Spectral measure of `J` at `e₁`. The `±` members of a pair both contribute
/// to `w_j`.
pub fn spectral_measure(j: &JacobiMatrix) -> Result<SpectralMeasure> {
    let n = j.dim();
    let (ev, v1) = tridiagonal_ql(&vec![0.0; n], j.a())?;
    let scale = ev.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let tol = PAIRING_TOL * (1.0 + scale);
    let half = n / 2;
    let mut pairing: f64 = 0.0;
    let mut lambdas = Vec::with_capacity(half);
    let mut weights = Vec::with_capacity(half);
    for i in 0..half {
        let (lo, hi) = (i, n - 1 - i);
        pairing = pairing.max((ev[lo] + ev[hi]).abs());
        lambdas.push((ev[hi] - ev[lo]) / 2.0);
        weights.push(v1[lo] * v1[lo] + v1[hi] * v1[hi]);
    }
    let w0 = if n % 2 == 1 {
        pairing = pairing.max(ev[half].abs());
        Some(v1[half] * v1[half])
    } else {
        None
    };
    if pairing > tol {
        return Err(Error::SymmetryViolation(pairing));
    }
    SpectralMeasure::new(lambdas, weights, w0)
}

/// Lanczos (with full reorthogonalization) on the measure, started from the
/// constant function; returns the off-diagonal recurrence coefficients.
pub fn reconstruct_jacobi(sm: &SpectralMeasure) -> Result<JacobiMatrix> {
    let atoms = sm.atoms();
    let n = atoms.len();
    let t: Vec<f64> = atoms.iter().map(|a| a.0).collect();
    let scale = t.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    basis.push(atoms.iter().map(|a| a.1.sqrt()).collect());
    let mut a = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let q = &basis[k];
        let mut r: Vec<f64> = q.iter().zip(&t).map(|(x, s)| x * s).collect();
        let alpha: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
        if alpha.abs() > LANCZOS_DIAGONAL_TOL * (1.0 + scale) {
            bail!(Inconsistent, "diagonal recurrence coefficient {alpha:e} at step {k} should vanish");
        }
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let beta = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(beta > 1e-14 * (1.0 + scale)) {
            return Err(Error::IllConditioned(alloc::format!(
                "Lanczos breakdown at step {k} (norm {beta:e})"
            )));
        }
        a.push(beta);
        basis.push(r.into_iter().map(|x| x / beta).collect());
    }
    JacobiMatrix::new(a)
}

/// Value and derivative of `Π (z − r)` at `z`.
fn product_with_derivative(roots: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &r in roots {
        dp = dp * (z - r) + p;
        p *= z - r;
    }
    (p, dp)
}

/// `D'(t) = Π (t − r)` over the atoms `r ≠ t` of the unperturbed spectrum.
fn unperturbed_derivative(lambdas: &[f64], odd: bool, t: f64) -> f64 {
    let mut d = 1.0;
    for &l in lambdas {
        for r in [l, -l] {
            if r != t {
                d *= t - r;
            }
        }
    }
    if odd && t != 0.0 {
        d *= t;
    }
    d
}

/// Weights from the residues of the m-function: the atom at `t` has mass
/// `−κ(t) / (c·D'(t))` with `c` the corner entry.
fn residue_weights(
    points: &[Complex64],
    corner: Complex64,
    lambdas: &[f64],
    odd: bool,
) -> Result<(Vec<f64>, Option<f64>, f64)> {
    let mass = |t: f64| -> Complex64 {
        let (k, _) = product_with_derivative(points, Complex64::new(t, 0.0));
        -k / (corner * unperturbed_derivative(lambdas, odd, t))
    };
    let mut discrepancy: f64 = 0.0;
    let mut weights = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let (p, m) = (mass(l), mass(-l));
        discrepancy = discrepancy.max((p - m).norm()).max(p.im.abs()).max(m.im.abs());
        weights.push(p.re + m.re);
    }
    let w0 = if odd {
        let w = mass(0.0);
        discrepancy = discrepancy.max(w.im.abs());
        Some(w.re)
    } else {
        None
    };
    if let Some(bad) = weights.iter().chain(w0.as_ref()).find(|&&w| !(w > 0.0)) {
        bail!(Inconsistent, "recovered a nonpositive spectral weight {bad:e}");
    }
    Ok((weights, w0, discrepancy))
}

/// Result of an inverse map: the matrix and a residue-formula diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub matrix: PerturbedJacobi,
    pub measure: SpectralMeasure,
    /// Largest disagreement between the two residues of a `±λ` pair (and of
    /// any imaginary part of a residue).
    pub residue_discrepancy: f64,
}

/// Inverse of [`eig_hermitian`]: `l = Σ z`, the `λ_j` from the part of
/// `Π (z − z_k)` with the parity of `N` (bracketed by interlacing), the weights
/// from residues, and `J` by Lanczos.
pub fn reconstruct_hermitian(config: &HermitianConfig) -> Result<Reconstruction> {
    let z = config.z();
    let n = z.len();
    let odd = n % 2 == 1;
    let l = config.trace();
    if !(l > 0.0) {
        bail!(InvalidConfiguration, "the points must have positive sum, got {l}");
    }
    let mut nu: Vec<f64> = z.to_vec();
    nu.sort_by(f64::total_cmp);
    let points: Vec<Complex64> = z.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // D(x) = ½[κ(x) ± κ(−x)], sign chosen so that D has the parity of N.
    let sign = if odd { -1.0 } else { 1.0 };
    let d = |x: f64| -> (f64, f64) {
        let (p, dp) = product_with_derivative(&points, Complex64::new(x, 0.0));
        let (q, dq) = product_with_derivative(&points, Complex64::new(-x, 0.0));
        (0.5 * (p.re + sign * q.re), 0.5 * (dp.re - sign * dq.re))
    };
    // C(u) = D(√u) (even N) or D(√u)/√u (odd N)
    let c = |u: f64| -> (f64, f64) {
        let x = u.sqrt();
        let (v, dv) = d(x);
        if odd {
            (v / x, (dv * x - v) / (x * x) / (2.0 * x))
        } else {
            (v, dv / (2.0 * x))
        }
    };
    let s = n / 2;
    let mut lambdas = Vec::with_capacity(s);
    for k in (n - s..n).rev() {
        let lo = if k == 0 { 0.0 } else { nu[k - 1].max(0.0) };
        let hi = nu[k];
        let u = poly::bracketed_root(c, lo * lo, hi * hi)?;
        lambdas.push(u.sqrt());
    }
    let (weights, w0, discrepancy) = residue_weights(&points, Complex64::new(l, 0.0), &lambdas, odd)?;
    finish(lambdas, weights, w0, l, Kind::Hermitian, discrepancy)
}

/// Inverse of [`eig_nonhermitian`]: `l = Im Σ z`; the unperturbed polynomial is
/// the real part of `Π (x − z_k)` on the real line, whose parity part is rooted
/// in `u = x²`.
pub fn reconstruct_nonhermitian(config: &ComplexConfig) -> Result<Reconstruction> {
    let points = config.points();
    let n = points.len();
    let odd = n % 2 == 1;
    let l = config.sum().im;
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &p in &points {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (j, &c) in coeffs.iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * p;
        }
        coeffs = next;
    }
    let start = usize::from(odd);
    let cu: Vec<f64> = coeffs.iter().skip(start).step_by(2).map(|c| c.re).collect();
    let mut us: Vec<f64> = Vec::with_capacity(cu.len() - 1);
    for r in poly::roots(&cu)? {
        if r.re <= 0.0 || r.im.abs() > 1e-6 * (1.0 + r.re.abs()) {
            bail!(Inconsistent, "unperturbed spectrum has a non-positive square {r}");
        }
        us.push(r.re);
    }
    let d = |x: f64| -> (f64, f64) {
        let (p, dp) = product_with_derivative(&points, Complex64::new(x, 0.0));
        (p.re, dp.re)
    };
    let mut lambdas: Vec<f64> = us
        .into_iter()
        .map(|u| {
            let mut x = u.sqrt();
            for _ in 0..3 {
                let (v, dv) = d(x);
                if dv != 0.0 {
                    let next = x - v / dv;
                    if (d(next).0).abs() < v.abs() {
                        x = next;
                    }
                }
            }
            x
        })
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    if lambdas.windows(2).any(|w| !(w[0] > w[1])) {
        bail!(InvalidConfiguration, "unperturbed spectrum has a repeated point");
    }
    let (weights, w0, discrepancy) = residue_weights(&points, Complex64::new(0.0, l), &lambdas, odd)?;
    finish(lambdas, weights, w0, l, Kind::AntiHermitian, discrepancy)
}

fn finish(
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    w0: Option<f64>,
    l: f64,
    kind: Kind,
    residue_discrepancy: f64,
) -> Result<Reconstruction> {
    let total = weights.iter().sum::<f64>() + w0.unwrap_or(0.0);
    if (total - 1.0).abs() > 1e-6 {
        bail!(Inconsistent, "recovered weights sum to {total}");
    }
    let measure = SpectralMeasure::new(
        lambdas,
        weights.iter().map(|w| w / total).collect(),
        w0.map(|w| w / total),
    )?;
    let j = reconstruct_jacobi(&measure)?;
    Ok(Reconstruction {
        matrix: perturb(j, l, kind)?,
        measure,
        residue_discrepancy,
    })
}
