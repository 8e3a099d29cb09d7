//! Closed-form joint densities (in log space) of spectral data and of the
//! eigenvalues of the perturbed Jacobi matrices, with their normalization
//! constants, and the map from spectral data to characteristic polynomials.
//!
//! Reference measures:
//!
//! * spectral data: `dλ₁⋯dλ_s` with the `λ_j` *unlabelled* (the density is
//!   symmetric and integrates to 1 over the whole orthant) times Lebesgue
//!   measure on the free weights (`w₁..w_{s−1}` for even `N`, `w₁..w_s` for odd
//!   `N`, where `w₀` is determined);
//! * Hermitian coupling, fixed `l`: `dz₁⋯dz_{N−1}` on the slice `Σ z = l` of the
//!   sign-alternating cone; with random `l`: `dz₁⋯dz_N` on the cone;
//! * anti-Hermitian coupling: on the stratum with `L` axis points and `M`
//!   pairs, `Π dy_j` over the axis points times `Π dx_j dy_j` over the pairs with
//!   `x_j` ranging over all of ℝ (`x` and `−x` describe the same pair) and the
//!   labels unordered. For a fixed `l` one coordinate is dropped: an axis
//!   coordinate if `L ≥ 1`, otherwise the height of a pair.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::lgamma;
use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::eig::{CharPoly, ComplexConfig};
use crate::error::{bail, Result};
use crate::models::{EnsembleParams, Kind};
use crate::poly;

/// `|Σ z − l|` above this puts a fixed-`l` configuration off the slice.
pub const TRACE_TOL: f64 = 1e-9;

const LN2: f64 = core::f64::consts::LN_2;

fn ln_factorial(k: usize) -> f64 {
    lgamma(k as f64 + 1.0)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        bail!(Domain, "beta must be positive, got {beta}");
    }
    Ok(())
}

/// `ln h_{β,s,a}`.
pub fn log_h(beta: f64, s: usize, a: f64) -> Result<f64> {
    check_beta(beta)?;
    if s == 0 {
        bail!(Domain, "s must be at least 1");
    }
    if !(beta * a / 2.0 > -1.0) {
        bail!(Domain, "need beta·a/2 > −1, got beta = {beta}, a = {a}");
    }
    let sf = s as f64;
    let mut out = sf * (a * beta / 2.0 + 1.0 + (sf - 1.0) * beta / 2.0) * LN2;
    for j in 1..=s {
        let jf = j as f64;
        out += lgamma(1.0 + beta * jf / 2.0) + lgamma(1.0 + beta * a / 2.0 + beta * (jf - 1.0) / 2.0)
            - lgamma(1.0 + beta / 2.0);
    }
    Ok(out)
}

/// `ln Z_{β,m,a}`.
pub fn log_z(beta: f64, m: usize, a: f64) -> Result<f64> {
    let mf = m as f64;
    Ok(mf * (beta - 2.0) / 2.0 * LN2 + log_h(beta, m, a)? + mf * lgamma(beta / 2.0)
        - ln_factorial(m)
        - lgamma(beta * mf / 2.0))
}

/// `ln W_{β,m,n,a}`, defined for `m ≥ n + 1`.
pub fn log_w(beta: f64, m: usize, n: usize, a: f64) -> Result<f64> {
    if m <= n {
        bail!(Domain, "W needs m ≥ n + 1, got m = {m}, n = {n}");
    }
    let (mf, nf) = (m as f64, n as f64);
    Ok((2.0 * nf + 1.0) * (beta - 2.0) / 4.0 * LN2
        + log_h(beta, n, a)?
        + nf * lgamma(beta / 2.0)
        + lgamma(beta * (mf - nf) / 2.0)
        - ln_factorial(n)
        - lgamma(beta * mf / 2.0))
}

/// `ln Z̃_{β,m,a}`.
pub fn log_z_tilde(beta: f64, m: usize, a: f64) -> Result<f64> {
    let mf = m as f64;
    Ok((mf * beta - mf - 1.0) * LN2
        + log_h(beta, m, a)?
        + lgamma(beta * mf / 4.0)
        + mf * lgamma(beta / 2.0)
        - ln_factorial(m)
        - lgamma(beta * mf / 2.0))
}

/// `ln W̃_{β,m,n,a}`, defined for `m ≥ n + 1`.
pub fn log_w_tilde(beta: f64, m: usize, n: usize, a: f64) -> Result<f64> {
    if m <= n {
        bail!(Domain, "W̃ needs m ≥ n + 1, got m = {m}, n = {n}");
    }
    let (mf, nf) = (m as f64, n as f64);
    Ok(((2.0 * nf + 1.0) * (beta - 2.0) / 4.0 + beta * mf / 2.0 - 1.0) * LN2
        + log_h(beta, n, a)?
        + lgamma(beta * mf / 4.0)
        + nf * lgamma(beta / 2.0)
        + lgamma(beta * (mf - nf) / 2.0)
        - ln_factorial(n)
        - lgamma(beta * mf / 2.0))
}

/// Log density of `l ~ √2·χ_{βm/2}`.
pub fn log_chi_coupling(l: f64, beta: f64, m: usize) -> f64 {
    if !(l > 0.0) {
        return f64::NEG_INFINITY;
    }
    let k = beta * m as f64 / 2.0;
    (k - 1.0) * l.ln() - l * l / 4.0 - (k - 1.0) * LN2 - lgamma(beta * m as f64 / 4.0)
}

/// How the coupling `l` is chosen.
#[derive(Clone)]
pub enum LMode {
    Fixed(f64),
    /// `l ~ √2·χ_{βm/2}`.
    ChiRandom,
    /// Log of a density `F` of `l` on `(0, ∞)`.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LMode::Fixed(l) => write!(f, "Fixed({l})"),
            LMode::ChiRandom => write!(f, "ChiRandom"),
            LMode::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityParams {
    pub params: EnsembleParams,
    pub l_mode: LMode,
}

impl DensityParams {
    pub fn new(params: EnsembleParams, l_mode: LMode) -> Result<Self> {
        if let LMode::Fixed(l) = l_mode {
            if !(l > 0.0 && l.is_finite()) {
                bail!(InvalidParameter, "fixed l must be positive, got {l}");
            }
        }
        Ok(Self { params, l_mode })
    }

    fn log_f(&self, l: f64) -> f64 {
        match &self.l_mode {
            LMode::Fixed(_) => 0.0,
            LMode::ChiRandom => log_chi_coupling(l, self.params.beta(), self.params.m()),
            LMode::Custom(f) => f(l),
        }
    }
}

/// Exponent of `|z_j|` in the eigenvalue densities.
fn modulus_exponent(p: &EnsembleParams) -> f64 {
    let b = p.beta();
    if p.is_odd() {
        (2.0 * b * p.m() as f64 - 2.0 * b * p.n() as f64 - b - 2.0) / 4.0
    } else {
        (2.0 * b * p.a() - b + 2.0) / 4.0
    }
}

/// `ln Z` (even `N`) or `ln W` (odd `N`).
fn log_const(p: &EnsembleParams) -> Result<f64> {
    if p.is_odd() {
        log_w(p.beta(), p.m(), p.n(), p.a())
    } else {
        log_z(p.beta(), p.m(), p.a())
    }
}

fn log_const_tilde(p: &EnsembleParams) -> Result<f64> {
    if p.is_odd() {
        log_w_tilde(p.beta(), p.m(), p.n(), p.a())
    } else {
        log_z_tilde(p.beta(), p.m(), p.a())
    }
}

/// Joint density of the spectral data of the unperturbed Jacobi matrix.
/// `w0` must be given exactly when `N` is odd.
pub fn spectral_logdensity(
    params: &EnsembleParams,
    lambdas: &[f64],
    weights: &[f64],
    w0: Option<f64>,
) -> Result<f64> {
    let s = params.s();
    if lambdas.len() != s || weights.len() != s {
        bail!(InvalidParameter, "expected {s} support points and weights");
    }
    if w0.is_some() != params.is_odd() {
        bail!(InvalidParameter, "w0 is present exactly for odd N");
    }
    let total: f64 = weights.iter().sum::<f64>() + w0.unwrap_or(0.0);
    if lambdas.iter().any(|&l| !(l > 0.0))
        || weights.iter().chain(w0.as_ref()).any(|&w| !(w > 0.0))
        || (total - 1.0).abs() > 1e-12
    {
        return Ok(f64::NEG_INFINITY);
    }
    let b = params.beta();
    let a = params.a();
    let mf = params.m() as f64;
    let mut out = s as f64 * LN2 - log_h(b, s, a)?;
    for (j, &l) in lambdas.iter().enumerate() {
        out += (b * a + 1.0) * l.ln() - l * l / 2.0;
        for &k in &lambdas[j + 1..] {
            let d = (k * k - l * l).abs();
            if d == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            out += b * d.ln();
        }
    }
    out += lgamma(b * mf / 2.0) - s as f64 * lgamma(b / 2.0);
    out += weights.iter().map(|w| (b / 2.0 - 1.0) * w.ln()).sum::<f64>();
    if let Some(w0) = w0 {
        let e = b * (mf - s as f64) / 2.0;
        out += (e - 1.0) * w0.ln() - lgamma(e);
    }
    Ok(out)
}

fn is_alternating(z: &[f64]) -> bool {
    z.iter().enumerate().all(|(j, &v)| v != 0.0 && (v > 0.0) == (j % 2 == 0))
        && z.windows(2).all(|w| w[0].abs() > w[1].abs())
}

/// `Σ e·ln|z_j| − z_j²/4 + Σ_{j<k} ln|z_j − z_k| + (β−2)/4 · Σ_{j,k} ln|z_j + z_k|`.
fn hermitian_kernel(p: &EnsembleParams, z: &[f64]) -> f64 {
    let e = modulus_exponent(p);
    let mut out = 0.0;
    for (j, &x) in z.iter().enumerate() {
        out += e * x.abs().ln() - x * x / 4.0;
        for &y in &z[j + 1..] {
            out += (x - y).abs().ln();
        }
    }
    let b = p.beta();
    if b != 2.0 {
        let c = (b - 2.0) / 4.0;
        for &x in z {
            for &y in z {
                out += c * (x + y).abs().ln();
            }
        }
    }
    out
}

/// Joint eigenvalue density of `J + l e₁e₁ᵀ`. The points may come in any
/// order; anything off the sign-alternating cone (or, for fixed `l`, off the
/// slice `Σ z = l`) has density 0.
pub fn hermitian_logdensity(z: &[f64], dp: &DensityParams) -> Result<f64> {
    let p = &dp.params;
    if z.len() != p.dim() {
        bail!(InvalidParameter, "expected {} points, got {}", p.dim(), z.len());
    }
    let mut z = z.to_vec();
    z.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    if !is_alternating(&z) {
        return Ok(f64::NEG_INFINITY);
    }
    let trace: f64 = z.iter().sum();
    let kernel = hermitian_kernel(p, &z);
    let fixed = |l: f64| -> Result<f64> {
        let mf = p.m() as f64;
        Ok(-log_const(p)? + (1.0 - mf * p.beta() / 2.0) * l.ln() + l * l / 4.0 + kernel)
    };
    match &dp.l_mode {
        LMode::Fixed(l) => {
            if (trace - l).abs() > TRACE_TOL {
                return Ok(f64::NEG_INFINITY);
            }
            fixed(*l)
        }
        LMode::ChiRandom => Ok(-log_const_tilde(p)? + kernel),
        LMode::Custom(_) => Ok(dp.log_f(trace) + fixed(trace)?),
    }
}

/// Joint eigenvalue density of `J + i l e₁e₁ᵀ` on the stratum of `config`.
pub fn nonhermitian_logdensity(config: &ComplexConfig, dp: &DensityParams) -> Result<f64> {
    let p = &dp.params;
    if config.dim() != p.dim() {
        bail!(InvalidParameter, "expected {} points, got {}", p.dim(), config.dim());
    }
    let z = config.points();
    let sum = config.sum();
    let l = sum.norm();
    let e = modulus_exponent(p);
    let b = p.beta();
    let mut kernel = 0.0;
    for (j, &x) in z.iter().enumerate() {
        kernel += e * x.norm().ln() - (x * x).re / 4.0;
        for &y in &z[j + 1..] {
            kernel += (x - y).norm().ln();
        }
    }
    if b != 2.0 {
        let c = (b - 2.0) / 4.0;
        for &x in &z {
            for &y in &z {
                kernel += c * (x - y.conj()).norm().ln();
            }
        }
    }
    let mf = p.m() as f64;
    let mut out = -log_const(p)? + (1.0 - mf * b / 2.0) * l.ln() - l * l / 4.0 + kernel
        - ln_factorial(config.l_count())
        - ln_factorial(config.m_count());
    match &dp.l_mode {
        LMode::Fixed(l0) => {
            if (sum - Complex64::new(0.0, *l0)).norm() > TRACE_TOL {
                return Ok(f64::NEG_INFINITY);
            }
            if config.l_count() == 0 {
                out -= LN2;
            }
        }
        _ => out += dp.log_f(l),
    }
    Ok(out)
}

/// [`nonhermitian_logdensity`] for raw points; density 0 unless the points
/// form a configuration (mirror symmetric within `tol`, in the upper half plane).
pub fn nonhermitian_logdensity_points(points: &[Complex64], dp: &DensityParams, tol: f64) -> Result<f64> {
    match ComplexConfig::from_points(points, tol) {
        Ok(c) if c.dim() == dp.params.dim() => nonhermitian_logdensity(&c, dp),
        Ok(c) => bail!(InvalidParameter, "expected {} points, got {}", dp.params.dim(), c.dim()),
        Err(_) => Ok(f64::NEG_INFINITY),
    }
}

/// Characteristic polynomial of `J + c e₁e₁ᵀ` (`c = l` or `i·l`) from the
/// spectral data of `J`: in `u = z²`, the part of parity `N` is
/// `Π (u − λ_j²)` and the other part is `−c Σ_j w_j Π_{k≠j} (u − λ_k²)`, the
/// sum including `j = 0` with `λ₀ = 0` when `N` is odd.
pub fn coeffs_from_spectral(
    lambdas: &[f64],
    weights: &[f64],
    w0: Option<f64>,
    l: f64,
    kind: Kind,
) -> Result<CharPoly> {
    if lambdas.is_empty() || lambdas.len() != weights.len() {
        bail!(InvalidParameter, "need as many weights as support points");
    }
    let c = kind.coupling(l);
    let squares: Vec<f64> = lambdas.iter().map(|x| x * x).collect();
    let mut atoms: Vec<(f64, f64)> = squares.iter().copied().zip(weights.iter().copied()).collect();
    if let Some(w0) = w0 {
        atoms.insert(0, (0.0, w0));
    }
    let even = poly::from_roots(&squares);
    let mut odd = vec![0.0; atoms.len()];
    for (j, &(_, w)) in atoms.iter().enumerate() {
        let others: Vec<f64> = atoms.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, a)| a.0).collect();
        for (o, v) in odd.iter_mut().zip(poly::from_roots(&others)) {
            *o += w * v;
        }
    }
    let n = 2 * lambdas.len() + usize::from(w0.is_some());
    let mut kappa = vec![Complex64::new(0.0, 0.0); n + 1];
    let shift = usize::from(w0.is_some());
    for (j, &v) in even.iter().enumerate() {
        kappa[2 * j + shift] = Complex64::new(v, 0.0);
    }
    for (j, &v) in odd.iter().enumerate() {
        kappa[2 * j + 1 - shift] = -c * v;
    }
    Ok(CharPoly { kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::{self, reconstruct_jacobi, SpectralMeasure};
    use crate::models::{perturb, sample_chiral_jacobi};
    use crate::random::{sample_chi, RngStream};
    use proptest::prelude::*;

    fn params(beta: f64, m: usize, n: usize) -> EnsembleParams {
        EnsembleParams::new(beta, m, n).unwrap()
    }

    #[test]
    fn constants_at_simple_points() {
        assert!((log_h(2.0, 1, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((log_z(2.0, 1, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(log_h(1.0, 1, -2.5).is_err());
        assert!(log_w(2.0, 1, 1, 0.0).is_err());
    }

    #[test]
    fn spectral_density_point_value() {
        let p = params(2.0, 1, 1);
        let v = spectral_logdensity(&p, &[1.0], &[1.0], None).unwrap();
        assert!((v.exp() - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(spectral_logdensity(&p, &[1.0], &[0.9], None).unwrap(), f64::NEG_INFINITY);
        assert_eq!(spectral_logdensity(&p, &[-1.0], &[1.0], None).unwrap(), f64::NEG_INFINITY);
        assert!(spectral_logdensity(&p, &[1.0], &[0.5], Some(0.5)).is_err());
    }

    #[test]
    fn fixed_l_hermitian_point_value() {
        // m = 1, β = 2, l = 1, z = (2, −1): ½·e^{1/4}·e^{−5/4}·|2 − (−1)| = 1.5/e
        let dp = DensityParams::new(params(2.0, 1, 1), LMode::Fixed(1.0)).unwrap();
        let v = hermitian_logdensity(&[2.0, -1.0], &dp).unwrap();
        assert!((v.exp() - 1.5 / core::f64::consts::E).abs() < 1e-14);
        assert_eq!(hermitian_logdensity(&[2.0, -1.1], &dp).unwrap(), f64::NEG_INFINITY);
        assert_eq!(hermitian_logdensity(&[2.0, -1.0], &dp).unwrap(), hermitian_logdensity(&[-1.0, 2.0], &dp).unwrap());
        assert_eq!(hermitian_logdensity(&[0.5, 0.5], &dp).unwrap(), f64::NEG_INFINITY);
        assert!(hermitian_logdensity(&[2.0, -1.0, 0.1], &dp).is_err());
    }

    #[test]
    fn coefficients_small_cases() {
        let k = coeffs_from_spectral(&[1.3], &[1.0], None, 0.7, Kind::Hermitian).unwrap();
        assert_eq!(k.kappa[0].re, -1.3 * 1.3);
        assert!((k.kappa[1].re + 0.7).abs() < 1e-15);
        assert_eq!(k.kappa[2].re, 1.0);

        // N = 3: κ₀ = l·w₀·λ₁²
        let (lam, w1, w0, l) = (1.4, 0.35, 0.65, 0.9);
        let k = coeffs_from_spectral(&[lam], &[w1], Some(w0), l, Kind::Hermitian).unwrap();
        assert!((k.kappa[0].re - l * w0 * lam * lam).abs() < 1e-14);
        let sm = SpectralMeasure::new(vec![lam], vec![w1], Some(w0)).unwrap();
        let pj = perturb(reconstruct_jacobi(&sm).unwrap(), l, Kind::Hermitian).unwrap();
        let direct = eig::char_poly(&pj);
        for (a, b) in k.kappa.iter().zip(&direct.kappa) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficients_match_determinant() {
        let mut rng = RngStream::new(4, 0);
        for (m, n) in [(4, 4), (5, 3), (2, 6), (3, 2)] {
            for kind in [Kind::Hermitian, Kind::AntiHermitian] {
                let j = sample_chiral_jacobi(&params(2.0, m, n), &mut rng).unwrap();
                let l = 0.3 + sample_chi(2.0, &mut rng).unwrap();
                let sm = eig::spectral_measure(&j).unwrap();
                let k = coeffs_from_spectral(sm.lambdas(), sm.weights(), sm.w0(), l, kind).unwrap();
                let direct = eig::char_poly(&perturb(j, l, kind).unwrap());
                let scale = direct.kappa.iter().fold(1.0f64, |s, c| s.max(c.norm()));
                for (a, b) in k.kappa.iter().zip(&direct.kappa) {
                    assert!((a - b).norm() < 1e-9 * scale, "{m} {n} {kind:?}: {a} vs {b}");
                }
            }
        }
    }

    fn alternating(raw: &[f64]) -> Vec<f64> {
        // decreasing moduli with alternating signs
        let mut mods: Vec<f64> = raw.to_vec();
        mods.sort_by(|a, b| b.total_cmp(a));
        mods.iter().enumerate().map(|(j, &x)| if j % 2 == 0 { x } else { -x }).collect()
    }

    proptest! {
        #[test]
        fn chi_mode_is_coupling_times_fixed(
            raw in prop::collection::vec(0.05..4.0f64, 2..6),
            beta in prop::sample::select(vec![1.0, 2.0, 4.0, 0.7]),
            extra in 0usize..3,
        ) {
            let z = alternating(&raw);
            prop_assume!(is_alternating(&z));
            let big = z.len();
            let p = if big % 2 == 0 { params(beta, big / 2, big / 2 + extra) } else { params(beta, big / 2 + 1 + extra, big / 2) };
            let l: f64 = z.iter().sum();
            let chi = hermitian_logdensity(&z, &DensityParams::new(p, LMode::ChiRandom).unwrap()).unwrap();
            let fixed = hermitian_logdensity(&z, &DensityParams::new(p, LMode::Fixed(l)).unwrap()).unwrap();
            prop_assert!((chi - (fixed + log_chi_coupling(l, beta, p.m()))).abs() < 1e-9 * (1.0 + chi.abs()));
            let custom = LMode::Custom(Arc::new(move |t| log_chi_coupling(t, beta, p.m())));
            let c = hermitian_logdensity(&z, &DensityParams::new(p, custom).unwrap()).unwrap();
            prop_assert!((c - chi).abs() < 1e-9 * (1.0 + chi.abs()));
        }

        #[test]
        fn densities_are_permutation_invariant(
            raw in prop::collection::vec(0.05..4.0f64, 2..6),
            seed in 0u64..1000,
        ) {
            let z = alternating(&raw);
            prop_assume!(is_alternating(&z));
            let big = z.len();
            let p = if big % 2 == 0 { params(1.0, big / 2, big / 2) } else { params(1.0, big / 2 + 1, big / 2) };
            let dp = DensityParams::new(p, LMode::ChiRandom).unwrap();
            let mut shuffled = z.clone();
            let mut rng = RngStream::new(seed, 0);
            for i in (1..shuffled.len()).rev() {
                let j = (rng.uniform_open() * (i + 1) as f64) as usize;
                shuffled.swap(i, j.min(i));
            }
            prop_assert_eq!(hermitian_logdensity(&z, &dp).unwrap(), hermitian_logdensity(&shuffled, &dp).unwrap());

            let lam: Vec<f64> = raw.iter().map(|x| x + 0.01).collect();
            let s = lam.len();
            let sp = params(1.0, s, s + 1);
            let w: Vec<f64> = (0..s).map(|k| (k + 1) as f64).collect();
            let tot: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / tot).collect();
            let a = spectral_logdensity(&sp, &lam, &w, None).unwrap();
            let mut lr = lam.clone();
            let mut wr = w.clone();
            lr.reverse();
            wr.reverse();
            let b = spectral_logdensity(&sp, &lr, &wr, None).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn nonhermitian_support_checks() {
        let dp = DensityParams::new(params(2.0, 1, 1), LMode::ChiRandom).unwrap();
        let ok = [Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.2)];
        assert!(nonhermitian_logdensity_points(&ok, &dp, 1e-9).unwrap().is_finite());
        let bad = [Complex64::new(0.5, 0.8), Complex64::new(-0.4, 0.8)];
        assert_eq!(nonhermitian_logdensity_points(&bad, &dp, 1e-9).unwrap(), f64::NEG_INFINITY);
        let below = [Complex64::new(0.0, 0.8), Complex64::new(0.0, -0.2)];
        assert_eq!(nonhermitian_logdensity_points(&below, &dp, 1e-9).unwrap(), f64::NEG_INFINITY);
    }
}
