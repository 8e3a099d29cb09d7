//! Jacobians of the change of variables from spectral data `(λ, w)` to the free
//! coefficients of the characteristic polynomial of the perturbed Jacobi
//! matrix, in closed form and by central finite differences.
//!
//! Free coefficients: `κ₀..κ_{2m−2}` for `N = 2m` (as functions of
//! `λ₁..λ_m, w₁..w_{m−1}`) and `κ₀..κ_{2n−1}` for `N = 2n + 1` (as functions of
//! `λ₁..λ_n, w₁..w_n`). With an anti-Hermitian coupling the coefficients carrying
//! `c = i·l` are imaginary and their imaginary parts are used.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::densities::coeffs_from_spectral;
use crate::error::{bail, Result};
use crate::linalg;
use crate::models::Kind;
use crate::random::{sample_dirichlet, RngStream};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const REL_ERROR_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// `N = 2m`.
    Even,
    /// `N = 2n + 1`.
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianResult {
    pub closed_form: f64,
    pub finite_diff: f64,
    pub rel_error: f64,
}

fn check_lambdas(lambdas: &[f64], l: f64) -> Result<()> {
    if lambdas.is_empty() {
        bail!(InvalidParameter, "need at least one support point");
    }
    if !(l > 0.0) || lambdas.iter().any(|&x| !(x > 0.0)) {
        bail!(InvalidParameter, "support points and l must be positive");
    }
    for (j, &a) in lambdas.iter().enumerate() {
        if lambdas[j + 1..].contains(&a) {
            bail!(DegenerateInput, "coincident support points {a}");
        }
    }
    Ok(())
}

/// `ln |J|`: even `2^m l^{m−1} Π λ_j Π_{j<k} |λ_j² − λ_k²|²`, odd
/// `2^n l^n Π λ_j³ Π_{j<k} |λ_j² − λ_k²|²`. The modulus does not depend on `kind`.
pub fn jacobian_closed_form(lambdas: &[f64], l: f64, parity: Parity, _kind: Kind) -> Result<f64> {
    check_lambdas(lambdas, l)?;
    let s = lambdas.len() as f64;
    let (l_pow, lam_pow) = match parity {
        Parity::Even => (s - 1.0, 1.0),
        Parity::Odd => (s, 3.0),
    };
    let mut out = s * core::f64::consts::LN_2 + l_pow * l.ln();
    for (j, &a) in lambdas.iter().enumerate() {
        out += lam_pow * a.ln();
        for &b in &lambdas[j + 1..] {
            out += 2.0 * (a * a - b * b).abs().ln();
        }
    }
    Ok(out)
}

/// Free coefficients as a function of `(λ₁..λ_s, free weights)`.
fn coefficient_map(vars: &[f64], s: usize, l: f64, parity: Parity, kind: Kind) -> Result<Vec<f64>> {
    let lambdas = &vars[..s];
    let free = &vars[s..];
    let rest = 1.0 - free.iter().sum::<f64>();
    let (weights, w0, count) = match parity {
        Parity::Even => {
            let mut w = free.to_vec();
            w.push(rest);
            (w, None, 2 * s - 1)
        }
        Parity::Odd => (free.to_vec(), Some(rest), 2 * s),
    };
    let kappa = coeffs_from_spectral(lambdas, &weights, w0, l, kind)?.kappa;
    let odd_n = parity == Parity::Odd;
    Ok((0..count)
        .map(|k| {
            // coefficients of the parity of N do not involve the coupling
            let coupled = (k % 2 == 1) != odd_n;
            if coupled && kind == Kind::AntiHermitian {
                kappa[k].im
            } else {
                kappa[k].re
            }
        })
        .collect())
}

fn free_variables(lambdas: &[f64], weights: &[f64], parity: Parity) -> Result<Vec<f64>> {
    if weights.len() != lambdas.len() {
        bail!(InvalidParameter, "need one weight per support point");
    }
    let mut vars = lambdas.to_vec();
    match parity {
        Parity::Even => vars.extend_from_slice(&weights[..weights.len() - 1]),
        Parity::Odd => vars.extend_from_slice(weights),
    }
    Ok(vars)
}

fn partials(vars: &[f64], s: usize, l: f64, parity: Parity, kind: Kind, step: f64) -> Result<Vec<f64>> {
    let d = vars.len();
    let mut jac = vec![0.0; d * d];
    for c in 0..d {
        let mut plus = vars.to_vec();
        let mut minus = vars.to_vec();
        plus[c] += step;
        minus[c] -= step;
        let fp = coefficient_map(&plus, s, l, parity, kind)?;
        let fm = coefficient_map(&minus, s, l, parity, kind)?;
        for r in 0..d {
            jac[r * d + c] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    Ok(jac)
}

fn log_det(d: usize, jac: &[f64]) -> Result<f64> {
    match linalg::log_abs_det(d, jac) {
        Some((v, _)) if v.is_finite() => Ok(v),
        _ => bail!(DegenerateInput, "singular matrix of partial derivatives"),
    }
}

/// `ln |det ∂κ/∂(λ, w)|` by central differences. `weights` has one entry per
/// support point; for odd `N` the remaining mass is `w₀`.
pub fn jacobian_finite_difference(
    lambdas: &[f64],
    weights: &[f64],
    l: f64,
    parity: Parity,
    kind: Kind,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        bail!(InvalidParameter, "step must be positive");
    }
    let vars = free_variables(lambdas, weights, parity)?;
    let jac = partials(&vars, lambdas.len(), l, parity, kind, step)?;
    log_det(vars.len(), &jac)
}

/// As [`jacobian_finite_difference`] with Richardson extrapolation of every
/// partial from steps `h` and `h/2`.
pub fn jacobian_finite_difference_richardson(
    lambdas: &[f64],
    weights: &[f64],
    l: f64,
    parity: Parity,
    kind: Kind,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        bail!(InvalidParameter, "step must be positive");
    }
    let vars = free_variables(lambdas, weights, parity)?;
    let coarse = partials(&vars, lambdas.len(), l, parity, kind, step)?;
    let fine = partials(&vars, lambdas.len(), l, parity, kind, 0.5 * step)?;
    let jac: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    log_det(vars.len(), &jac)
}

pub fn compare(
    lambdas: &[f64],
    weights: &[f64],
    l: f64,
    parity: Parity,
    kind: Kind,
    step: f64,
) -> Result<JacobianResult> {
    let closed_form = jacobian_closed_form(lambdas, l, parity, kind)?;
    let finite_diff = jacobian_finite_difference(lambdas, weights, l, parity, kind, step)?;
    Ok(JacobianResult {
        closed_form,
        finite_diff,
        rel_error: ((closed_form - finite_diff).exp() - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JacobianCase {
    pub parity: Parity,
    pub s: usize,
    pub kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseReport {
    pub case: JacobianCase,
    pub trials: usize,
    pub rejected: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    pub cases: Vec<CaseReport>,
}

impl JacobianReport {
    pub fn max_rel_error(&self) -> f64 {
        self.cases.iter().map(|c| c.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, threshold: f64) -> bool {
        self.cases.iter().all(|c| c.max_rel_error < threshold && c.trials > c.rejected)
    }
}

/// Every parity × `s` × kind combination.
pub fn full_grid(s_values: &[usize]) -> Vec<JacobianCase> {
    let mut out = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        for &s in s_values {
            for kind in [Kind::Hermitian, Kind::AntiHermitian] {
                out.push(JacobianCase { parity, s, kind });
            }
        }
    }
    out
}

/// Random interior points: `λ` uniform on `[0.5, 3]` (sorted), weights
/// Dirichlet(1, …, 1) over all atoms, `l` uniform on `[0.5, 2]`. Case `i`
/// draws from stream `i` of `seed`. Degenerate points are counted as rejected.
pub fn verify_jacobians(grid: &[JacobianCase], trials: usize, seed: u64) -> Result<JacobianReport> {
    let mut cases = Vec::with_capacity(grid.len());
    for (i, &case) in grid.iter().enumerate() {
        if case.s == 0 {
            bail!(InvalidParameter, "s must be at least 1");
        }
        let mut rng = RngStream::new(seed, i as u64);
        let mut report = CaseReport {
            case,
            trials,
            rejected: 0,
            max_rel_error: 0.0,
        };
        for _ in 0..trials {
            let mut lambdas: Vec<f64> = (0..case.s).map(|_| rng.uniform(0.5, 3.0)).collect();
            lambdas.sort_by(|a, b| b.total_cmp(a));
            let atoms = case.s + usize::from(case.parity == Parity::Odd);
            let w = sample_dirichlet(1.0, atoms, &mut rng)?;
            let weights = &w[..case.s];
            let l = rng.uniform(0.5, 2.0);
            match compare(&lambdas, weights, l, case.parity, case.kind, DEFAULT_STEP) {
                Ok(r) => report.max_rel_error = report.max_rel_error.max(r.rel_error),
                Err(crate::Error::DegenerateInput(_)) => report.rejected += 1,
                Err(e) => return Err(e),
            }
        }
        cases.push(report);
    }
    Ok(JacobianReport { cases })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a / b - 1.0).abs()
    }

    #[test]
    fn closed_form_values() {
        let h = Kind::Hermitian;
        assert!(rel(jacobian_closed_form(&[3.0], 0.7, Parity::Even, h).unwrap().exp(), 6.0) < 1e-15);
        assert!(rel(jacobian_closed_form(&[2.0], 1.5, Parity::Odd, h).unwrap().exp(), 24.0) < 1e-14);
        assert!(rel(jacobian_closed_form(&[1.0, 2.0], 1.0, Parity::Even, h).unwrap().exp(), 72.0) < 1e-14);
        assert!(matches!(
            jacobian_closed_form(&[1.0, 1.0], 1.0, Parity::Even, h),
            Err(crate::Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn kinds_agree_exactly() {
        for parity in [Parity::Even, Parity::Odd] {
            let a = jacobian_closed_form(&[2.5, 1.1, 0.4], 0.8, parity, Kind::Hermitian).unwrap();
            let b = jacobian_closed_form(&[2.5, 1.1, 0.4], 0.8, parity, Kind::AntiHermitian).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn finite_differences_small_cases() {
        let v = jacobian_finite_difference(&[3.0], &[1.0], 2.0, Parity::Even, Kind::Hermitian, 1e-5).unwrap();
        assert!(rel(v.exp(), 6.0) < 1e-8);
        let v = jacobian_finite_difference(&[1.0, 2.0], &[0.3, 0.7], 1.0, Parity::Even, Kind::Hermitian, 1e-5).unwrap();
        assert!(rel(v.exp(), 72.0) < 1e-6);
        let v = jacobian_finite_difference(&[2.0], &[0.7], 1.5, Parity::Odd, Kind::AntiHermitian, 1e-5).unwrap();
        assert!(rel(v.exp(), 24.0) < 1e-6);
        let v = jacobian_finite_difference_richardson(&[1.0, 2.0], &[0.3, 0.7], 1.0, Parity::Even, Kind::AntiHermitian, 1e-3)
            .unwrap();
        assert!(rel(v.exp(), 72.0) < 1e-8);
    }

    #[test]
    fn scaling_law() {
        // λ → cλ, l → cl multiplies the even Jacobian by c^{m + 2m(m−1) + (m−1)}
        let lam = [2.2, 1.3, 0.6];
        let m = lam.len() as i32;
        let c = 2.0f64;
        let scaled: Vec<f64> = lam.iter().map(|x| c * x).collect();
        let a = jacobian_closed_form(&lam, 0.9, Parity::Even, Kind::Hermitian).unwrap();
        let b = jacobian_closed_form(&scaled, c * 0.9, Parity::Even, Kind::Hermitian).unwrap();
        let e = m + 2 * m * (m - 1) + (m - 1);
        assert!((b - a - e as f64 * c.ln()).abs() < 1e-12);
        let fd = jacobian_finite_difference(&scaled, &[0.2, 0.5, 0.3], c * 0.9, Parity::Even, Kind::Hermitian, 1e-5).unwrap();
        assert!((fd - b).abs() < 1e-6);
    }

    #[test]
    fn verifier_over_full_grid() {
        let r = verify_jacobians(&full_grid(&[1, 2, 3]), 100, 7).unwrap();
        assert_eq!(r.cases.len(), 12);
        assert!(r.passes(REL_ERROR_THRESHOLD), "{r:?}");
    }
}
