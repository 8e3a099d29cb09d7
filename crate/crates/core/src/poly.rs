//! Polynomials with coefficients stored in ascending order (`c[k]` multiplies
//! `x^k`), and root finding for the real-coefficient case.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg;

pub const ABERTH_MAX_ITER: usize = 500;
pub const ABERTH_REL_TOL: f64 = 1e-13;

pub fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Value and derivative at `x`.
pub fn eval_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

pub fn eval_complex(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

pub fn eval_complex_coeffs(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial `Π (x − r)`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        p = mul(&p, &[-r, 1.0]);
    }
    p
}

/// Upper bound on the moduli of the roots (Fujiwara), for a nonzero leading
/// coefficient.
fn root_bound(c: &[f64]) -> f64 {
    let d = c.len() - 1;
    let lead = c[d];
    let mut b: f64 = 0.0;
    for (k, &ck) in c[..d].iter().enumerate() {
        let t = (ck / lead).abs().powf(1.0 / (d - k) as f64);
        b = b.max(if k == 0 { t * 0.5f64.powf(1.0 / d as f64) } else { t });
    }
    2.0 * b
}

/// All complex roots of a real polynomial by Aberth–Ehrlich iteration.
/// Returns an error if the iteration does not settle within
/// [`ABERTH_MAX_ITER`] sweeps.
pub fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let c = trim(c)?;
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let bound = root_bound(c);
    let scale = bound.max(1e-300);
    let center = -c[d - 1] / (d as f64 * c[d]);
    let radius = bound.max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / d as f64 + 0.4;
            Complex64::new(center, 0.0) + Complex64::from_polar(radius, t)
        })
        .collect();

    for _ in 0..ABERTH_MAX_ITER {
        let mut largest_step: f64 = 0.0;
        for k in 0..d {
            let (p, dp) = eval_complex(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                bail!(NumericalFailure, "Aberth iteration produced a non-finite step");
            }
            z[k] -= step;
            largest_step = largest_step.max(step.norm());
        }
        if largest_step <= ABERTH_REL_TOL * scale {
            return Ok(z);
        }
    }
    bail!(
        NumericalFailure,
        "Aberth iteration stagnated after {ABERTH_MAX_ITER} sweeps (degree {d})"
    )
}

/// Roots via the eigenvalues of the companion matrix.
pub fn companion_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let c = trim(c)?;
    let d = c.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut m = vec![0.0; d * d];
    for i in 1..d {
        m[i * d + i - 1] = 1.0;
    }
    for i in 0..d {
        m[i * d + d - 1] = -c[i] / c[d];
    }
    linalg::real_eigenvalues_general(d, &m)
}

/// Aberth with a companion-matrix fallback, followed by Newton polishing that
/// only accepts steps which reduce the residual.
pub fn roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let mut r = match aberth(c) {
        Ok(r) => r,
        Err(_) => companion_roots(c)?,
    };
    let c = trim(c)?;
    for z in r.iter_mut() {
        polish(c, z);
    }
    Ok(r)
}

fn polish(c: &[f64], z: &mut Complex64) {
    let mut res = eval_complex(c, *z).0.norm();
    for _ in 0..8 {
        let (p, dp) = eval_complex(c, *z);
        if dp.norm() == 0.0 || res == 0.0 {
            return;
        }
        let cand = *z - p / dp;
        let cand_res = eval_complex(c, cand).0.norm();
        if cand_res < res {
            *z = cand;
            res = cand_res;
        } else {
            return;
        }
    }
}

fn trim(c: &[f64]) -> Result<&[f64]> {
    let mut d = c.len();
    while d > 0 && c[d - 1] == 0.0 {
        d -= 1;
    }
    if d == 0 {
        bail!(InvalidParameter, "the zero polynomial has no well-defined roots");
    }
    Ok(&c[..d])
}

/// Root of `f` in `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign. `f`
/// returns the value and the derivative; Newton steps are taken when they stay
/// inside the current bracket, bisection otherwise.
pub fn bracketed_root(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        bail!(InvalidParameter, "no sign change on [{lo}, {hi}]");
    }
    let lo_sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs())
        {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
