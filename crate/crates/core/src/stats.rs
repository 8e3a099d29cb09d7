//! Kolmogorov–Smirnov statistics and adaptive Gauss–Kronrod quadrature.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;

use crate::error::{bail, Error, Result};

/// Asymptotic Kolmogorov critical value at level 0.001: reject when
/// `√n_eff · D` exceeds it.
pub const KS_CRITICAL_999: f64 = 1.949;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// `n` for one sample, `n₁n₂/(n₁+n₂)` for two.
    pub n_eff: f64,
}

impl KsResult {
    pub fn threshold(&self) -> f64 {
        KS_CRITICAL_999 / self.n_eff.sqrt()
    }

    pub fn passes(&self) -> bool {
        self.statistic < self.threshold()
    }

    /// Asymptotic p-value.
    pub fn p_value(&self) -> f64 {
        kolmogorov_survival(self.n_eff.sqrt() * self.statistic)
    }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    // the series converges slowly below 0.2, where the survival is 1 to double precision
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let t = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        bail!(InvalidParameter, "empty sample");
    }
    if x.iter().any(|v| v.is_nan()) {
        bail!(InvalidParameter, "sample contains NaN");
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample statistic `sup |F_n − F|` against a continuous cdf. Fails if
/// the cdf leaves `[0, 1]` or decreases along the sorted sample.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let v = sorted(sample)?;
    let values: Vec<f64> = v.iter().map(|&x| cdf(x)).collect();
    ks_from_cdf_values(&values)
}

/// One-sample statistic from the cdf evaluated at the sorted sample.
pub fn ks_from_cdf_values(cdf: &[f64]) -> Result<KsResult> {
    if cdf.is_empty() {
        bail!(InvalidParameter, "empty sample");
    }
    let n = cdf.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for (i, &f) in cdf.iter().enumerate() {
        if !(0.0..=1.0).contains(&f) || f < prev - 1e-12 {
            bail!(InvalidParameter, "cdf is not monotone in [0, 1] at sample {i} (value {f})");
        }
        prev = f;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(KsResult { statistic: d, n_eff: n })
}

/// The cdf of the density `f` on `(lo, hi)`, normalized by quadrature, at
/// each point of `sorted` (ascending, inside the interval). Also returns the
/// total mass `∫_lo^hi f` before normalization.
pub fn tabulate_cdf(
    sorted: &[f64],
    lo: f64,
    hi: f64,
    f: impl Fn(f64) -> f64,
    opts: &QuadOptions,
) -> Result<(Vec<f64>, f64)> {
    if sorted.windows(2).any(|w| w[1] < w[0]) {
        bail!(InvalidParameter, "points must be sorted");
    }
    let total = integrate(&f, lo, hi, opts)?.value;
    if !(total > 0.0 && total.is_finite()) {
        bail!(InvalidParameter, "density has total mass {total}");
    }
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut prev = lo;
    for &x in sorted {
        if x < lo || x > hi {
            bail!(InvalidParameter, "point {x} outside ({lo}, {hi})");
        }
        acc += integrate(&f, prev, x, opts)?.value;
        prev = x;
        out.push((acc / total).clamp(0.0, 1.0));
    }
    Ok((out, total))
}

/// Two-sample statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsResult {
        statistic: d,
        n_eff: na * nb / (na + nb),
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_intervals: 2000,
        }
    }
}

/// Limits of variable `k` given the outer variables `x[..k]`.
pub type Limits<'a> = dyn Fn(usize, &[f64]) -> (f64, f64) + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = kronrod.abs();
    let mut vals = [(0.0, 0.0); 7];
    for (k, v) in vals.iter_mut().enumerate() {
        let dx = h * XGK[k];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kronrod += WGK[k] * (f1 + f2);
        abs += WGK[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
        *v = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (k, &(f1, f2)) in vals.iter().enumerate() {
        asc += WGK[k] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let (value, asc, abs) = (kronrod * h, asc * h.abs(), abs * h.abs());
    let mut error = ((kronrod - gauss) * h).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    Segment { a, b, value, error }
}

/// Adaptive G7K15 on a finite interval. Returns the estimate and whether the
/// tolerance was met.
fn adaptive_finite(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> (QuadResult, bool) {
    let mut segs = Vec::with_capacity(64);
    segs.push(gk15(f, a, b));
    let mut evaluations = 15;
    loop {
        let value: f64 = segs.iter().map(|s| s.value).sum();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        let result = QuadResult { value, error, evaluations };
        if value.is_finite() && error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return (result, true);
        }
        if segs.len() >= opts.max_intervals {
            return (result, false);
        }
        if !value.is_finite() {
            return (result, false);
        }
        // segments this narrow would put Kronrod nodes on the endpoints
        let splittable = |s: &Segment| s.b - s.a > 64.0 * f64::EPSILON * s.a.abs().max(s.b.abs()).max(1e-300);
        let Some((worst, _)) = segs
            .iter()
            .enumerate()
            .filter(|(_, s)| splittable(s))
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
        else {
            return (result, false);
        };
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segs.push(gk15(f, s.a, mid));
        segs.push(gk15(f, mid, s.b));
        evaluations += 30;
    }
}

fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<(QuadResult, bool)> {
    if a.is_nan() || b.is_nan() {
        bail!(InvalidParameter, "NaN integration limit");
    }
    if a > b {
        let (r, ok) = adaptive(f, b, a, opts)?;
        return Ok((QuadResult { value: -r.value, ..r }, ok));
    }
    if a == b {
        return Ok((QuadResult { value: 0.0, error: 0.0, evaluations: 0 }, true));
    }
    Ok(match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_finite(f, a, b, opts),
        // x = a + t/(1 − t)
        (true, false) => adaptive_finite(
            &mut |t| {
                let u = 1.0 - t;
                f(a + t / u) / (u * u)
            },
            0.0,
            1.0,
            opts,
        ),
        (false, true) => adaptive_finite(
            &mut |t| {
                let u = 1.0 - t;
                f(b - t / u) / (u * u)
            },
            0.0,
            1.0,
            opts,
        ),
        (false, false) => {
            let half = QuadOptions {
                abs_tol: 0.5 * opts.abs_tol,
                ..*opts
            };
            let (l, ok1) = adaptive(f, f64::NEG_INFINITY, 0.0, &half)?;
            let (r, ok2) = adaptive(f, 0.0, f64::INFINITY, &half)?;
            (
                QuadResult {
                    value: l.value + r.value,
                    error: l.error + r.error,
                    evaluations: l.evaluations + r.evaluations,
                },
                ok1 && ok2,
            )
        }
    })
}

/// `∫_a^b f`, where either limit may be infinite.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let (r, ok) = adaptive(&mut f, a, b, opts)?;
    if !ok {
        return Err(Error::Accuracy {
            estimate: r.value,
            error: r.error,
        });
    }
    Ok(r)
}

/// Iterated integral of `exp(log_f(x))` over `dim ≤ 3` variables. The limits of
/// variable `k` are `limits(k, &x[..k])`, so inner ranges may depend on outer
/// variables. Inner integrals run at a hundredth of the requested tolerance.
pub fn integrate_nested(
    dim: usize,
    limits: &Limits<'_>,
    log_f: &dyn Fn(&[f64]) -> f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(1..=3).contains(&dim) {
        bail!(InvalidParameter, "nested quadrature supports 1 to 3 variables, got {dim}");
    }
    let inner = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        rel_tol: opts.rel_tol * 1e-2,
        ..*opts
    };
    let mut converged = true;
    let mut evaluations = 0;
    let r = level(0, &mut Vec::with_capacity(dim), dim, limits, log_f, opts, &inner, &mut converged, &mut evaluations)?;
    let r = QuadResult { evaluations, ..r };
    if !converged {
        return Err(Error::Accuracy {
            estimate: r.value,
            error: r.error,
        });
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn level(
    k: usize,
    prefix: &mut Vec<f64>,
    dim: usize,
    limits: &Limits<'_>,
    log_f: &dyn Fn(&[f64]) -> f64,
    opts: &QuadOptions,
    inner: &QuadOptions,
    converged: &mut bool,
    evaluations: &mut usize,
) -> Result<QuadResult> {
    let (a, b) = limits(k, prefix);
    let mut failure: Option<Error> = None;
    let mut f = |x: f64| -> f64 {
        prefix.push(x);
        let v = if k + 1 == dim {
            *evaluations += 1;
            let lf = log_f(prefix);
            if lf == f64::NEG_INFINITY {
                0.0
            } else {
                lf.exp()
            }
        } else {
            match level(k + 1, prefix, dim, limits, log_f, inner, inner, converged, evaluations) {
                Ok(r) => r.value,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        };
        prefix.pop();
        v
    };
    let (r, ok) = adaptive(&mut f, a, b, opts)?;
    if let Some(e) = failure {
        return Err(e);
    }
    *converged &= ok;
    Ok(r)
}
