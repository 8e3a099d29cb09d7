//! Verification suites. Each check reproduces one acceptance criterion
//! (`C1`..`C9`) and reports what it measured.

use std::time::Instant;

use anyhow::{anyhow, Result};
use chiral_core::densities::{self, DensityParams, LMode};
use chiral_core::eig::{self, ComplexConfig, HermitianConfig};
use chiral_core::jacobians::{self, JacobianCase};
use chiral_core::models::{perturb, sample_chiral_jacobi, AnyDense, Direction, EnsembleParams, Kind};
use chiral_core::random::{sample_chi_coupling, RngStream};
use chiral_core::stats::{self, QuadOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub const REDUCTION_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-5;
pub const HERMITIAN_TRACE_TOL: f64 = 1e-10;
pub const PAIRING_TOL: f64 = 1e-9;
pub const ANTI_HERMITIAN_TRACE_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-7;
pub const ZERO_TOL: f64 = crate::sampling::ZERO_TOL;
/// Monte Carlo means must land within this many standard errors.
pub const MC_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Equivalence,
    Jacobian,
    Normalization,
    Roundtrip,
    Location,
    Densities,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub seed: u64,
    /// Monte Carlo sample size of the statistical checks.
    pub reps: usize,
    /// Random points per case of the Jacobian check.
    pub trials: usize,
    /// Realizations per parameter point of the dense-model checks.
    pub seeds_per_case: usize,
    pub round_trip_samples: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: 1,
            reps: 100_000,
            trials: 100,
            seeds_per_case: 100,
            round_trip_samples: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub criterion: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Statistical checks can fail by chance; the others cannot.
    pub statistical: bool,
    /// Wall time; left out of the JSON so that reports are reproducible.
    #[serde(skip)]
    pub seconds: f64,
    /// The measured quantity against its threshold, in one line.
    pub summary: String,
    pub detail: Value,
}

fn run_check(
    criterion: &'static str,
    name: &'static str,
    statistical: bool,
    f: impl FnOnce() -> Result<(bool, String, Value)>,
) -> Check {
    let start = Instant::now();
    let (passed, statistical, summary, detail) = match f() {
        Ok((p, summary, d)) => (p, statistical, summary, d),
        Err(e) => (false, false, format!("error: {e:#}"), json!({ "error": format!("{e:#}") })),
    };
    Check {
        criterion,
        name,
        passed,
        statistical,
        seconds: start.elapsed().as_secs_f64(),
        summary,
        detail,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: u64,
    pub version: &'static str,
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    /// A single chance failure among at least 20 statistical checks is
    /// tolerated with a warning.
    pub fn new(suite: Suite, seed: u64, checks: Vec<Check>) -> Self {
        let hard_fail = checks.iter().any(|c| !c.passed && !c.statistical);
        let stats_total = checks.iter().filter(|c| c.statistical).count();
        let stats_failed = checks.iter().filter(|c| c.statistical && !c.passed).count();
        let mut warnings = Vec::new();
        let tolerated = stats_failed == 0 || (stats_total >= 20 && stats_failed == 1);
        if stats_failed == 1 && tolerated {
            warnings.push("one statistical check failed; rerun with another seed".to_string());
        }
        Self {
            schema: crate::io::SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            suite,
            seed,
            passed: !hard_fail && tolerated,
            warnings,
            checks,
        }
    }

    /// 0 on pass, 1 on a hard failure, 2 on statistical failures only.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else if self.checks.iter().any(|c| !c.passed && !c.statistical) {
            1
        } else {
            2
        }
    }
}

pub fn run(suite: Suite, o: &Options) -> Report {
    let checks = match suite {
        Suite::Equivalence => vec![reduction(o), largest_eigenvalue_law(o), zero_multiplicities(o)],
        Suite::Jacobian => vec![jacobian(o, &jacobians::full_grid(&[1, 2, 3]))],
        Suite::Normalization => vec![normalization()],
        Suite::Roundtrip => vec![round_trip(o)],
        Suite::Location => vec![locations(o)],
        Suite::Densities => vec![spectral_law(o), hermitian_law(o), nonhermitian_law(o)],
        Suite::All => vec![
            reduction(o),
            largest_eigenvalue_law(o),
            spectral_law(o),
            normalization(),
            jacobian(o, &jacobians::full_grid(&[1, 2, 3])),
            locations(o),
            round_trip(o),
            hermitian_law(o),
            nonhermitian_law(o),
            zero_multiplicities(o),
        ],
    };
    Report::new(suite, o.seed, checks)
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Hermitian => "herm",
        Kind::AntiHermitian => "antiherm",
    }
}

const KINDS: [Kind; 2] = [Kind::Hermitian, Kind::AntiHermitian];

/// Same realization pushed through the dense matrix and through
/// bidiagonalization, permutation and perturbation.
pub fn reduction(o: &Options) -> Check {
    run_check("C1", "dense and Jacobi spectra of one realization agree", false, || {
        let mut cases = Vec::new();
        for beta in [1.0, 2.0, 4.0] {
            for (m, n) in [(2, 3), (3, 2), (1, 3), (2, 2)] {
                for kind in KINDS {
                    cases.push((EnsembleParams::new(beta, m, n)?, kind));
                }
            }
        }
        let k = o.seeds_per_case;
        let worst: Vec<f64> = (0..cases.len() * k)
            .into_par_iter()
            .map(|job| {
                let (p, kind) = cases[job / k];
                let mut rng = RngStream::new(o.seed, job as u64);
                let l = rng.uniform(0.5, 2.0);
                let d = AnyDense::sample(&p, Some((kind, l)), Direction::Haar, &mut rng)?;
                Ok(d.reduction_check()?.max_discrepancy)
            })
            .collect::<Result<_>>()?;
        let per_case: Vec<Value> = cases
            .iter()
            .enumerate()
            .map(|(c, (p, kind))| {
                let max = worst[c * k..(c + 1) * k].iter().copied().fold(0.0, f64::max);
                json!({ "beta": p.beta(), "m": p.m(), "n": p.n(), "kind": kind_name(*kind), "max_discrepancy": max })
            })
            .collect();
        let max = worst.iter().copied().fold(0.0, f64::max);
        Ok((
            max < REDUCTION_TOL,
            format!("max eigenvalue discrepancy {max:.2e} < {REDUCTION_TOL:e} over {} realizations", worst.len()),
            json!({ "tolerance": REDUCTION_TOL, "realizations": worst.len(), "max_discrepancy": max, "cases": per_case }),
        ))
    })
}

/// Largest eigenvalue of the dense model against the tridiagonal sampler.
pub fn largest_eigenvalue_law(o: &Options) -> Check {
    run_check("C2", "largest eigenvalue: dense model vs tridiagonal model", true, || {
        let p = EnsembleParams::new(2.0, 2, 3)?;
        let l = 1.0;
        let dense: Vec<f64> = (0..o.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, i as u64);
                let d = AnyDense::sample(&p, Some((Kind::Hermitian, l)), Direction::Haar, &mut rng)?;
                Ok(d.eigenvalues()?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
            })
            .collect::<Result<_>>()?;
        let jacobi: Vec<f64> = (0..o.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, (o.reps + i) as u64);
                let j = sample_chiral_jacobi(&p, &mut rng)?;
                let e = eig::eig_hermitian(&perturb(j, l, Kind::Hermitian)?)?;
                Ok(e.config.z().iter().copied().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect::<Result<_>>()?;
        let ks = stats::ks_two_sample(&dense, &jacobi)?;
        Ok((ks.passes(), ks_summary("two-sample KS", &ks), ks_json(&ks, &[dense.len(), jacobi.len()])))
    })
}

fn ks_summary(what: &str, ks: &stats::KsResult) -> String {
    format!("{what} D = {:.5} vs {:.5} (p = {:.3})", ks.statistic, ks.threshold(), ks.p_value())
}

fn ks_json(ks: &stats::KsResult, sizes: &[usize]) -> Value {
    json!({
        "statistic": ks.statistic,
        "threshold": ks.threshold(),
        "p_value": ks.p_value(),
        "sizes": sizes,
    })
}

/// Spectral measure of the unperturbed matrix: `λ` for `m = n = 1` and the
/// mean of `w₀` for `m = 2, n = 1`.
pub fn spectral_law(o: &Options) -> Check {
    run_check("C3", "spectral measure law", true, || {
        let p = EnsembleParams::new(2.0, 1, 1)?;
        let lambdas: Vec<f64> = (0..o.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, i as u64);
                Ok(eig::spectral_measure(&sample_chiral_jacobi(&p, &mut rng)?)?.lambdas()[0])
            })
            .collect::<Result<_>>()?;
        let ks = stats::ks_one_sample(&lambdas, |x| 1.0 - (-x * x / 2.0).exp())?;

        let q = EnsembleParams::new(2.0, 2, 1)?;
        let w0: Vec<f64> = (0..o.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, (o.reps + i) as u64);
                eig::spectral_measure(&sample_chiral_jacobi(&q, &mut rng)?)?
                    .w0()
                    .ok_or_else(|| anyhow!("odd-dimensional measure without an atom at 0"))
            })
            .collect::<Result<_>>()?;
        let (mean, se) = stats::mean_and_se(&w0);
        let b = q.beta();
        let expected = (b * (q.m() - q.n()) as f64 / 2.0) / (b * q.m() as f64 / 2.0);
        let mean_ok = (mean - expected).abs() < MC_SIGMAS * se;
        Ok((
            ks.passes() && mean_ok,
            format!(
                "{}; mean w0 = {mean:.5} vs {expected} ± {MC_SIGMAS}·{se:.1e}",
                ks_summary("lambda KS", &ks)
            ),
            json!({
                "lambda_ks": ks_json(&ks, &[lambdas.len()]),
                "w0": { "mean": mean, "standard_error": se, "expected": expected, "sigmas": MC_SIGMAS, "passed": mean_ok },
            }),
        ))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NormEntry {
    pub density: String,
    pub value: f64,
    pub passed: bool,
    #[serde(skip)]
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Quadrature error estimates up to this are accepted even when the
/// adaptive rule ran out of intervals.
const QUAD_ERROR_CAP: f64 = 1e-2 * NORMALIZATION_TOL;

fn quad(dim: usize, limits: &stats::Limits<'_>, log_f: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        max_intervals: 2000,
    };
    match stats::integrate_nested(dim, limits, log_f, &opts) {
        Ok(r) => Ok(r.value),
        Err(chiral_core::Error::Accuracy { estimate, error }) if error <= QUAD_ERROR_CAP => Ok(estimate),
        Err(e) => Err(e.into()),
    }
}

fn or_nan(v: chiral_core::Result<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Spectral density over the orthant (as `s!` times the ordered region) and
/// the simplex. Only one free weight fits in three dimensions; it is written
/// `w = sin²θ`, which removes the `w^(β/2-1)` endpoint singularities.
fn spectral_mass(p: EnsembleParams) -> Result<f64> {
    let s = p.s();
    let free_weights = if p.is_odd() { s } else { s - 1 };
    let dim = s + free_weights;
    if dim == 0 || dim > 3 || free_weights > 1 {
        return Err(anyhow!("spectral integral with s = {s} is out of range"));
    }
    let limits = move |k: usize, x: &[f64]| -> (f64, f64) {
        match k {
            0 => (0.0, f64::INFINITY),
            k if k < s => (0.0, x[k - 1]),
            _ => (0.0, std::f64::consts::FRAC_PI_2),
        }
    };
    let ln_order = factorial(s).ln();
    let log_f = move |x: &[f64]| -> f64 {
        let lam = &x[..s];
        let (w, jac) = match x.get(s) {
            Some(&t) => (t.sin().powi(2), (2.0 * t).sin().ln()),
            None => (1.0, 0.0),
        };
        let (weights, w0) = match (p.is_odd(), free_weights) {
            (true, _) => (vec![w], Some(1.0 - w)),
            (false, 0) => (vec![1.0], None),
            (false, _) => (vec![w, 1.0 - w], None),
        };
        or_nan(densities::spectral_logdensity(&p, lam, &weights, w0)) + ln_order + jac
    };
    quad(dim, &limits, &log_f)
}

/// Hermitian eigenvalue density over the alternating cone, or over the slice
/// `Σ z = l` when `fixed` is given. Supports `N ≤ 3`.
fn hermitian_mass(p: EnsembleParams, fixed: Option<f64>) -> Result<f64> {
    let n = p.dim();
    let dp = DensityParams::new(p, fixed.map_or(LMode::ChiRandom, LMode::Fixed))?;
    match (n, fixed) {
        (2, Some(l)) => quad(1, &|_, _| (l, f64::INFINITY), &|x| {
            or_nan(densities::hermitian_logdensity(&[x[0], l - x[0]], &dp))
        }),
        (3, Some(l)) => quad(
            2,
            &|k, x| if k == 0 { (l, f64::INFINITY) } else { (-x[0], l - x[0]) },
            &|x| or_nan(densities::hermitian_logdensity(&[x[0], x[1], l - x[0] - x[1]], &dp)),
        ),
        (2, None) => quad(
            2,
            &|k, x| if k == 0 { (0.0, f64::INFINITY) } else { (-x[0], 0.0) },
            &|x| or_nan(densities::hermitian_logdensity(x, &dp)),
        ),
        (3, None) => quad(
            3,
            &|k, x| match k {
                0 => (0.0, f64::INFINITY),
                1 => (-x[0], 0.0),
                _ => (0.0, -x[1]),
            },
            &|x| or_nan(densities::hermitian_logdensity(x, &dp)),
        ),
        _ => Err(anyhow!("N = {n} is out of range")),
    }
}

/// Masses of the strata of the non-Hermitian density, largest `L` first
/// (`X_{2,0}, X_{0,1}` for `N = 2`; `X_{3,0}, X_{1,1}` for `N = 3`). Ordered
/// regions are multiplied by `L!`, and pairs are integrated over `x > 0` and
/// doubled.
fn nonhermitian_masses(p: EnsembleParams, fixed: Option<f64>) -> Result<Vec<f64>> {
    let n = p.dim();
    let dp = DensityParams::new(p, fixed.map_or(LMode::ChiRandom, LMode::Fixed))?;
    let dens = |imag: Vec<f64>, pairs: Vec<(f64, f64)>| -> f64 {
        match ComplexConfig::new(imag, pairs) {
            Ok(c) => or_nan(densities::nonhermitian_logdensity(&c, &dp)),
            Err(_) => f64::NAN,
        }
    };
    let inf = f64::INFINITY;
    let (ln2, ln6) = (2f64.ln(), 6f64.ln());
    Ok(match (n, fixed) {
        (2, None) => vec![
            quad(2, &|k, x| if k == 0 { (0.0, inf) } else { (0.0, x[0]) }, &|x| {
                dens(vec![x[0], x[1]], vec![]) + ln2
            })?,
            quad(2, &|_, _| (0.0, inf), &|x| dens(vec![], vec![(x[0], x[1])]) + ln2)?,
        ],
        (3, None) => vec![
            quad(
                3,
                &|k, x| if k == 0 { (0.0, inf) } else { (0.0, x[k - 1]) },
                &|x| dens(vec![x[0], x[1], x[2]], vec![]) + ln6,
            )?,
            quad(3, &|_, _| (0.0, inf), &|x| dens(vec![x[0]], vec![(x[1], x[2])]) + ln2)?,
        ],
        (2, Some(l)) => vec![
            quad(1, &|_, _| (l / 2.0, l), &|x| dens(vec![x[0], l - x[0]], vec![]) + ln2)?,
            quad(1, &|_, _| (0.0, inf), &|x| dens(vec![], vec![(x[0], l / 2.0)]) + ln2)?,
        ],
        (3, Some(l)) => vec![
            // y₁ > y₂ > y₃ = l − y₁ − y₂
            quad(
                2,
                &|k, x| if k == 0 { (l / 3.0, l) } else { ((l - x[0]) / 2.0, x[0].min(l - x[0])) },
                &|x| dens(vec![x[0], x[1], l - x[0] - x[1]], vec![]) + ln6,
            )?,
            quad(
                2,
                &|k, _| if k == 0 { (0.0, inf) } else { (0.0, l / 2.0) },
                &|x| dens(vec![l - 2.0 * x[1]], vec![(x[0], x[1])]) + ln2,
            )?,
        ],
        _ => return Err(anyhow!("N = {n} is out of range")),
    })
}

enum Integral {
    Spectral(f64, usize, usize),
    HermitianFixed(f64, usize, usize, f64),
    HermitianChi(f64, usize, usize),
    NonHermitianChi(f64, usize, usize),
    NonHermitianFixed(f64, usize, usize, f64),
}

impl Integral {
    fn label(&self) -> String {
        match *self {
            Integral::Spectral(b, m, n) => format!("spectral beta={b} m={m} n={n}"),
            Integral::HermitianFixed(b, m, n, l) => format!("hermitian fixed l={l} beta={b} m={m} n={n}"),
            Integral::HermitianChi(b, m, n) => format!("hermitian chi-l beta={b} m={m} n={n}"),
            Integral::NonHermitianChi(b, m, n) => format!("non-hermitian chi-l beta={b} m={m} n={n}"),
            Integral::NonHermitianFixed(b, m, n, l) => format!("non-hermitian fixed l={l} beta={b} m={m} n={n}"),
        }
    }

    fn value(&self) -> Result<f64> {
        match *self {
            Integral::Spectral(b, m, n) => spectral_mass(EnsembleParams::new(b, m, n)?),
            Integral::HermitianFixed(b, m, n, l) => hermitian_mass(EnsembleParams::new(b, m, n)?, Some(l)),
            Integral::HermitianChi(b, m, n) => hermitian_mass(EnsembleParams::new(b, m, n)?, None),
            Integral::NonHermitianChi(b, m, n) => {
                Ok(nonhermitian_masses(EnsembleParams::new(b, m, n)?, None)?.iter().sum())
            }
            Integral::NonHermitianFixed(b, m, n, l) => {
                Ok(nonhermitian_masses(EnsembleParams::new(b, m, n)?, Some(l))?.iter().sum())
            }
        }
    }
}

fn normalization_grid() -> Vec<Integral> {
    use Integral::*;
    let mut g = Vec::new();
    for b in [1.0, 2.0, 4.0] {
        for (m, n) in [(1, 1), (1, 2), (2, 2), (2, 1)] {
            g.push(Spectral(b, m, n));
        }
    }
    g.push(Spectral(4.0, 3, 1));
    for l in [0.5, 1.0, 2.0] {
        g.push(HermitianFixed(2.0, 1, 1, l));
    }
    for (b, m, n) in [(1.0, 1, 1), (4.0, 1, 1), (2.0, 1, 2), (2.0, 2, 1), (1.0, 2, 1)] {
        g.push(HermitianFixed(b, m, n, 1.0));
    }
    for (b, m, n) in [(2.0, 1, 1), (1.0, 1, 1), (4.0, 1, 1), (2.0, 1, 2), (2.0, 2, 1)] {
        g.push(HermitianChi(b, m, n));
    }
    for (b, m, n) in [(2.0, 1, 1), (1.0, 1, 1), (4.0, 1, 1), (2.0, 2, 1)] {
        g.push(NonHermitianChi(b, m, n));
    }
    for (b, m, n) in [(2.0, 1, 1), (1.0, 1, 1), (2.0, 2, 1)] {
        g.push(NonHermitianFixed(b, m, n, 1.0));
    }
    g
}

/// Total mass of every closed-form density on the grid, by quadrature.
pub fn normalization_table() -> Vec<NormEntry> {
    normalization_grid()
        .par_iter()
        .map(|i| {
            let start = Instant::now();
            let (value, error) = match i.value() {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(format!("{e:#}"))),
            };
            NormEntry {
                density: i.label(),
                value,
                passed: (value - 1.0).abs() < NORMALIZATION_TOL,
                seconds: start.elapsed().as_secs_f64(),
                error,
            }
        })
        .collect()
}

pub fn normalization() -> Check {
    run_check("C4", "closed-form densities integrate to one", false, || {
        let table = normalization_table();
        let passed = table.iter().all(|e| e.passed);
        let worst = table.iter().map(|e| (e.value - 1.0).abs()).fold(0.0, f64::max);
        Ok((
            passed,
            format!("{} integrals, max |mass − 1| = {worst:.2e} < {NORMALIZATION_TOL:e}", table.len()),
            json!({ "tolerance": NORMALIZATION_TOL, "max_error": worst, "integrals": table }),
        ))
    })
}

pub fn jacobian(o: &Options, grid: &[JacobianCase]) -> Check {
    run_check("C5", "Jacobians: closed form vs finite differences", false, || {
        let r = jacobians::verify_jacobians(grid, o.trials, o.seed)?;
        let cases: Vec<Value> = r
            .cases
            .iter()
            .map(|c| {
                json!({
                    "parity": format!("{:?}", c.case.parity).to_lowercase(),
                    "s": c.case.s,
                    "kind": kind_name(c.case.kind),
                    "trials": c.trials,
                    "rejected": c.rejected,
                    "max_rel_error": c.max_rel_error,
                })
            })
            .collect();
        Ok((
            r.passes(jacobians::REL_ERROR_THRESHOLD),
            format!(
                "{} cases, max relative error {:.2e} < {:e}",
                r.cases.len(),
                r.max_rel_error(),
                jacobians::REL_ERROR_THRESHOLD
            ),
            json!({ "threshold": jacobians::REL_ERROR_THRESHOLD, "max_rel_error": r.max_rel_error(), "cases": cases }),
        ))
    })
}

fn location_grid() -> Vec<(EnsembleParams, f64)> {
    let mut g = Vec::new();
    for beta in [0.5, 1.0, 2.0, 4.0] {
        for (m, n) in [(1, 1), (2, 3), (3, 2), (4, 4), (5, 2), (1, 4)] {
            for l in [0.3, 1.0, 3.0] {
                g.push((EnsembleParams::new(beta, m, n).expect("valid grid"), l));
            }
        }
    }
    g
}

#[derive(Debug, Default, Clone, Copy, Serialize)]
struct Violations {
    samples: usize,
    order: usize,
    trace: usize,
    half_plane: usize,
    pairing: usize,
    /// Rounding-level ties repaired by the eigensolver (not violations).
    ties_resolved: usize,
    max_trace_error: f64,
    max_pairing_error: f64,
}

impl Violations {
    fn merge(mut self, o: Self) -> Self {
        self.samples += o.samples;
        self.order += o.order;
        self.trace += o.trace;
        self.half_plane += o.half_plane;
        self.pairing += o.pairing;
        self.ties_resolved += o.ties_resolved;
        self.max_trace_error = self.max_trace_error.max(o.max_trace_error);
        self.max_pairing_error = self.max_pairing_error.max(o.max_pairing_error);
        self
    }

    fn total(&self) -> usize {
        self.order + self.trace + self.half_plane + self.pairing
    }
}

/// `a < b`, false when either is NaN.
fn below(a: f64, b: f64) -> bool {
    a < b
}

fn locate(p: &EnsembleParams, l: f64, kind: Kind, rng: &mut RngStream) -> Result<Violations> {
    let pj = perturb(sample_chiral_jacobi(p, rng)?, l, kind)?;
    let mut v = Violations {
        samples: 1,
        ..Violations::default()
    };
    match kind {
        Kind::Hermitian => match eig::eig_hermitian(&pj) {
            Ok(e) => {
                let err = (e.config.trace() - l).abs();
                v.max_trace_error = err;
                v.trace = usize::from(!below(err, HERMITIAN_TRACE_TOL));
                v.order = usize::from(HermitianConfig::new(e.config.z().to_vec()).is_err());
                v.ties_resolved = e.ties_resolved;
            }
            Err(_) => v.order = 1,
        },
        Kind::AntiHermitian => match eig::eig_nonhermitian(&pj) {
            Ok(e) => {
                v.half_plane = usize::from(e.raw.iter().any(|z| !below(0.0, z.im)));
                v.max_pairing_error = e.pairing_error;
                v.pairing = usize::from(!below(e.pairing_error, PAIRING_TOL));
                v.max_trace_error = e.trace_error;
                v.trace = usize::from(!below(e.trace_error, ANTI_HERMITIAN_TRACE_TOL));
            }
            Err(_) => v.pairing = 1,
        },
    }
    Ok(v)
}

/// Where the eigenvalues of sampled perturbed matrices lie.
pub fn locations(o: &Options) -> Check {
    run_check("C6", "eigenvalue locations of sampled matrices", false, || {
        let grid = location_grid();
        let per_point = o.reps.div_ceil(grid.len());
        let mut detail = serde_json::Map::new();
        let mut passed = true;
        let mut summary = Vec::new();
        for (offset, kind) in KINDS.into_iter().enumerate() {
            let v = (0..grid.len() * per_point)
                .into_par_iter()
                .map(|job| {
                    let (p, l) = grid[job / per_point];
                    let stream = (offset * grid.len() * per_point + job) as u64;
                    locate(&p, l, kind, &mut RngStream::new(o.seed, stream))
                })
                .try_reduce(Violations::default, |a, b| Ok(a.merge(b)))?;
            passed &= v.total() == 0;
            summary.push(format!("{}: {} violations in {} samples", kind_name(kind), v.total(), v.samples));
            detail.insert(kind_name(kind).to_string(), serde_json::to_value(v)?);
        }
        Ok((passed, summary.join("; "), Value::Object(detail)))
    })
}

/// matrix → eigenvalues → matrix on random small problems of both kinds.
pub fn round_trip(o: &Options) -> Check {
    run_check("C6", "matrix to eigenvalues to matrix round trip", false, || {
        let errors: Vec<f64> = (0..o.round_trip_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, i as u64);
                let beta = [0.5, 1.0, 2.0, 4.0][(rng.uniform_open() * 4.0) as usize % 4];
                let m = 1 + (rng.uniform_open() * 6.0) as usize % 6;
                let n = 1 + (rng.uniform_open() * 6.0) as usize % 6;
                let l = rng.uniform(0.3, 3.0);
                let kind = KINDS[i % 2];
                let p = EnsembleParams::new(beta, m, n)?;
                let pj = perturb(sample_chiral_jacobi(&p, &mut rng)?, l, kind)?;
                let back = match kind {
                    Kind::Hermitian => eig::reconstruct_hermitian(&eig::eig_hermitian(&pj)?.config)?,
                    Kind::AntiHermitian => eig::reconstruct_nonhermitian(&eig::eig_nonhermitian(&pj)?.config)?,
                };
                let a = pj.base().a();
                let b = back.matrix.base().a();
                if a.len() != b.len() {
                    return Ok(f64::INFINITY);
                }
                let entries = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                Ok(entries.max((pj.l() - back.matrix.l()).abs()))
            })
            .collect::<Result<_>>()?;
        let max = errors.iter().copied().fold(0.0, f64::max);
        Ok((
            max < ROUND_TRIP_TOL,
            format!("max round-trip error {max:.2e} < {ROUND_TRIP_TOL:e} over {} samples", errors.len()),
            json!({ "samples": errors.len(), "max_entry_error": max, "tolerance": ROUND_TRIP_TOL }),
        ))
    })
}

/// KS of the top eigenvalue `z₁` for `β = 2, m = n = 1`, at `l = 1` and with
/// random `l`, against the closed-form densities normalized by quadrature.
pub fn hermitian_law(o: &Options) -> Check {
    run_check("C7", "Hermitian eigenvalue law", true, || {
        let p = EnsembleParams::new(2.0, 1, 1)?;
        let l = 1.0;
        let opts = QuadOptions::default();
        let top = |offset: usize, fixed: Option<f64>| -> Result<Vec<f64>> {
            (0..o.reps)
                .into_par_iter()
                .map(|i| {
                    let mut rng = RngStream::new(o.seed, (offset + i) as u64);
                    let j = sample_chiral_jacobi(&p, &mut rng)?;
                    let l = match fixed {
                        Some(l) => l,
                        None => sample_chi_coupling(p.beta(), p.m(), &mut rng)?,
                    };
                    Ok(eig::eig_hermitian(&perturb(j, l, Kind::Hermitian)?)?.config.z()[0])
                })
                .collect()
        };

        let mut fixed = top(2 * o.reps, Some(l))?;
        fixed.sort_by(f64::total_cmp);
        let dp = DensityParams::new(p, LMode::Fixed(l))?;
        let f = |z: f64| or_nan(densities::hermitian_logdensity(&[z, l - z], &dp)).exp();
        let (cdf, mass_fixed) = stats::tabulate_cdf(&fixed, l, f64::INFINITY, f, &opts)?;
        let ks_fixed = stats::ks_from_cdf_values(&cdf)?;

        let mut chi = top(3 * o.reps, None)?;
        chi.sort_by(f64::total_cmp);
        let dp = DensityParams::new(p, LMode::ChiRandom)?;
        let marginal = |z: f64| {
            stats::integrate(
                |w| or_nan(densities::hermitian_logdensity(&[z, w], &dp)).exp(),
                -z,
                0.0,
                &opts,
            )
            .map_or(f64::NAN, |r| r.value)
        };
        let (cdf, mass_chi) = stats::tabulate_cdf(&chi, 0.0, f64::INFINITY, marginal, &opts)?;
        let ks_chi = stats::ks_from_cdf_values(&cdf)?;
        Ok((
            ks_fixed.passes() && ks_chi.passes(),
            format!("{}; {}", ks_summary("fixed l KS", &ks_fixed), ks_summary("chi l KS", &ks_chi)),
            json!({
                "fixed_l": { "l": l, "density_mass": mass_fixed, "ks": ks_json(&ks_fixed, &[fixed.len()]) },
                "chi_l": { "density_mass": mass_chi, "ks": ks_json(&ks_chi, &[chi.len()]) },
            }),
        ))
    })
}

/// `β = 2, m = n = 1, l = 1`: frequency of the mirror-pair configuration and,
/// given two axis points, the law of the upper one.
pub fn nonhermitian_law(o: &Options) -> Check {
    run_check("C8", "non-Hermitian eigenvalue law", true, || {
        let p = EnsembleParams::new(2.0, 1, 1)?;
        let l = 1.0;
        let configs: Vec<ComplexConfig> = (0..o.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(o.seed, i as u64);
                let j = sample_chiral_jacobi(&p, &mut rng)?;
                Ok(eig::eig_nonhermitian(&perturb(j, l, Kind::AntiHermitian)?)?.config)
            })
            .collect::<Result<_>>()?;
        let n = configs.len() as f64;
        let pairs = configs.iter().filter(|c| c.m_count() == 1).count() as f64;
        let expected = (-1.0f64 / 8.0).exp();
        let freq = pairs / n;
        let se = (expected * (1.0 - expected) / n).sqrt();
        let freq_ok = (freq - expected).abs() < MC_SIGMAS * se;
        let masses = nonhermitian_masses(p, Some(l))?;

        let mut upper: Vec<f64> = configs.iter().filter(|c| c.l_count() == 2).map(|c| c.imag()[0]).collect();
        upper.sort_by(f64::total_cmp);
        let dp = DensityParams::new(p, LMode::Fixed(l))?;
        let f = |y: f64| match ComplexConfig::new(vec![y, l - y], vec![]) {
            Ok(c) => or_nan(densities::nonhermitian_logdensity(&c, &dp)).exp(),
            Err(_) => 0.0,
        };
        let (ks, upper_summary, passed_ks) = if upper.is_empty() {
            (Value::Null, "no two-point configurations".to_string(), false)
        } else {
            let (cdf, _) = stats::tabulate_cdf(&upper, l / 2.0, l, f, &QuadOptions::default())?;
            let ks = stats::ks_from_cdf_values(&cdf)?;
            (ks_json(&ks, &[upper.len()]), ks_summary("upper point KS", &ks), ks.passes())
        };
        Ok((
            freq_ok && passed_ks,
            format!(
                "pair frequency {freq:.5} vs {expected:.5} ± {MC_SIGMAS}·{se:.1e}; {}",
                upper_summary
            ),
            json!({
                "pair_frequency": freq,
                "expected": expected,
                "standard_error": se,
                "sigmas": MC_SIGMAS,
                "quadrature_pair_mass": masses[1],
                "quadrature_axis_mass": masses[0],
                "upper_point_ks": ks,
            }),
        ))
    })
}

/// Zero eigenvalues of the dense model beyond those of the Jacobi matrix.
pub fn zero_multiplicities(o: &Options) -> Check {
    run_check("C9", "extra zero eigenvalues of the dense model", false, || {
        let mut cases = Vec::new();
        for (m, n) in [(3, 1), (1, 3)] {
            for beta in [1.0, 2.0, 4.0] {
                for kind in KINDS {
                    cases.push((EnsembleParams::new(beta, m, n)?, kind));
                }
            }
        }
        let k = o.seeds_per_case;
        let found: Vec<isize> = (0..cases.len() * k)
            .into_par_iter()
            .map(|job| {
                let (p, kind) = cases[job / k];
                let mut rng = RngStream::new(o.seed, job as u64);
                let l = rng.uniform(0.5, 2.0);
                let r = AnyDense::sample(&p, Some((kind, l)), Direction::Haar, &mut rng)?.reduction_check()?;
                Ok(r.extra_zeros(ZERO_TOL, p.stripped_zeros()))
            })
            .collect::<Result<_>>()?;
        let mut passed = true;
        let mut mismatches = 0;
        let per_case: Vec<Value> = cases
            .iter()
            .enumerate()
            .map(|(c, (p, kind))| {
                let expected = if p.m() > p.n() { p.m() - p.n() - 1 } else { p.n() - p.m() } as isize;
                let wrong = found[c * k..(c + 1) * k].iter().filter(|&&z| z != expected).count();
                passed &= wrong == 0;
                mismatches += wrong;
                json!({ "beta": p.beta(), "m": p.m(), "n": p.n(), "kind": kind_name(*kind), "expected": expected, "mismatches": wrong })
            })
            .collect();
        Ok((
            passed,
            format!("{mismatches} zero-count mismatches in {} realizations", found.len()),
            json!({ "tolerance": ZERO_TOL, "seeds_per_case": k, "cases": per_case }),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Options {
        Options {
            seed: 5,
            reps: 2000,
            trials: 10,
            seeds_per_case: 3,
            round_trip_samples: 50,
        }
    }

    #[test]
    fn deterministic_checks_pass_at_small_scale() {
        let o = small();
        for c in [reduction(&o), zero_multiplicities(&o), locations(&o), round_trip(&o)] {
            assert!(c.passed, "{} {}", c.criterion, c.detail);
        }
    }

    #[test]
    fn report_policy() {
        let check = |passed, statistical| Check {
            criterion: "C0",
            name: "x",
            passed,
            statistical,
            seconds: 0.0,
            summary: String::new(),
            detail: Value::Null,
        };
        let r = Report::new(Suite::All, 1, vec![check(true, false), check(false, true)]);
        assert_eq!(r.exit_code(), 2);
        let r = Report::new(Suite::All, 1, vec![check(false, false), check(false, true)]);
        assert_eq!(r.exit_code(), 1);
        let mut many: Vec<Check> = (0..20).map(|_| check(true, true)).collect();
        many[3].passed = false;
        let r = Report::new(Suite::All, 1, many);
        assert!(r.passed && r.warnings.len() == 1);
    }
}
