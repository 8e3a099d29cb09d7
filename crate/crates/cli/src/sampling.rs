//! Batch sampling, eigenvalue and density runs behind the `sample`, `eig` and
//! `density eval` commands. Replication `r` always draws from stream `r`, so
//! results do not depend on the number of threads.

use anyhow::{bail, Context, Result};
use chiral_core::densities::{self, DensityParams, LMode};
use chiral_core::eig::{self, PointClass};
use chiral_core::models::{
    perturb, permute_to_jacobi, sample_chiral_jacobi, AnyDense, Direction, EnsembleParams, JacobiMatrix, Kind,
    PerturbedJacobi,
};
use chiral_core::random::{sample_chi_coupling, RngStream};
use chiral_core::Complex64;
use rayon::prelude::*;

use crate::io::{Cell, Table};

/// Dense eigenvalues below this modulus are reported as zeros.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KindArg {
    None,
    Herm,
    Antiherm,
}

impl KindArg {
    pub fn kind(self) -> Option<Kind> {
        match self {
            KindArg::None => None,
            KindArg::Herm => Some(Kind::Hermitian),
            KindArg::Antiherm => Some(Kind::AntiHermitian),
        }
    }
}

/// `--l <f64|chi>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    Fixed(f64),
    Chi,
}

impl std::str::FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("chi") {
            return Ok(Coupling::Chi);
        }
        match s.parse::<f64>() {
            Ok(l) if l > 0.0 && l.is_finite() => Ok(Coupling::Fixed(l)),
            _ => Err(format!("expected a positive number or `chi`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for Coupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coupling::Fixed(l) => write!(f, "{l}"),
            Coupling::Chi => f.write_str("chi"),
        }
    }
}

impl Coupling {
    fn draw(self, params: &EnsembleParams, rng: &mut RngStream) -> Result<f64> {
        Ok(match self {
            Coupling::Fixed(l) => l,
            Coupling::Chi => sample_chi_coupling(params.beta(), params.m(), rng)?,
        })
    }

    pub fn l_mode(self) -> LMode {
        match self {
            Coupling::Fixed(l) => LMode::Fixed(l),
            Coupling::Chi => LMode::ChiRandom,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub params: EnsembleParams,
    pub kind: Option<Kind>,
    pub coupling: Coupling,
    pub reps: usize,
    pub seed: u64,
    /// Use the dense matrix model instead of the tridiagonal sampler.
    pub dense: bool,
}

enum Draw {
    Jacobi(Vec<f64>),
    Points(Vec<(Complex64, &'static str)>),
}

fn class_name(c: PointClass) -> &'static str {
    match c {
        PointClass::Imaginary => "imag",
        PointClass::Pair => "pair",
    }
}

/// Dense spectra also carry the zeros stripped by the Jacobi reduction.
fn dense_class(z: Complex64, kind: Option<Kind>) -> &'static str {
    if z.norm() < ZERO_TOL {
        "zero"
    } else if kind == Some(Kind::Hermitian) {
        "real"
    } else if z.re.abs() <= eig::PAIRING_TOL * (1.0 + z.norm()) {
        "imag"
    } else {
        "pair"
    }
}

/// Eigenvalues of a perturbed Jacobi matrix with their classes.
pub fn spectrum(pj: &PerturbedJacobi) -> Result<Vec<(Complex64, &'static str)>> {
    Ok(match pj.kind() {
        Kind::Hermitian => eig::eig_hermitian(pj)?
            .config
            .z()
            .iter()
            .map(|&x| (Complex64::new(x, 0.0), "real"))
            .collect(),
        Kind::AntiHermitian => {
            let c = eig::eig_nonhermitian(pj)?.config;
            c.points().into_iter().zip(c.classes().into_iter().map(class_name)).collect()
        }
    })
}

fn draw_one(spec: &SampleSpec, rep: usize) -> Result<Draw> {
    let mut rng = RngStream::new(spec.seed, rep as u64);
    let p = &spec.params;
    if spec.dense {
        let coupling = match spec.kind {
            Some(k) => Some((k, spec.coupling.draw(p, &mut rng)?)),
            None => None,
        };
        let d = AnyDense::sample(p, coupling, Direction::Haar, &mut rng)?;
        return Ok(match coupling {
            None => Draw::Jacobi(permute_to_jacobi(&d.bidiagonalize()?.0).a().to_vec()),
            Some(_) => {
                let mut ev = d.eigenvalues()?;
                ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
                Draw::Points(ev.into_iter().map(|z| (z, dense_class(z, spec.kind))).collect())
            }
        });
    }
    let j = sample_chiral_jacobi(p, &mut rng)?;
    Ok(match spec.kind {
        None => Draw::Jacobi(j.a().to_vec()),
        Some(k) => {
            let l = spec.coupling.draw(p, &mut rng)?;
            Draw::Points(spectrum(&perturb(j, l, k)?)?)
        }
    })
}

/// Jacobi entries (`rep, j, a_j`) when no coupling is requested, eigenvalues
/// (`rep, idx, re, im, class`) otherwise.
pub fn sample_table(spec: &SampleSpec) -> Result<Table> {
    if spec.dense && spec.params.field().is_none() {
        bail!("dense models need beta in {{1, 2, 4}}, got {}", spec.params.beta());
    }
    let draws: Vec<Draw> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| draw_one(spec, rep).with_context(|| format!("replication {rep}")))
        .collect::<Result<_>>()?;
    let mut t = match spec.kind {
        None => Table::new(&["rep", "j", "a_j"]),
        Some(_) => Table::new(&["rep", "idx", "re", "im", "class"]),
    };
    for (rep, d) in draws.into_iter().enumerate() {
        match d {
            Draw::Jacobi(a) => {
                for (j, x) in a.into_iter().enumerate() {
                    t.push(vec![rep.into(), (j + 1).into(), x.into()]);
                }
            }
            Draw::Points(z) => {
                for (i, (z, class)) in z.into_iter().enumerate() {
                    t.push(vec![rep.into(), i.into(), z.re.into(), z.im.into(), class.into()]);
                }
            }
        }
    }
    Ok(t)
}

/// Eigenvalues of `J + c e₁e₁ᵀ` for every Jacobi matrix in a `rep, j, a_j` table.
pub fn eig_table(jacobi: &Table, kind: Kind, l: f64) -> Result<Table> {
    let a = jacobi.f64_column("a_j")?;
    let groups = jacobi.group_by("rep")?;
    let spectra: Vec<(i64, Vec<(Complex64, &'static str)>)> = groups
        .par_iter()
        .map(|(rep, rows)| {
            let j = JacobiMatrix::new(rows.iter().map(|&r| a[r]).collect())
                .with_context(|| format!("replication {rep}"))?;
            Ok((*rep, spectrum(&perturb(j, l, kind)?).with_context(|| format!("replication {rep}"))?))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["rep", "idx", "re", "im", "class"]);
    for (rep, z) in spectra {
        for (i, (z, class)) in z.into_iter().enumerate() {
            t.push(vec![Cell::Int(rep), i.into(), z.re.into(), z.im.into(), class.into()]);
        }
    }
    Ok(t)
}

/// Log density of every configuration in a `rep, idx, re, im` table.
pub fn density_table(points: &Table, dp: &DensityParams, kind: Kind) -> Result<Table> {
    let re = points.f64_column("re")?;
    let im = points.f64_column("im")?;
    let mut t = Table::new(&["rep", "logpdf"]);
    for (rep, rows) in points.group_by("rep")? {
        let v = match kind {
            Kind::Hermitian => {
                let z: Vec<f64> = rows.iter().map(|&r| re[r]).collect();
                densities::hermitian_logdensity(&z, dp)
            }
            Kind::AntiHermitian => {
                let z: Vec<Complex64> = rows.iter().map(|&r| Complex64::new(re[r], im[r])).collect();
                densities::nonhermitian_logdensity_points(&z, dp, eig::PAIRING_TOL)
            }
        }
        .with_context(|| format!("replication {rep}"))?;
        t.push(vec![Cell::Int(rep), v.into()]);
    }
    Ok(t)
}
