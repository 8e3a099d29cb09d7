//! Monte Carlo against closed-form densities at parameters the acceptance
//! suite does not use.

use chiral_core::densities::{self, DensityParams, LMode};
use chiral_core::eig::{self, ComplexConfig};
use chiral_core::models::{perturb, sample_chiral_jacobi, EnsembleParams, Kind};
use chiral_core::random::RngStream;
use chiral_core::stats::{self, QuadOptions};

const SAMPLES: usize = 20_000;

#[test]
fn top_hermitian_eigenvalue_beta_four() {
    let p = EnsembleParams::new(4.0, 1, 1).unwrap();
    let l = 0.7;
    let mut z1: Vec<f64> = (0..SAMPLES as u64)
        .map(|i| {
            let mut rng = RngStream::new(31, i);
            let j = sample_chiral_jacobi(&p, &mut rng).unwrap();
            eig::eig_hermitian(&perturb(j, l, Kind::Hermitian).unwrap()).unwrap().config.z()[0]
        })
        .collect();
    z1.sort_by(f64::total_cmp);
    let dp = DensityParams::new(p, LMode::Fixed(l)).unwrap();
    let f = |z: f64| densities::hermitian_logdensity(&[z, l - z], &dp).unwrap().exp();
    let (cdf, mass) = stats::tabulate_cdf(&z1, l, f64::INFINITY, f, &QuadOptions::default()).unwrap();
    assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    let ks = stats::ks_from_cdf_values(&cdf).unwrap();
    assert!(ks.passes(), "D = {} > {}", ks.statistic, ks.threshold());
}

#[test]
fn pair_frequency_beta_one() {
    let p = EnsembleParams::new(1.0, 1, 1).unwrap();
    let l = 1.3;
    let pairs = (0..SAMPLES as u64)
        .filter(|&i| {
            let mut rng = RngStream::new(32, i);
            let j = sample_chiral_jacobi(&p, &mut rng).unwrap();
            eig::eig_nonhermitian(&perturb(j, l, Kind::AntiHermitian).unwrap()).unwrap().config.m_count() == 1
        })
        .count();
    let dp = DensityParams::new(p, LMode::Fixed(l)).unwrap();
    // a pair ±x + i l/2, x ∈ ℝ
    let g = |x: f64| {
        let c = ComplexConfig::new(vec![], vec![(x, l / 2.0)]).unwrap();
        2.0 * densities::nonhermitian_logdensity(&c, &dp).unwrap().exp()
    };
    let expected = stats::integrate(g, 0.0, f64::INFINITY, &QuadOptions::default()).unwrap().value;
    let freq = pairs as f64 / SAMPLES as f64;
    let se = (expected * (1.0 - expected) / SAMPLES as f64).sqrt();
    assert!((freq - expected).abs() < 4.0 * se, "{freq} vs {expected} ± {se}");
}

#[test]
fn atom_at_zero_has_beta_mean() {
    // w₀ ~ Beta(β(m−n)/2, βn/2)
    let p = EnsembleParams::new(4.0, 3, 1).unwrap();
    let w0: Vec<f64> = (0..SAMPLES as u64)
        .map(|i| {
            let mut rng = RngStream::new(33, i);
            eig::spectral_measure(&sample_chiral_jacobi(&p, &mut rng).unwrap()).unwrap().w0().unwrap()
        })
        .collect();
    let (mean, se) = stats::mean_and_se(&w0);
    assert!((mean - 2.0 / 3.0).abs() < 4.0 * se, "{mean} ± {se}");
}
