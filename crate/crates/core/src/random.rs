//! Seeded random streams and the scalar laws the matrix models are built from.
//!
//! Every stream is a ChaCha8 generator keyed by `seed` and positioned on the
//! independent sub-stream `stream_id`. Parallel Monte Carlo gives each
//! replication its own `stream_id`, so output does not depend on the number of
//! worker threads.

use alloc::vec::Vec;

#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;
use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{bail, Result};
use crate::field::Scalar;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        self.sample(Open01)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Centered field Gaussian with `E|X|² = variance`; the variance is split
/// evenly over the `β` real components.
pub fn sample_gaussian<T: Scalar>(variance: f64, rng: &mut RngStream) -> Result<T> {
    if !(variance > 0.0 && variance.is_finite()) {
        bail!(InvalidParameter, "variance must be positive, got {variance}");
    }
    Ok(T::gaussian(variance, rng))
}

/// Gamma(shape, 1) by Marsaglia–Tsang squeeze/rejection. Shapes below one are
/// boosted: `G(a) = G(a + 1) · U^{1/a}`.
pub fn sample_gamma(shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        bail!(InvalidParameter, "gamma shape must be positive, got {shape}");
    }
    if shape < 1.0 {
        let g = marsaglia_tsang(shape + 1.0, rng);
        let u = rng.uniform_open();
        return Ok(g * u.powf(1.0 / shape));
    }
    Ok(marsaglia_tsang(shape, rng))
}

fn marsaglia_tsang(shape: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = rng.standard_normal();
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform_open();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// χ_α with density `x^{α−1} e^{−x²/2} / (2^{α/2−1} Γ(α/2))`, drawn as
/// `sqrt(2 · Gamma(α/2, 1))`. Never returns zero.
pub fn sample_chi(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        bail!(InvalidParameter, "chi parameter must be positive, got {alpha}");
    }
    loop {
        let x = (2.0 * sample_gamma(0.5 * alpha, rng)?).sqrt();
        if x > 0.0 {
            return Ok(x);
        }
    }
}

/// Coupling strength `l = √2·χ_{βm/2}`.
pub fn sample_chi_coupling(beta: f64, m: usize, rng: &mut RngStream) -> Result<f64> {
    Ok(core::f64::consts::SQRT_2 * sample_chi(beta * m as f64 / 2.0, rng)?)
}

/// Uniformly distributed unit vector in `T^dim` (normalized standard Gaussian vector).
pub fn sample_haar_unit_vector<T: Scalar>(dim: usize, rng: &mut RngStream) -> Result<Vec<T>> {
    if dim == 0 {
        bail!(InvalidParameter, "unit vector dimension must be at least 1");
    }
    loop {
        let v: Vec<T> = (0..dim).map(|_| T::gaussian(1.0, rng)).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v
                .into_iter()
                .map(|x| T::from_components(x.components().map(|c| c / norm)))
                .collect());
        }
    }
}

/// Flat Dirichlet draw on the `k`-simplex.
pub fn sample_dirichlet(alpha: f64, k: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if k == 0 {
        bail!(InvalidParameter, "dirichlet dimension must be positive");
    }
    let g = (0..k)
        .map(|_| sample_gamma(alpha, rng))
        .collect::<Result<Vec<_>>>()?;
    let s: f64 = g.iter().sum();
    Ok(g.into_iter().map(|x| x / s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Quaternion;
    use num_complex::Complex64;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = RngStream::new(42, 3);
        let mut b = RngStream::new(42, 3);
        let mut c = RngStream::new(42, 4);
        let xa: Vec<u64> = (0..64).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..64).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..64).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn real_gaussian_second_moment() {
        let mut rng = RngStream::new(1, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_gaussian::<f64>(1.0, &mut rng).unwrap().powi(2))
            .collect();
        let (m, v) = mean_var(&xs);
        // E[X²] = β = 1
        assert!((m - 1.0).abs() < 3.0 * (v / n as f64).sqrt(), "m = {m}");
    }

    #[test]
    fn complex_and_quaternion_components() {
        let mut rng = RngStream::new(2, 0);
        let n = 200_000;
        let zs: Vec<Complex64> = (0..n).map(|_| sample_gaussian(2.0, &mut rng).unwrap()).collect();
        let re: Vec<f64> = zs.iter().map(|z| z.re * z.re).collect();
        let im: Vec<f64> = zs.iter().map(|z| z.im * z.im).collect();
        for comp in [re, im] {
            let (m, v) = mean_var(&comp);
            assert!((m - 1.0).abs() < 4.0 * (v / n as f64).sqrt());
        }
        let qs: Vec<Quaternion> = (0..n).map(|_| sample_gaussian(4.0, &mut rng).unwrap()).collect();
        for k in 0..4 {
            let c: Vec<f64> = qs.iter().map(|q| q.components()[k].powi(2)).collect();
            let (m, v) = mean_var(&c);
            assert!((m - 1.0).abs() < 4.0 * (v / n as f64).sqrt());
        }
    }

    #[test]
    fn parameter_errors() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_gaussian::<f64>(0.0, &mut rng).is_err());
        assert!(sample_gaussian::<f64>(-1.0, &mut rng).is_err());
        assert!(sample_chi(0.0, &mut rng).is_err());
        assert!(sample_chi(-2.0, &mut rng).is_err());
        assert!(sample_haar_unit_vector::<f64>(0, &mut rng).is_err());
    }

    #[test]
    fn chi_two_has_unit_square_mean_two() {
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_chi(2.0, &mut rng).unwrap().powi(2)).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 2.0).abs() < 4.0 * (v / n as f64).sqrt());
    }

    #[test]
    fn chi_moments_over_grid() {
        // E χ_α = √2 Γ((α+1)/2)/Γ(α/2), E χ_α² = α.
        for (i, &alpha) in [0.5, 1.0, 2.0, 3.0, 8.0].iter().enumerate() {
            let mut rng = RngStream::new(4, i as u64);
            let n = 1_000_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_chi(alpha, &mut rng).unwrap()).collect();
            assert!(xs.iter().all(|&x| x > 0.0));
            let mean = 0.5 * 2f64.ln() + libm::lgamma(0.5 * (alpha + 1.0)) - libm::lgamma(0.5 * alpha);
            let mean = mean.exp();
            let var = alpha - mean * mean;
            let (m, v) = mean_var(&xs);
            assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt(), "alpha {alpha}: {m} vs {mean}");
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let (m2, v2) = mean_var(&sq);
            assert!((m2 - alpha).abs() < 4.0 * (v2 / n as f64).sqrt());
            assert!((v - var).abs() < 0.01 * var.max(0.05));
        }
    }

    #[test]
    fn chi_three_mean_matches_quadrature_value() {
        // ∫ x · pdf_3(x) dx = √2 Γ(2) / Γ(3/2) = 1.5957691...
        let mut rng = RngStream::new(5, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_chi(3.0, &mut rng).unwrap()).collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 1.595_769_121_605_731).abs() < 4.0 * (v / n as f64).sqrt());
    }

    #[test]
    fn chi_half_histogram_matches_density() {
        // α = 0.5: pdf(x) = x^{-1/2} e^{-x²/2} / (2^{-3/4} Γ(1/4)); compare bin
        // probabilities computed by a fine midpoint rule.
        let alpha = 0.5;
        let mut rng = RngStream::new(6, 0);
        let n = 1_000_000;
        let edges: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
        let mut counts = alloc::vec![0usize; edges.len() - 1];
        for _ in 0..n {
            let x = sample_chi(alpha, &mut rng).unwrap();
            if let Some(b) = edges.windows(2).position(|w| x >= w[0] && x < w[1]) {
                counts[b] += 1;
            }
        }
        let log_norm = (0.5 * alpha - 1.0) * 2f64.ln() + libm::lgamma(0.5 * alpha);
        let pdf = |x: f64| ((alpha - 1.0) * x.ln() - 0.5 * x * x - log_norm).exp();
        let mut worst = 0.0f64;
        for (b, w) in edges.windows(2).enumerate() {
            // substitute x = t² on the first bin to tame the x^{-1/2} endpoint
            let k = 20_000;
            let (lo, hi) = (w[0].sqrt(), w[1].sqrt());
            let h = (hi - lo) / k as f64;
            let p: f64 = (0..k)
                .map(|i| {
                    let t = lo + (i as f64 + 0.5) * h;
                    pdf(t * t) * 2.0 * t * h
                })
                .sum();
            worst = worst.max((counts[b] as f64 / n as f64 - p).abs());
        }
        assert!(worst < 5.0 / (n as f64).sqrt(), "worst bin error {worst}");
    }

    #[test]
    fn haar_vectors() {
        let mut rng = RngStream::new(7, 0);
        let mut plus = 0usize;
        let n = 20_000;
        for _ in 0..n {
            let v = sample_haar_unit_vector::<f64>(1, &mut rng).unwrap();
            assert!(v[0] == 1.0 || v[0] == -1.0);
            if v[0] > 0.0 {
                plus += 1;
            }
        }
        let p = plus as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());

        let v = sample_haar_unit_vector::<Complex64>(3, &mut rng).unwrap();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);

        // dim 2 real: first coordinate squared ~ Beta(1/2, 1/2), mean 1/2, var 1/8.
        let n = 200_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_haar_unit_vector::<f64>(2, &mut rng).unwrap()[0].powi(2))
            .collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 0.5).abs() < 4.0 * (0.125 / n as f64).sqrt());
        assert!((v - 0.125).abs() < 0.005);
        // Arcsine CDF 2/π asin(√x) at x = 0.1
        let frac = xs.iter().filter(|&&x| x < 0.1).count() as f64 / n as f64;
        let expect = 2.0 / core::f64::consts::PI * 0.1f64.sqrt().asin();
        assert!((frac - expect).abs() < 4.0 * (expect * (1.0 - expect) / n as f64).sqrt());
    }
}
