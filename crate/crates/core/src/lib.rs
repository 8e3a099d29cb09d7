//! Chiral Gaussian β-ensembles and their rank-one Hermitian and non-Hermitian
//! perturbations.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerics:
//!
//! * [`random`]: seeded, stream-splittable sampling of Gaussians over ℝ, ℂ, ℍ and of χ laws.
//! * [`models`]: dense chiral matrices, Householder bidiagonalization, the
//!   permutation to Jacobi form, the tridiagonal chGβE sampler for any β > 0,
//!   rank-one perturbations and the anti-bidiagonal presentation.
//! * [`eig`]: eigenvalues of the perturbed Jacobi matrices, spectral measures and the
//!   inverse (Lanczos) maps back from eigenvalues to matrices.
//! * [`densities`]: closed-form joint densities and their normalization constants.
//! * [`jacobians`]: the spectral-data → characteristic-polynomial Jacobians, in
//!   closed form and by finite differences.
//! * [`stats`]: Kolmogorov–Smirnov statistics and adaptive Gauss–Kronrod quadrature.
//!
//! IO, the command line and the verification driver live in the `chiral-cli` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod densities;
pub mod eig;
pub mod error;
pub mod field;
pub mod jacobians;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod random;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
