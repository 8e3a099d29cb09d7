//! Scalars over ℝ, ℂ and ℍ, and their complex embeddings.
//!
//! Multiplication in [`Quaternion`] does not commute, so every generic routine
//! in this crate keeps track of which side a scalar acts from.

use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math is inherent in core on recent toolchains
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::random::RngStream;

/// The division algebra the matrix entries live in. The Dyson index β is its
/// real dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarField {
    Real,
    Complex,
    Quaternion,
}

impl ScalarField {
    pub fn beta(self) -> f64 {
        match self {
            ScalarField::Real => 1.0,
            ScalarField::Complex => 2.0,
            ScalarField::Quaternion => 4.0,
        }
    }

    pub fn from_beta(beta: f64) -> Option<Self> {
        if beta == 1.0 {
            Some(ScalarField::Real)
        } else if beta == 2.0 {
            Some(ScalarField::Complex)
        } else if beta == 4.0 {
            Some(ScalarField::Quaternion)
        } else {
            None
        }
    }

    /// Number of real components.
    pub fn components(self) -> usize {
        self.beta() as usize
    }

    /// Size of the complex block representing one scalar.
    pub fn embedding_dim(self) -> usize {
        match self {
            ScalarField::Quaternion => 2,
            _ => 1,
        }
    }
}

/// Quaternion `w + x·i + y·j + z·k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.w, self.x, self.y, self.z)
    }
}

/// Entry type of a dense chiral matrix.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const FIELD: ScalarField;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, s: f64) -> Self;

    /// Real components in a fixed order (re, then imaginary parts).
    fn components(self) -> [f64; 4];
    fn from_components(c: [f64; 4]) -> Self;

    /// `embed(self)[r][c]` is the complex block representing the scalar; only
    /// the top-left entry is used when `FIELD.embedding_dim() == 1`.
    fn embed(self) -> [[Complex64; 2]; 2];

    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Centered Gaussian with `E|X|² = variance`, the variance split evenly
    /// over the real components.
    fn gaussian(variance: f64, rng: &mut RngStream) -> Self {
        let k = Self::FIELD.components();
        let sd = (variance / k as f64).sqrt();
        let mut c = [0.0; 4];
        for slot in c.iter_mut().take(k) {
            let g: f64 = StandardNormal.sample(rng);
            *slot = sd * g;
        }
        Self::from_components(c)
    }
}

impl Scalar for f64 {
    const FIELD: ScalarField = ScalarField::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn components(self) -> [f64; 4] {
        [self, 0.0, 0.0, 0.0]
    }
    fn from_components(c: [f64; 4]) -> Self {
        c[0]
    }
    fn embed(self) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(0.0, 0.0);
        [[Complex64::new(self, 0.0), z], [z, z]]
    }
}

impl Scalar for Complex64 {
    const FIELD: ScalarField = ScalarField::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn components(self) -> [f64; 4] {
        [self.re, self.im, 0.0, 0.0]
    }
    fn from_components(c: [f64; 4]) -> Self {
        Complex64::new(c[0], c[1])
    }
    fn embed(self) -> [[Complex64; 2]; 2] {
        let z = Complex64::new(0.0, 0.0);
        [[self, z], [z, z]]
    }
}

impl Scalar for Quaternion {
    const FIELD: ScalarField = ScalarField::Quaternion;

    fn zero() -> Self {
        Quaternion::default()
    }
    fn one() -> Self {
        Quaternion::new(1.0, 0.0, 0.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }
    fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }
    fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }
    fn re(self) -> f64 {
        self.w
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
    fn components(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }
    fn from_components(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
    /// `a + b j` with `a = w + x i`, `b = y + z i` maps to `[[a, b], [-b̄, ā]]`.
    fn embed(self) -> [[Complex64; 2]; 2] {
        let a = Complex64::new(self.w, self.x);
        let b = Complex64::new(self.y, self.z);
        [[a, b], [-b.conj(), a.conj()]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quat() -> impl Strategy<Value = Quaternion> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
            .prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z))
    }

    fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn beta_tags_are_fixed() {
        assert_eq!(ScalarField::Real.beta(), 1.0);
        assert_eq!(ScalarField::Complex.beta(), 2.0);
        assert_eq!(ScalarField::Quaternion.beta(), 4.0);
        assert_eq!(ScalarField::from_beta(4.0), Some(ScalarField::Quaternion));
        assert_eq!(ScalarField::from_beta(0.7), None);
    }

    #[test]
    fn quaternion_units() {
        let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
        let k = Quaternion::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(i * j * k, -Quaternion::one());
    }

    proptest! {
        #[test]
        fn embedding_is_a_homomorphism(p in quat(), q in quat()) {
            let lhs = (p * q).embed();
            let rhs = mat_mul(p.embed(), q.embed());
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((lhs[r][c] - rhs[r][c]).norm() < 1e-12);
                }
            }
            // conjugation maps to conjugate transpose
            let e = p.conj().embed();
            let f = p.embed();
            for r in 0..2 {
                for c in 0..2 {
                    prop_assert!((e[r][c] - f[c][r].conj()).norm() < 1e-15);
                }
            }
        }

        #[test]
        fn norm_is_multiplicative(p in quat(), q in quat()) {
            prop_assert!(((p * q).norm_sqr() - p.norm_sqr() * q.norm_sqr()).abs() < 1e-9);
        }
    }
}
