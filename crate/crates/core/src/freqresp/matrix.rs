//! 2×2 complex matrix with the handful of operations the pipeline needs.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

/// Dense 2×2 complex matrix.
///
/// Entries are named by row/column position. Depending on context the matrix
/// holds an impedance (Ω), an admittance (S), or a dimensionless gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl Mat2 {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    /// Matrix with the given real entries.
    pub fn from_real(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new(c(m11), c(m12), c(m21), c(m22))
    }

    pub fn identity() -> Self {
        Self::from_real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zeros() -> Self {
        Self::from_real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, Complex64::ZERO, Complex64::ZERO, d)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr())
            .sqrt()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.m11 * k, self.m12 * k, self.m21 * k, self.m22 * k)
    }

    /// Inverse, or `None` when `|det|` falls below `threshold`.
    pub fn try_inverse(&self, threshold: f64) -> Option<Self> {
        let d = self.det();
        if d.norm() < threshold {
            return None;
        }
        let inv = Complex64::new(1.0, 0.0) / d;
        Some(Self::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }

    /// Eigenvalues as the roots of `λ² − tr·λ + det = 0`.
    ///
    /// Uses the sign-aligned quadratic formula (the larger root is computed
    /// by addition, the smaller by Vieta's product) so nearly-degenerate
    /// pairs do not suffer cancellation. Ordering is deterministic: by real
    /// part descending, ties broken by imaginary part descending.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let half_tr = self.trace() * 0.5;
        let det = self.det();
        let disc = (half_tr * half_tr - det).sqrt();
        // Pick the branch of the square root that does not cancel half_tr.
        let disc = if (half_tr.re * disc.re + half_tr.im * disc.im) >= 0.0 {
            disc
        } else {
            -disc
        };
        let big = half_tr + disc;
        let small = if big.norm() > 0.0 { det / big } else { half_tr - disc };
        sort_eig_pair(big, small)
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn sort_eig_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let swap = match a.re.partial_cmp(&b.re) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Equal) => a.im < b.im,
        _ => false,
    };
    if swap {
        (b, a)
    } else {
        (a, b)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 + rhs.m11,
            self.m12 + rhs.m12,
            self.m21 + rhs.m21,
            self.m22 + rhs.m22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 - rhs.m11,
            self.m12 - rhs.m12,
            self.m21 - rhs.m21,
            self.m22 - rhs.m22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_of_diagonal() {
        let m = Mat2::from_real(2.0, 0.0, 0.0, 4.0);
        let inv = m.try_inverse(1e-30).unwrap();
        assert_eq!(inv, Mat2::from_real(0.5, 0.0, 0.0, 0.25));
    }

    #[test]
    fn identity_inverts_to_identity() {
        let inv = Mat2::identity().try_inverse(1e-30).unwrap();
        assert_eq!(inv, Mat2::identity());
    }

    #[test]
    fn singular_detected() {
        let m = Mat2::from_real(1.0, 2.0, 2.0, 4.0);
        assert!(m.try_inverse(1e-30).is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = Mat2::diag(c(3.0, 0.0), c(-1.0, 0.0));
        let (l1, l2) = m.eigenvalues();
        assert_eq!(l1, c(3.0, 0.0));
        assert_eq!(l2, c(-1.0, 0.0));
    }

    #[test]
    fn eigenvalues_of_swap_matrix() {
        let m = Mat2::from_real(0.0, 1.0, 1.0, 0.0);
        let (l1, l2) = m.eigenvalues();
        assert!((l1 - c(1.0, 0.0)).norm() < 1e-15);
        assert!((l2 - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenvalues_invariant_under_similarity() {
        // Similarity transform by a rotation must not move the eigenvalues.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..200 {
            let a = Mat2::new(
                c(next(), next()),
                c(next(), next()),
                c(next(), next()),
                c(next(), next()),
            );
            let th = next() * std::f64::consts::PI;
            let t = Mat2::from_real(th.cos(), th.sin(), -th.sin(), th.cos());
            let t_inv = t.try_inverse(1e-30).unwrap();
            let (a1, a2) = a.eigenvalues();
            let (b1, b2) = (t * a * t_inv).eigenvalues();
            let direct = (a1 - b1).norm() + (a2 - b2).norm();
            let crossed = (a1 - b2).norm() + (a2 - b1).norm();
            assert!(direct.min(crossed) < 1e-10, "eigenvalue drift {direct}");
        }
    }
}
