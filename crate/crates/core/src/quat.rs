//! Quaternion arithmetic and structural sets.
//!
//! Quaternions are always stored in standard-basis coordinates `{1, i, j, k}`.
//! A [`StructuralSet`] never changes the storage; it only provides the
//! coordinate map `x = Σ x_k ψ_k` and its inverse.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real quaternion `w0 + w1 i + w2 j + w3 k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w0: f64, w1: f64, w2: f64, w3: f64) -> Self {
        Quaternion { w0, w1, w2, w3 }
    }

    pub const fn real(s: f64) -> Self {
        Quaternion::new(s, 0.0, 0.0, 0.0)
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.w0, self.w1, self.w2, self.w3]
    }

    /// Real (scalar) part.
    pub fn scalar(self) -> f64 {
        self.w0
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w0, -self.w1, -self.w2, -self.w3)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w0 * self.w0 + self.w1 * self.w1 + self.w2 * self.w2 + self.w3 * self.w3
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse `conj(x) / |x|²`.
    pub fn inv(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::Domain("inverse of the zero quaternion".into()));
        }
        Ok(self.conj() / n2)
    }

    /// Euclidean scalar product `⟨q, x⟩ = ½(conj(q)x + conj(x)q)`, which is real.
    pub fn dot(self, other: Quaternion) -> f64 {
        self.w0 * other.w0 + self.w1 * other.w1 + self.w2 * other.w2 + self.w3 * other.w3
    }

    /// Maximum absolute component difference.
    pub fn max_abs_diff(self, other: Quaternion) -> f64 {
        (self - other)
            .to_array()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w0 + r.w0, self.w1 + r.w1, self.w2 + r.w2, self.w3 + r.w3)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w0 - r.w0, self.w1 - r.w1, self.w2 - r.w2, self.w3 - r.w3)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, r: Quaternion) {
        *self = *self + r;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, r: Quaternion) {
        *self = *self - r;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w0, -self.w1, -self.w2, -self.w3)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, r: Quaternion) -> Quaternion {
        let (a0, a1, a2, a3) = (self.w0, self.w1, self.w2, self.w3);
        let (b0, b1, b2, b3) = (r.w0, r.w1, r.w2, r.w3);
        Quaternion::new(
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w0 * s, self.w1 * s, self.w2 * s, self.w3 * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w0 / s, self.w1 / s, self.w2 / s, self.w3 / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl std::fmt::Display for Quaternion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w0, self.w1, self.w2, self.w3)
    }
}

/// Orthonormality tolerance for structural sets.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// An ordered orthonormal quaternion 4-tuple `ψ` with its orientation sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralSet {
    psi: [Quaternion; 4],
    sgn: i8,
}

impl StructuralSet {
    /// `{1, i, j, k}`.
    pub fn standard() -> Self {
        StructuralSet {
            psi: [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K],
            sgn: 1,
        }
    }

    /// Checks orthonormality and computes the orientation sign from the
    /// determinant of the column matrix `[ψ_0 ψ_1 ψ_2 ψ_3]`.
    pub fn validate(candidate: [Quaternion; 4]) -> Result<Self> {
        for k in 0..4 {
            for s in 0..4 {
                let expected = if k == s { 1.0 } else { 0.0 };
                let got = candidate[k].dot(candidate[s]);
                if (got - expected).abs() > STRUCTURAL_TOL {
                    return Err(Error::Validation(format!(
                        "<psi_{k}, psi_{s}> = {got}, expected {expected}"
                    )));
                }
            }
        }
        let cols: [[f64; 4]; 4] = candidate.map(|q| q.to_array());
        let det = det4(&cols);
        Ok(StructuralSet {
            psi: candidate,
            sgn: if det > 0.0 { 1 } else { -1 },
        })
    }

    pub fn psi(&self) -> &[Quaternion; 4] {
        &self.psi
    }

    pub fn get(&self, k: usize) -> Quaternion {
        self.psi[k]
    }

    pub fn sgn(&self) -> i8 {
        self.sgn
    }

    /// `Σ ψ_k` (the quaternion proportion obtained when every axis proportion is 1).
    pub fn sum(&self) -> Quaternion {
        self.psi.iter().copied().sum()
    }

    /// Forward coordinate map `x ↦ (⟨x, ψ_k⟩)_k`.
    pub fn to_coords(&self, x: Quaternion) -> [f64; 4] {
        [
            x.dot(self.psi[0]),
            x.dot(self.psi[1]),
            x.dot(self.psi[2]),
            x.dot(self.psi[3]),
        ]
    }

    /// Inverse coordinate map `(x_k) ↦ Σ x_k ψ_k`.
    pub fn from_coords(&self, c: [f64; 4]) -> Quaternion {
        self.psi[0] * c[0] + self.psi[1] * c[1] + self.psi[2] * c[2] + self.psi[3] * c[3]
    }

    /// `⟨q, x⟩_ψ = Σ q_k x_k` with both arguments read in ψ-coordinates.
    pub fn psi_inner(&self, q: Quaternion, x: Quaternion) -> f64 {
        let a = self.to_coords(q);
        let b = self.to_coords(x);
        a.iter().zip(b.iter()).map(|(u, v)| u * v).sum()
    }

    /// Gram matrix `⟨ψ_k, ψ_s⟩`.
    pub fn gram(&self) -> [[f64; 4]; 4] {
        let mut g = [[0.0; 4]; 4];
        for (k, row) in g.iter_mut().enumerate() {
            for (s, v) in row.iter_mut().enumerate() {
                *v = self.psi[k].dot(self.psi[s]);
            }
        }
        g
    }
}

/// Determinant of a 4×4 matrix given as columns (Laplace expansion on 3×3 minors).
fn det4(cols: &[[f64; 4]; 4]) -> f64 {
    // m[r][c] = cols[c][r]
    let m = |r: usize, c: usize| cols[c][r];
    let det3 = |rows: [usize; 3], cs: [usize; 3]| {
        let a = |i: usize, j: usize| m(rows[i], cs[j]);
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    let mut det = 0.0;
    for c in 0..4 {
        let cs: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let minor = det3([1, 2, 3], [cs[0], cs[1], cs[2]]);
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m(0, c) * minor;
    }
    det
}
