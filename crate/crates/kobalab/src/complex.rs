//! Points and tangent vectors of C^d.
//!
//! Complex numbers are kept as `(re, im)` pairs so every routine can also view
//! C^d as R^{2d} when real optimization is more convenient.

use num_complex::Complex;
use serde::de::Error as _;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point (or vector) of C^d.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector<T: Real> {
    coords: Vec<Complex<T>>,
}

impl<T: Real> CVector<T> {
    /// Builds a vector, rejecting empty or non-finite input.
    pub fn new(coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if coords
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self { coords })
    }

    /// Zero vector of dimension `d`.
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            coords: vec![Complex::new(T::zero(), T::zero()); d],
        }
    }

    /// `scale * e_i` in dimension `d`.
    pub fn axis(d: usize, i: usize, scale: Complex<T>) -> Self {
        let mut v = Self::zero(d);
        v.coords[i] = scale;
        v
    }

    /// Convenience constructor from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(re, im)| Complex::new(T::of(re), T::of(im)))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> Complex<T> {
        self.coords[i]
    }

    pub fn set_coord(&mut self, i: usize, z: Complex<T>) {
        self.coords[i] = z;
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Hermitian inner product `<a, b> = sum a_i conj(b_i)`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b.conj())
            .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
    }

    /// Real inner product of the underlying R^{2d} vectors.
    pub fn dot_re(&self, other: &Self) -> T {
        self.dot(other).re
    }

    pub fn norm_sq(&self) -> T {
        self.coords.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            coords: self.coords.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: Complex<T>) -> Self {
        Self {
            coords: self.coords.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + t * dir`.
    pub fn add_scaled(&self, dir: &Self, t: T) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(&dir.coords)
                .map(|(a, b)| a + b * t)
                .collect(),
        }
    }

    /// Unit vector in the same direction; error on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() {
            return Err(Error::ZeroVector);
        }
        Ok(self.scale(T::one() / n))
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq() == T::zero()
    }

    pub fn dist(&self, other: &Self) -> T {
        self.sub(other).norm()
    }

    /// Flattens to R^{2d} as `[re_0, im_0, re_1, im_1, ...]`.
    pub fn to_reals(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for z in &self.coords {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }

    /// Inverse of [`Self::to_reals`].
    pub fn from_reals(reals: &[T]) -> Self {
        assert!(reals.len() >= 2 && reals.len().is_multiple_of(2));
        Self {
            coords: reals
                .chunks_exact(2)
                .map(|c| Complex::new(c[0], c[1]))
                .collect(),
        }
    }

    /// Lossy conversion for serialization and reports.
    pub fn to_pairs_f64(&self) -> Vec<[f64; 2]> {
        self.coords
            .iter()
            .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
            .collect()
    }
}

/// Wire format: a vector is an array of two-element `[re, im]` arrays.
impl<T: Real> Serialize for CVector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for z in &self.coords {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl<'de, T: Real> Deserialize<'de> for CVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[T; 2]> = Vec::deserialize(deserializer)?;
        CVector::new(
            pairs
                .into_iter()
                .map(|[re, im]| Complex::new(re, im))
                .collect(),
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Projects `v` onto the Hermitian-orthogonal complement of the unit vector
/// `u`, i.e. `v - <v,u> u`.
pub fn project_out<T: Real>(v: &CVector<T>, u: &CVector<T>) -> CVector<T> {
    let c = v.dot(u);
    v.sub(&u.scale_c(c))
}

/// Gram-Schmidt with re-orthogonalization. Returns an orthonormal basis of
/// the span; vectors that collapse below `tol` are dropped.
pub fn orthonormalize<T: Real>(vectors: &[CVector<T>], tol: T) -> Vec<CVector<T>> {
    let mut basis: Vec<CVector<T>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                w = project_out(&w, b);
            }
        }
        if w.norm() > tol {
            basis.push(w.normalized().expect("norm checked above"));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = CVector<f64>;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(V::new(vec![]).is_err());
        assert!(V::from_pairs(&[(f64::NAN, 0.0)]).is_err());
        assert!(V::from_pairs(&[(1.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn hermitian_dot_conjugates_second_argument() {
        let a = V::from_pairs(&[(1.0, 2.0)]).unwrap();
        let b = V::from_pairs(&[(3.0, -1.0)]).unwrap();
        // (1+2i) * conj(3-i) = (1+2i)(3+i) = 1 + 7i
        let d = a.dot(&b);
        assert!((d.re - 1.0).abs() < 1e-15);
        assert!((d.im - 7.0).abs() < 1e-15);
    }

    #[test]
    fn real_roundtrip() {
        let a = V::from_pairs(&[(1.0, 2.0), (-0.5, 0.25)]).unwrap();
        let r = a.to_reals();
        assert_eq!(V::from_reals(&r), a);
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let a = V::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]).unwrap();
        let b = V::from_pairs(&[(2.0, 0.0), (0.0, 0.0)]).unwrap();
        let c = V::from_pairs(&[(0.0, 0.0), (0.0, 1.0)]).unwrap();
        let basis = orthonormalize(&[a, b, c], 1e-12);
        assert_eq!(basis.len(), 2);
        assert!(basis[0].dot(&basis[1]).norm() < 1e-14);
        assert!((basis[0].norm() - 1.0).abs() < 1e-14);
    }
}
