//! Complex matrices and affine transformations z -> Az + b.

use num_complex::Complex;

use crate::complex::CVector;
use crate::error::{Error, Result};
use crate::params::CONDITION_LIMIT;
use crate::scalar::Real;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    dim: usize,
    rows: Vec<Vec<Complex<T>>>,
}

impl<T: Real> CMatrix<T> {
    pub fn new(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![vec![Complex::new(T::zero(), T::zero()); dim]; dim];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = Complex::new(T::one(), T::zero());
        }
        Self { dim, rows }
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let dim = entries.len();
        let mut m = Self::identity(dim);
        for i in 0..dim {
            m.rows[i][i] = entries[i];
        }
        m
    }

    /// Matrix whose i-th row is `rows[i]`. Used to build unitaries whose rows
    /// are conjugated frame directions.
    pub fn from_rows(rows: Vec<CVector<T>>) -> Result<Self> {
        Self::new(rows.into_iter().map(|r| r.coords().to_vec()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Complex<T>>] {
        &self.rows
    }

    pub fn apply(&self, v: &CVector<T>) -> Result<CVector<T>> {
        v.check_dim(self.dim)?;
        let coords = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v.coords())
                    .map(|(a, x)| a * x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
            })
            .collect();
        CVector::new(coords)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let d = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut rows = vec![vec![zero; d]; d];
        for i in 0..d {
            for k in 0..d {
                let a = self.rows[i][k];
                if a == zero {
                    continue;
                }
                for j in 0..d {
                    rows[i][j] += a * other.rows[k][j];
                }
            }
        }
        Self::new(rows)
    }

    /// Max row-sum norm.
    pub fn norm_inf(&self) -> T {
        let mut best = T::zero();
        for row in &self.rows {
            let s: T = row.iter().map(|z| z.norm()).sum();
            if s > best {
                best = s;
            }
        }
        best
    }

    /// Gauss-Jordan inverse with partial pivoting. Fails when the condition
    /// estimate `|A|_inf * |A^-1|_inf` exceeds [`CONDITION_LIMIT`].
    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim;
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut a = self.rows.clone();
        let mut inv = Self::identity(d).rows;

        for col in 0..d {
            let mut pivot = col;
            let mut best = a[col][col].norm();
            for r in (col + 1)..d {
                let m = a[r][col].norm();
                if m > best {
                    best = m;
                    pivot = r;
                }
            }
            if !(best > T::zero()) || !best.is_finite() {
                return Err(Error::SingularMap { cond: f64::INFINITY });
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);

            let p = a[col][col];
            for j in 0..d {
                a[col][j] /= p;
                inv[col][j] /= p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[r][col];
                if f == zero {
                    continue;
                }
                for j in 0..d {
                    a[r][j] = a[r][j] - f * a[col][j];
                    inv[r][j] = inv[r][j] - f * inv[col][j];
                }
            }
            a[col][col] = one;
        }

        let inverse = Self::new(inv)?;
        let cond = (self.norm_inf() * inverse.norm_inf()).to_f64_lossy();
        if !cond.is_finite() || cond > CONDITION_LIMIT {
            return Err(Error::SingularMap { cond });
        }
        Ok(inverse)
    }

    /// `|U U* - I|` check, used by tests and the frame builder.
    pub fn unitary_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = Complex::new(T::zero(), T::zero());
                for k in 0..self.dim {
                    s += self.rows[i][k] * self.rows[j][k].conj();
                }
                let target = if i == j { T::one() } else { T::zero() };
                let d = (s - Complex::new(target, T::zero())).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Complex affine transformation `z -> linear * z + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T: Real> {
    pub linear: CMatrix<T>,
    pub translation: CVector<T>,
}

impl<T: Real> AffineMap<T> {
    pub fn new(linear: CMatrix<T>, translation: CVector<T>) -> Result<Self> {
        translation.check_dim(linear.dim())?;
        Ok(Self {
            linear,
            translation,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            linear: CMatrix::identity(dim),
            translation: CVector::zero(dim),
        }
    }

    /// Translation `z -> z - q`.
    pub fn translation_to_origin(q: &CVector<T>) -> Self {
        Self {
            linear: CMatrix::identity(q.dim()),
            translation: q.scale(-T::one()),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn apply(&self, p: &CVector<T>) -> Result<CVector<T>> {
        Ok(self.linear.apply(p)?.add(&self.translation))
    }

    /// Applies only the linear part (how tangent vectors transform).
    pub fn apply_linear(&self, v: &CVector<T>) -> Result<CVector<T>> {
        self.linear.apply(v)
    }

    /// `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let linear = self.linear.matmul(&other.linear)?;
        let translation = self.linear.apply(&other.translation)?.add(&self.translation);
        Ok(Self {
            linear,
            translation,
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.linear.inverse()?;
        let translation = inv.apply(&self.translation)?.scale(-T::one());
        Ok(Self {
            linear: inv,
            translation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn cv(pairs: &[(f64, f64)]) -> CVector<f64> {
        CVector::from_pairs(pairs).unwrap()
    }

    #[test]
    fn identity_apply() {
        let m = AffineMap::<f64>::identity(2);
        let p = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(m.apply(&p).unwrap(), p);
    }

    #[test]
    fn translation_sends_q_to_origin() {
        let q = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        let t = AffineMap::translation_to_origin(&q);
        let image = t.apply(&q).unwrap();
        assert!(image.norm() < 1e-15);
    }

    #[test]
    fn diagonal_apply_by_hand() {
        // diag(1/2, 1/3) applied to (2, 3) gives (1, 1).
        let m = AffineMap::new(
            CMatrix::diagonal(&[C::new(0.5, 0.0), C::new(1.0 / 3.0, 0.0)]),
            CVector::zero(2),
        )
        .unwrap();
        let out = m.apply(&cv(&[(2.0, 0.0), (3.0, 0.0)])).unwrap();
        assert!(out.dist(&cv(&[(1.0, 0.0), (1.0, 0.0)])) < 1e-15);
    }

    #[test]
    fn inverse_of_scale_and_shift() {
        // z -> 2z + (1, 0) inverts to z -> z/2 - (1/2, 0): solve 2w + 1 = z.
        let m = AffineMap::new(
            CMatrix::diagonal(&[C::new(2.0, 0.0), C::new(2.0, 0.0)]),
            cv(&[(1.0, 0.0), (0.0, 0.0)]),
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!(inv.linear.entry(0, 0).re - 0.5 < 1e-15);
        let expected = cv(&[(-0.5, 0.0), (0.0, 0.0)]);
        assert!(inv.translation.dist(&expected) < 1e-15);
        // Round trip on a probe basis stays within 1e-12 componentwise.
        for i in 0..2 {
            let e = CVector::axis(2, i, C::new(1.0, 0.0));
            let back = inv.apply(&m.apply(&e).unwrap()).unwrap();
            assert!(back.dist(&e) < 1e-12);
        }
    }

    #[test]
    fn diagonal_inverse() {
        let m = AffineMap::new(
            CMatrix::diagonal(&[C::new(3.0, 0.0), C::new(0.0, 2.0)]),
            CVector::zero(2),
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        assert!((inv.linear.entry(0, 0) - C::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((inv.linear.entry(1, 1) - C::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn singular_map_is_rejected() {
        let m = CMatrix::new(vec![
            vec![C::new(1.0, 0.0), C::new(2.0, 0.0)],
            vec![C::new(0.5, 0.0), C::new(1.0, 0.0)],
        ])
        .unwrap();
        match m.inverse() {
            Err(Error::SingularMap { .. }) => {}
            other => panic!("expected singular map error, got {other:?}"),
        }
    }

    #[test]
    fn near_singular_condition_threshold() {
        let eps = 1e-14;
        let m = CMatrix::new(vec![
            vec![C::new(1.0, 0.0), C::new(1.0, 0.0)],
            vec![C::new(1.0, 0.0), C::new(1.0 + eps, 0.0)],
        ])
        .unwrap();
        assert!(matches!(m.inverse(), Err(Error::SingularMap { .. })));
    }
}
