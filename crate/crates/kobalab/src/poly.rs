//! Real-valued polynomials in (z, conj z) with exact rational coefficients.
//!
//! A polynomial is stored as a map from multi-index pairs (alpha, beta) to
//! complex rational coefficients, P(z) = sum a_{alpha,beta} z^alpha
//! conj(z)^beta. Real-valuedness is the Hermitian symmetry
//! a_{beta,alpha} = conj(a_{alpha,beta}) and is validated on construction.
//! All weight and degree computations stay in exact arithmetic; floating
//! point appears only in evaluation-based probes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ADAPTED_PROBES;
use crate::sampling::rng_from_seed;
use crate::scalar::Real;

pub type Rational = BigRational;
pub type MultiIndex = Vec<u32>;

fn rat_i64(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Complex number with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QComplex {
    pub re: Rational,
    pub im: Rational,
}

impl QComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Self::new(Rational::one(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(rat_i64(n, 1), Rational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.re + &other.re, &self.im + &other.im)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }

    pub fn mul_rat(&self, r: &Rational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    pub fn to_complex<T: Real>(&self) -> Complex<T> {
        Complex::new(
            T::of(self.re.to_f64().unwrap_or(f64::NAN)),
            T::of(self.im.to_f64().unwrap_or(f64::NAN)),
        )
    }

    fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    Rational::from_str(s.trim()).map_err(|_| Error::BadRational {
        literal: s.to_string(),
    })
}

/// Hermitian polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianPolynomial {
    dim: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), QComplex>,
}

impl HermitianPolynomial {
    /// Validates index lengths and Hermitian symmetry.
    pub fn new(dim: usize, terms: BTreeMap<(MultiIndex, MultiIndex), QComplex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let terms: BTreeMap<_, _> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        for ((alpha, beta), coeff) in &terms {
            if alpha.len() != dim || beta.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.len().max(beta.len()),
                });
            }
            let mirror = terms.get(&(beta.clone(), alpha.clone()));
            if mirror != Some(&coeff.conj()) {
                return Err(Error::NotHermitian {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                });
            }
        }
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `coeff * prod |z_i|^(2 exps_i)`, the basic real monomial.
    pub fn modulus_monomial(dim: usize, exps: &[u32], coeff: i64) -> Self {
        assert_eq!(exps.len(), dim);
        let mut terms = BTreeMap::new();
        terms.insert(
            (exps.to_vec(), exps.to_vec()),
            QComplex::from_int(coeff),
        );
        Self { dim, terms }
    }

    /// Inserts the Hermitian pair `coeff z^alpha conj(z)^beta + conj`.
    pub fn with_pair(mut self, alpha: &[u32], beta: &[u32], coeff: QComplex) -> Result<Self> {
        if alpha.len() != self.dim || beta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.len().max(beta.len()),
            });
        }
        let entry = self
            .terms
            .entry((alpha.to_vec(), beta.to_vec()))
            .or_insert_with(QComplex::zero);
        *entry = entry.add(&coeff);
        if alpha != beta {
            let entry = self
                .terms
                .entry((beta.to_vec(), alpha.to_vec()))
                .or_insert_with(QComplex::zero);
            *entry = entry.add(&coeff.conj());
        }
        self.terms.retain(|_, c| !c.is_zero());
        Self::new(self.dim, self.terms)
    }

    pub fn sum(mut self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        for (key, coeff) in &other.terms {
            let entry = self.terms.entry(key.clone()).or_insert_with(QComplex::zero);
            *entry = entry.add(coeff);
        }
        self.terms.retain(|_, c| !c.is_zero());
        Self::new(self.dim, self.terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &QComplex)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms
            .keys()
            .any(|(a, b)| a.iter().all(|&x| x == 0) && b.iter().all(|&x| x == 0))
    }

    /// Total degree max(|alpha| + |beta|).
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(a, b)| a.iter().sum::<u32>() + b.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Compiles to floating-point coefficients for fast evaluation.
    pub fn compile<T: Real>(&self) -> FloatPoly<T> {
        FloatPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| (a.clone(), b.clone(), c.to_complex()))
                .collect(),
        }
    }

    /// Floating evaluation; the imaginary part cancels by symmetry.
    pub fn eval_f64(&self, z: &[Complex<f64>]) -> f64 {
        self.compile::<f64>().eval(z)
    }

    /// Exact evaluation at a rational point. Returns the (real) value.
    pub fn eval_exact(&self, z: &[QComplex]) -> Rational {
        assert_eq!(z.len(), self.dim);
        let mut acc = QComplex::zero();
        for ((alpha, beta), coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
                if a > 0 {
                    term = term.mul(&z[i].pow(a));
                }
                if b > 0 {
                    term = term.mul(&z[i].conj().pow(b));
                }
            }
            acc = acc.add(&term);
        }
        debug_assert!(acc.im.is_zero(), "Hermitian symmetry broken in eval");
        acc.re
    }

    /// Restriction P(a + z v) as an exact polynomial in (z, conj z).
    pub fn restrict_to_line(&self, a: &[QComplex], v: &[QComplex]) -> LinePolynomial {
        assert_eq!(a.len(), self.dim);
        assert_eq!(v.len(), self.dim);
        let mut out: BTreeMap<(u32, u32), QComplex> = BTreeMap::new();
        for ((alpha, beta), coeff) in &self.terms {
            // Holomorphic factor: prod (a_i + z v_i)^alpha_i as coeffs of z^j.
            let holo = expand_powers(a, v, alpha);
            // Anti-holomorphic factor: prod (conj a_i + conj z conj v_i)^beta_i.
            let conj_a: Vec<QComplex> = a.iter().map(QComplex::conj).collect();
            let conj_v: Vec<QComplex> = v.iter().map(QComplex::conj).collect();
            let anti = expand_powers(&conj_a, &conj_v, beta);
            for (j, cj) in holo.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                for (k, ck) in anti.iter().enumerate() {
                    if ck.is_zero() {
                        continue;
                    }
                    let add = coeff.mul(cj).mul(ck);
                    let entry = out
                        .entry((j as u32, k as u32))
                        .or_insert_with(QComplex::zero);
                    *entry = entry.add(&add);
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        LinePolynomial { terms: out }
    }

    /// Degree of z -> P(z v), grouping by powers and cancelling exactly.
    /// Returns 0 iff the restriction is identically zero.
    pub fn degree_along(&self, v: &[QComplex]) -> u32 {
        let origin = vec![QComplex::zero(); self.dim];
        self.restrict_to_line(&origin, v).degree()
    }

    /// Randomized soundness check that {P = 0} contains no complex affine
    /// line. A returned counterexample is certified by exact substitution;
    /// a pass is probabilistic.
    pub fn nondegeneracy(&self, trials: usize, seed: u64) -> Nondegeneracy {
        let mut rng = rng_from_seed(seed);
        let dim = self.dim;

        let mut directions: Vec<Vec<QComplex>> = Vec::new();
        for i in 0..dim {
            let mut v = vec![QComplex::zero(); dim];
            v[i] = QComplex::one();
            directions.push(v);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let mut v = vec![QComplex::zero(); dim];
                v[i] = QComplex::one();
                v[j] = QComplex::one();
                directions.push(v);
            }
        }
        for _ in 0..trials {
            directions.push((0..dim).map(|_| random_small_rational(&mut rng)).collect());
        }

        // Zero-set samples: the origin, plus coordinate-subset-zeroed random
        // points that happen to vanish exactly.
        let mut base_points: Vec<Vec<QComplex>> = vec![vec![QComplex::zero(); dim]];
        let subsets = 1usize << dim.min(5);
        for mask in 1..subsets {
            for _ in 0..2 {
                let pt: Vec<QComplex> = (0..dim)
                    .map(|i| {
                        if mask & (1 << i) != 0 {
                            QComplex::zero()
                        } else {
                            random_small_rational(&mut rng)
                        }
                    })
                    .collect();
                if self.eval_exact(&pt).is_zero() {
                    base_points.push(pt);
                }
            }
        }

        for point in &base_points {
            for v in &directions {
                if v.iter().all(|c| c.is_zero()) {
                    continue;
                }
                if self.restrict_to_line(point, v).is_zero() {
                    return Nondegeneracy::Counterexample {
                        point: point.clone(),
                        direction: v.clone(),
                    };
                }
            }
        }
        Nondegeneracy::Pass
    }

    /// Sampled nonnegativity probe on the unit polydisk scale.
    pub fn nonneg_probe(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = rng_from_seed(seed);
        let compiled = self.compile::<f64>();
        for _ in 0..samples {
            let z: Vec<Complex<f64>> = (0..self.dim)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            if compiled.eval(&z) < -1e-9 {
                return Err(Error::NotNonnegative);
            }
        }
        Ok(())
    }

    /// Sampled convexity probe: one-dimensional second differences on the
    /// unit polydisk scale must be nonnegative.
    pub fn convexity_probe(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = rng_from_seed(seed);
        let compiled = self.compile::<f64>();
        let h = 1e-3;
        for _ in 0..samples {
            let z: Vec<Complex<f64>> = (0..self.dim)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let u: Vec<Complex<f64>> = (0..self.dim)
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let shift = |s: f64| -> Vec<Complex<f64>> {
                z.iter().zip(&u).map(|(a, b)| a + b * s).collect()
            };
            let second = compiled.eval(&shift(h)) + compiled.eval(&shift(-h))
                - 2.0 * compiled.eval(&shift(0.0));
            if second < -1e-7 {
                return Err(Error::NotConvex);
            }
        }
        Ok(())
    }

    /// Weight of a term pair for the given coordinate degrees.
    pub fn weight(alpha: &[u32], beta: &[u32], degrees: &[u32]) -> Rational {
        let mut w = Rational::zero();
        for ((&a, &b), &m) in alpha.iter().zip(beta).zip(degrees) {
            w += rat_i64((a + b) as i64, m as i64);
        }
        w
    }

    /// Keeps exactly the weight-one terms for externally supplied degrees,
    /// failing on any term of weight above one. This is the term-by-term
    /// scaling-limit route used to cross-check [`Self::multitype`].
    pub fn scaling_limit_by_weights(&self, degrees: &[u32]) -> Result<HermitianPolynomial> {
        assert_eq!(degrees.len(), self.dim);
        let one = Rational::one();
        let mut terms = BTreeMap::new();
        for ((alpha, beta), coeff) in &self.terms {
            let w = Self::weight(alpha, beta, degrees);
            if w > one {
                return Err(Error::WeightExceedsOne {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    omega: w.to_string(),
                });
            }
            if w == one {
                terms.insert((alpha.clone(), beta.clone()), coeff.clone());
            }
        }
        HermitianPolynomial::new(self.dim, terms)
    }

    /// Coordinate degrees, weights, and the weighted-homogeneous limit
    /// polynomial. Requires adapted coordinates; rejects on any term of
    /// weight above one.
    pub fn multitype(&self) -> Result<MultiType> {
        if self.has_constant_term() {
            return Err(Error::ConstantTerm);
        }
        self.nonneg_probe(128, 11)?;
        self.convexity_probe(128, 12)?;
        if let Nondegeneracy::Counterexample { .. } = self.nondegeneracy(16, 13) {
            return Err(Error::DegeneratePolynomial);
        }

        let mut degrees = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut e = vec![QComplex::zero(); self.dim];
            e[i] = QComplex::one();
            degrees.push(self.degree_along(&e));
        }
        for i in 1..self.dim {
            if degrees[i] < degrees[i - 1] {
                return Err(Error::NotAdapted {
                    level: i,
                    got: degrees[i],
                    expected: degrees[i - 1],
                });
            }
        }

        // Randomized adaptedness check: on each filtration block, generic
        // vectors must realize the block degree.
        let mut rng = rng_from_seed(17);
        let mut distinct: Vec<u32> = degrees.clone();
        distinct.dedup();
        for (level, &deg) in distinct.iter().enumerate() {
            let block = degrees.iter().filter(|&&m| m <= deg).count();
            for _ in 0..ADAPTED_PROBES {
                let mut v = vec![QComplex::zero(); self.dim];
                for entry in v.iter_mut().take(block) {
                    *entry = random_small_rational(&mut rng);
                }
                if v.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let got = self.degree_along(&v);
                if got != deg {
                    return Err(Error::NotAdapted {
                        level,
                        got,
                        expected: deg,
                    });
                }
            }
        }

        let limit = self.scaling_limit_by_weights(&degrees)?;
        Ok(MultiType {
            weights: degrees,
            adapted: true,
            limit,
        })
    }

    /// Human-readable term list, mostly for error messages and reports.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for ((a, b), c) in &self.terms {
            let _ = write!(out, "[{:?}|{:?}]({},{}) ", a, b, c.re, c.im);
        }
        out.trim_end().to_string()
    }
}

/// Coefficients of prod_i (a_i + z v_i)^{k_i} as a polynomial in z.
fn expand_powers(a: &[QComplex], v: &[QComplex], exps: &[u32]) -> Vec<QComplex> {
    let mut acc = vec![QComplex::one()];
    for ((ai, vi), &k) in a.iter().zip(v).zip(exps) {
        for _ in 0..k {
            // multiply acc by (a_i + z v_i)
            let mut next = vec![QComplex::zero(); acc.len() + 1];
            for (j, c) in acc.iter().enumerate() {
                next[j] = next[j].add(&c.mul(ai));
                next[j + 1] = next[j + 1].add(&c.mul(vi));
            }
            acc = next;
        }
    }
    acc
}

fn random_small_rational(rng: &mut rand_chacha::ChaCha8Rng) -> QComplex {
    let part = |rng: &mut rand_chacha::ChaCha8Rng| {
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=4);
        rat_i64(num, den)
    };
    QComplex::new(part(rng), part(rng))
}

/// Restriction of a Hermitian polynomial to a complex line, kept exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePolynomial {
    terms: BTreeMap<(u32, u32), QComplex>,
}

impl LinePolynomial {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(j, k)| j + k).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &QComplex)> {
        self.terms.iter()
    }
}

/// Outcome of the randomized non-degeneracy check.
#[derive(Debug, Clone)]
pub enum Nondegeneracy {
    Pass,
    Counterexample {
        point: Vec<QComplex>,
        direction: Vec<QComplex>,
    },
}

/// Coordinate weights and the weighted-homogeneous limit polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiType {
    /// m_1 <= ... <= m_d.
    pub weights: Vec<u32>,
    /// The randomized adapted-coordinates check passed.
    pub adapted: bool,
    /// Terms of weight exactly one.
    pub limit: HermitianPolynomial,
}

/// Floating-point compiled form, used by domain membership and probes.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoly<T: Real> {
    dim: usize,
    terms: Vec<(MultiIndex, MultiIndex, Complex<T>)>,
}

impl<T: Real> FloatPoly<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, z: &[Complex<T>]) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (alpha, beta, coeff) in &self.terms {
            let mut term = *coeff;
            for (i, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
                for _ in 0..a {
                    term *= z[i];
                }
                for _ in 0..b {
                    term *= z[i].conj();
                }
            }
            acc += term;
        }
        acc.re
    }

    /// Holomorphic partial derivative d/dz_j, evaluated at z.
    pub fn d_dz(&self, j: usize, z: &[Complex<T>]) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for (alpha, beta, coeff) in &self.terms {
            let a_j = alpha[j];
            if a_j == 0 {
                continue;
            }
            let mut term = *coeff * T::of(a_j as f64);
            for (i, (&a, &b)) in alpha.iter().zip(beta).enumerate() {
                let a_pow = if i == j { a - 1 } else { a };
                for _ in 0..a_pow {
                    term *= z[i];
                }
                for _ in 0..b {
                    term *= z[i].conj();
                }
            }
            acc += term;
        }
        acc
    }
}

// --- file schema -----------------------------------------------------------

/// Serialized form: coefficients as rational strings "p/q".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolySpec {
    pub dim: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: String,
    pub im: String,
}

impl PolySpec {
    pub fn to_polynomial(&self) -> Result<HermitianPolynomial> {
        let mut terms = BTreeMap::new();
        for t in &self.terms {
            let coeff = QComplex::new(parse_rational(&t.re)?, parse_rational(&t.im)?);
            if terms
                .insert((t.alpha.clone(), t.beta.clone()), coeff)
                .is_some()
            {
                return Err(Error::BadSpec {
                    reason: format!("duplicate term alpha={:?} beta={:?}", t.alpha, t.beta),
                });
            }
        }
        HermitianPolynomial::new(self.dim, terms)
    }

    pub fn from_polynomial(p: &HermitianPolynomial) -> Self {
        Self {
            dim: p.dim(),
            terms: p
                .terms()
                .map(|((a, b), c)| TermSpec {
                    alpha: a.clone(),
                    beta: b.clone(),
                    re: c.re.to_string(),
                    im: c.im.to_string(),
                })
                .collect(),
        }
    }
}
