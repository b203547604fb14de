//! Finite line type and m-convexity estimation.
//!
//! The line type at a boundary point x is the largest order of vanishing of
//! a defining function along complex affine lines tangent at x. It is
//! estimated by sampling complex tangent directions and regressing
//! log |r(x + rho e^{i theta} v)| (phase-averaged) against log rho over a
//! dyadic radius ladder; orders are rounded to even integers since convex
//! nonnegative restrictions vanish to even order.
//!
//! m-convexity measures the flattest boundary direction: delta(p; v) <= C
//! delta(p)^(1/m) on bounded regions. The estimator layers sample points at
//! boundary distances 2^-k and reports the largest observed ratio; a ratio
//! that keeps doubling as the layers deepen flags that the set is not
//! locally m-convex at that m.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::{orthonormalize, project_out, CVector};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::params::{LINE_TYPE_RHO_MAX_EXP, LINE_TYPE_RHO_MIN_EXP, MCONVEX_MAX_LAYER};
use crate::sampling::{random_direction, rng_for_index, rng_from_seed};
use crate::scalar::Real;

/// Defining-function value r(z): negative inside, zero on the boundary.
/// For intersections this is the max over parts.
pub fn defining_value<T: Real>(dom: &Domain<T>, z: &CVector<T>) -> T {
    match dom {
        Domain::Ball { center, radius } => z.sub(center).norm_sq() - *radius * *radius,
        Domain::Polydisk { center, radii } => {
            let mut worst = T::neg_infinity();
            for (i, r) in radii.iter().enumerate() {
                let v = (z.coord(i) - center.coord(i)).norm_sqr() - *r * *r;
                if v > worst {
                    worst = v;
                }
            }
            worst
        }
        Domain::HalfSpace { normal, offset } => *offset - z.dot_re(normal),
        Domain::PolynomialGraph { compiled, .. } => {
            compiled.eval(&z.coords()[1..]) - z.coord(0).re
        }
        Domain::AffineImage { inv, base, .. } => match inv.apply(z) {
            Ok(w) => defining_value(base, &w),
            Err(_) => T::infinity(),
        },
        Domain::Intersection { parts } => {
            let mut worst = T::neg_infinity();
            for part in parts {
                let v = defining_value(part, z);
                if v > worst {
                    worst = v;
                }
            }
            worst
        }
    }
}

/// Holomorphic partials (dr/dz_1, ..., dr/dz_d) of the defining function,
/// using the active piece for polydisks and intersections.
pub fn defining_gradient<T: Real>(dom: &Domain<T>, z: &CVector<T>) -> CVector<T> {
    let d = dom.dim();
    match dom {
        Domain::Ball { center, .. } => {
            CVector::new(z.coords().iter().zip(center.coords()).map(|(a, c)| (a - c).conj()).collect())
                .expect("dim >= 1")
        }
        Domain::Polydisk { center, radii } => {
            let mut best = (T::neg_infinity(), 0);
            for (i, r) in radii.iter().enumerate() {
                let v = (z.coord(i) - center.coord(i)).norm_sqr() - *r * *r;
                if v > best.0 {
                    best = (v, i);
                }
            }
            let mut g = CVector::zero(d);
            g.set_coord(best.1, (z.coord(best.1) - center.coord(best.1)).conj());
            g
        }
        Domain::HalfSpace { normal, .. } => {
            CVector::new(normal.coords().iter().map(|n| -n.conj() * T::of(0.5)).collect())
                .expect("dim >= 1")
        }
        Domain::PolynomialGraph { compiled, .. } => {
            let tail = &z.coords()[1..];
            let mut g = CVector::zero(d);
            g.set_coord(0, Complex::new(-T::of(0.5), T::zero()));
            for j in 1..d {
                g.set_coord(j, compiled.d_dz(j - 1, tail));
            }
            g
        }
        Domain::AffineImage { inv, base, .. } => {
            let w = match inv.apply(z) {
                Ok(w) => w,
                Err(_) => return CVector::zero(d),
            };
            let gw = defining_gradient(base, &w);
            // chain rule through the holomorphic map w = Bz + c
            let mut out = CVector::zero(d);
            for i in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += gw.coord(k) * inv.linear.entry(k, i);
                }
                out.set_coord(i, acc);
            }
            out
        }
        Domain::Intersection { parts } => {
            let mut best: (T, &Domain<T>) = (T::neg_infinity(), &parts[0]);
            for part in parts {
                let v = defining_value(part, z);
                if v > best.0 {
                    best = (v, part);
                }
            }
            defining_gradient(best.1, z)
        }
    }
}

/// Estimated line type at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LineType {
    Finite(u32),
    /// The vanishing order exceeds the cap (or the restriction vanishes
    /// identically, e.g. along a boundary line).
    AtLeast(u32),
}

/// Estimates the line type at x by log-log regression of the defining
/// function along sampled complex tangent directions.
pub fn line_type<T: Real>(dom: &Domain<T>, x: &CVector<T>, cap: u32, seed: u64) -> Result<LineType> {
    x.check_dim(dom.dim())?;
    let d = dom.dim();

    // boundary membership: r small and membership flips along the normal
    let grad = defining_gradient(dom, x);
    let grad_norm = grad.norm();
    if grad_norm <= T::of(1e-12) {
        return Err(Error::NotOnBoundary {
            residual: f64::INFINITY,
        });
    }
    // real gradient of r is 2 conj(dr/dz)
    let normal = CVector::new(grad.coords().iter().map(|g| g.conj()).collect())
        .expect("dim checked")
        .scale(T::one() / grad_norm);
    let eps = T::of(1e-6) * (T::one() + x.norm());
    let inside = x.add(&normal.scale(-eps));
    let outside = x.add(&normal.scale(eps));
    if !dom.contains(&inside) || dom.contains(&outside) {
        let residual = defining_value(dom, x).abs().to_f64_lossy();
        return Err(Error::NotOnBoundary { residual });
    }

    if d == 1 {
        // no complex tangent directions in dimension one
        return Ok(LineType::Finite(2).min_cap(cap));
    }

    // complex tangent space: Hermitian complement of conj(grad)
    let conj_grad = CVector::new(grad.coords().iter().map(|g| g.conj()).collect())
        .expect("dim checked");
    let mut span = vec![conj_grad];
    for i in 0..d {
        span.push(CVector::axis(d, i, Complex::new(T::one(), T::zero())));
        span.push(CVector::axis(d, i, Complex::new(T::zero(), T::one())));
    }
    let frame = orthonormalize(&span, T::of(1e-9));
    let tangent = &frame[1..];

    let mut rng = rng_from_seed(seed);
    let mut directions: Vec<CVector<T>> = tangent.to_vec();
    for _ in 0..8 {
        let mut v = CVector::zero(d);
        for b in tangent {
            let re = T::of(rand::Rng::gen_range(&mut rng, -1.0..1.0f64));
            let im = T::of(rand::Rng::gen_range(&mut rng, -1.0..1.0f64));
            v = v.add(&b.scale_c(Complex::new(re, im)));
        }
        if let Ok(u) = v.normalized() {
            directions.push(u);
        }
    }

    let phases = 16usize;
    let mut worst: u32 = 0;
    for v in &directions {
        let mut xs: Vec<T> = Vec::new();
        let mut ys: Vec<T> = Vec::new();
        let mut top_value = T::zero();
        for e in LINE_TYPE_RHO_MIN_EXP..=LINE_TYPE_RHO_MAX_EXP {
            let rho = T::of(2.0).powi(e);
            let mut mean = T::zero();
            for k in 0..phases {
                let theta = T::PI() * T::of(2.0 * k as f64 / phases as f64);
                let zeta = Complex::from_polar(rho, theta);
                let pt = x.add(&v.scale_c(zeta));
                mean += defining_value(dom, &pt).abs();
            }
            mean /= T::of(phases as f64);
            if e == LINE_TYPE_RHO_MAX_EXP {
                top_value = mean;
            }
            if mean > T::of(1e-280) {
                xs.push(rho.ln());
                ys.push(mean.ln());
            }
        }
        // identically vanishing restriction: a boundary line through x
        if top_value < T::of(1e-14) {
            return Ok(LineType::AtLeast(cap));
        }
        if xs.len() < 4 {
            return Ok(LineType::AtLeast(cap));
        }
        let slope = regression_slope(&xs, &ys);
        if slope > T::of(cap as f64) + T::of(0.5) {
            return Ok(LineType::AtLeast(cap));
        }
        let rounded = ((slope / T::of(2.0)).round() * T::of(2.0))
            .max(T::of(2.0))
            .to_f64_lossy() as u32;
        if rounded > worst {
            worst = rounded;
        }
    }
    if worst > cap {
        return Ok(LineType::AtLeast(cap));
    }
    Ok(LineType::Finite(worst))
}

impl LineType {
    fn min_cap(self, cap: u32) -> LineType {
        match self {
            LineType::Finite(v) if v > cap => LineType::AtLeast(cap),
            other => other,
        }
    }
}

fn regression_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n = T::of(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut num = T::zero();
    let mut den = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        num += (*x - mx) * (*y - my);
        den += (*x - mx) * (*x - mx);
    }
    num / den
}

/// Layered m-convexity estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MConvexityReport<T: Real> {
    pub m: u32,
    pub c_est: T,
    /// Largest ratio per boundary layer 2^-k.
    pub per_layer: Vec<LayerStat<T>>,
    /// The per-layer maxima keep growing geometrically toward the boundary:
    /// evidence that the set is not locally m-convex at this m.
    pub escaping: bool,
    pub seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LayerStat<T: Real> {
    pub k: u32,
    pub max_ratio: T,
    pub count: usize,
}

/// Empirical sup of delta(p; v) / delta(p)^(1/m) over layered samples of
/// Omega n B_R(0).
pub fn m_convexity_constant<T: Real>(
    dom: &Domain<T>,
    m: u32,
    radius: T,
    samples: usize,
    seed: u64,
) -> Result<MConvexityReport<T>> {
    dom.require_carrier()?;
    if m == 0 || samples == 0 {
        return Err(Error::EmptySample);
    }
    let anchor = dom.deep_point(radius, seed)?;
    if anchor.norm() > radius {
        return Err(Error::NoInteriorSample);
    }

    let layers: Vec<u32> = (1..=MCONVEX_MAX_LAYER).collect();
    let per = (samples / layers.len()).max(1);
    let inv_m = T::one() / T::of(m as f64);

    let mut per_layer = Vec::new();
    let mut c_est = T::zero();
    let mut used = 0usize;
    for &k in &layers {
        let offset = T::of(2.0).powi(-(k as i32));
        let mut layer_max = T::zero();
        let mut count = 0usize;
        for j in 0..per {
            let mut rng = rng_for_index(seed, (k as u64) << 32 | j as u64);
            let u = random_direction::<T>(&mut rng, dom.dim());
            let Some(t_hit) = dom.ray_hit(&anchor, &u) else {
                continue;
            };
            if offset >= t_hit * T::of(0.5) {
                continue;
            }
            let p = anchor.add_scaled(&u, t_hit - offset);
            if !dom.contains(&p) || p.norm() > radius {
                continue;
            }
            let dp = dom.boundary_distance(&p)?;
            if !(dp > T::zero()) {
                continue;
            }
            let denom = dp.powf(inv_m);

            let mut dirs: Vec<CVector<T>> = vec![u.clone()];
            for _ in 0..3 {
                dirs.push(random_direction::<T>(&mut rng, dom.dim()));
            }
            for _ in 0..2 {
                let w = random_direction::<T>(&mut rng, dom.dim());
                if let Ok(t) = project_out(&w, &u).normalized() {
                    dirs.push(t);
                }
            }
            for v in &dirs {
                let dv = dom.dir_boundary_distance(&p, v)?;
                if !dv.is_finite() {
                    continue;
                }
                let ratio = dv.distance / denom;
                if ratio > layer_max {
                    layer_max = ratio;
                }
            }
            count += 1;
            used += 1;
        }
        if layer_max > c_est {
            c_est = layer_max;
        }
        per_layer.push(LayerStat {
            k,
            max_ratio: layer_max,
            count,
        });
    }
    if used == 0 {
        return Err(Error::NoInteriorSample);
    }

    // escape detection: slope of log2(max ratio) against k
    let pts: Vec<(T, T)> = per_layer
        .iter()
        .filter(|l| l.max_ratio > T::zero() && l.count > 0)
        .map(|l| (T::of(l.k as f64), l.max_ratio.log2()))
        .collect();
    let escaping = if pts.len() >= 4 {
        let xs: Vec<T> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<T> = pts.iter().map(|p| p.1).collect();
        regression_slope(&xs, &ys) > T::of(0.2)
    } else {
        false
    };

    Ok(MConvexityReport {
        m,
        c_est,
        per_layer,
        escaping,
        seed,
        samples: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::HermitianPolynomial;

    type D = Domain<f64>;
    type V = CVector<f64>;

    fn cv(pairs: &[(f64, f64)]) -> V {
        V::from_pairs(pairs).unwrap()
    }

    #[test]
    fn ball_boundary_points_have_type_two() {
        let ball = D::unit_ball(2);
        let lt = line_type(&ball, &cv(&[(1.0, 0.0), (0.0, 0.0)]), 16, 1).unwrap();
        assert_eq!(lt, LineType::Finite(2));
        // a handful of random boundary points
        let mut rng = rng_from_seed(8);
        for _ in 0..10 {
            let u = random_direction::<f64>(&mut rng, 2);
            let lt = line_type(&ball, &u, 16, 2).unwrap();
            assert_eq!(lt, LineType::Finite(2));
        }
    }

    #[test]
    fn quartic_graph_has_type_four() {
        let p = HermitianPolynomial::modulus_monomial(1, &[2], 1); // |z1|^4
        let dom = D::polynomial_graph(p).unwrap();
        let lt = line_type(&dom, &V::zero(2), 16, 3).unwrap();
        assert_eq!(lt, LineType::Finite(4));
    }

    #[test]
    fn flat_face_reports_at_least_cap() {
        // bidisk-like set with a genuinely flat boundary face Re z0 = 1
        let slab = D::intersection(vec![
            D::half_space(cv(&[(-1.0, 0.0), (0.0, 0.0)]), -1.0).unwrap(), // Re z0 < 1
            D::half_space(cv(&[(1.0, 0.0), (0.0, 0.0)]), -1.0).unwrap(),  // Re z0 > -1
            D::polydisk(V::zero(2), vec![5.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let x = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        assert!(slab.contains(&cv(&[(0.0, 0.0), (0.0, 0.0)])));
        assert!(!slab.contains(&x));
        let lt = line_type(&slab, &x, 8, 4).unwrap();
        assert_eq!(lt, LineType::AtLeast(8));
    }

    #[test]
    fn interior_point_rejected() {
        let ball = D::unit_ball(2);
        assert!(matches!(
            line_type(&ball, &cv(&[(0.5, 0.0), (0.0, 0.0)]), 8, 0),
            Err(Error::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn ball_is_two_convex_but_not_one_convex() {
        let ball = D::unit_ball(2);
        let rep2 = m_convexity_constant(&ball, 2, 2.0, 2000, 5).unwrap();
        assert!(rep2.c_est <= 2.0, "c_est = {}", rep2.c_est);
        assert!(!rep2.escaping);

        let rep1 = m_convexity_constant(&ball, 1, 2.0, 2000, 5).unwrap();
        assert!(rep1.escaping, "per layer: {:?}", rep1.per_layer);
    }

    #[test]
    fn deepest_ratio_included_trivially() {
        // delta(p; v) >= delta(p), so delta(p)^(1-1/m) is always reached
        let ball = D::unit_ball(2);
        let rep = m_convexity_constant(&ball, 2, 2.0, 500, 6).unwrap();
        assert!(rep.c_est >= 0.0 && rep.samples > 0);
    }
}
