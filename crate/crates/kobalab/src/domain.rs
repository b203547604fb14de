//! Convex open sets in C^d with membership, boundary-hit, and
//! closest-point queries.
//!
//! Boundary distances come in two flavours. `boundary_distance` is the
//! Euclidean distance to the complement. `dir_boundary_distance(p, v)` is the
//! distance to the complement inside the complex line p + C v, so it takes an
//! infimum over the phase circle, not just the real ray. Ball, polydisk, and
//! half-space queries are closed-form; affine images pull back exactly
//! (complex lines map to complex lines with one scaling factor); polynomial
//! graphs fall back to bracketing plus bisection on the defining sign oracle.

use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{orthonormalize, CVector};
use crate::error::{Error, Result};
use crate::linalg::{AffineMap, CMatrix};
use crate::opt::{bisect_flip, golden_min, nelder_mead};
use crate::params::{
    BOUNDARY_RESIDUAL, CLOSEST_POINT_DIRECTIONS, PHASE_GRID, RAY_R_MAX,
};
use crate::poly::{FloatPoly, HermitianPolynomial, Nondegeneracy, PolySpec};
use crate::sampling::{fibonacci_sphere_grid, rng_from_seed, structured_directions};
use crate::scalar::Real;

/// A point on (or within residual of) the boundary, reached along a ray.
#[derive(Debug, Clone)]
pub struct BoundaryHit<T: Real> {
    /// Parameter along the ray (Euclidean distance for unit directions).
    pub t_hit: T,
    pub point: CVector<T>,
    /// Membership flips across a segment of at most this length.
    pub bracket_width: T,
}

/// Distance to the complement within a complex line; `hit` is `None` when no
/// hit exists within the search radius (the set contains the whole line).
#[derive(Debug, Clone)]
pub struct DirDistance<T: Real> {
    pub distance: T,
    pub hit: Option<BoundaryHit<T>>,
}

impl<T: Real> DirDistance<T> {
    fn infinite() -> Self {
        Self {
            distance: T::infinity(),
            hit: None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.distance.is_finite()
    }
}

/// Tagged description of a convex open set.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain<T: Real> {
    Ball {
        center: CVector<T>,
        radius: T,
    },
    Polydisk {
        center: CVector<T>,
        radii: Vec<T>,
    },
    /// { z : Re<z, normal> > offset }. Not C-proper on its own in dimension
    /// two and up; usable as an intersection factor, or as the half-plane
    /// model in dimension one.
    HalfSpace {
        normal: CVector<T>,
        offset: T,
    },
    /// { Re z_0 > P(z_1, ..., z_{d-1}) } for a Hermitian polynomial P.
    PolynomialGraph {
        poly: HermitianPolynomial,
        compiled: FloatPoly<T>,
        nondegenerate: bool,
    },
    AffineImage {
        map: AffineMap<T>,
        inv: AffineMap<T>,
        base: Box<Domain<T>>,
    },
    Intersection {
        parts: Vec<Domain<T>>,
    },
}

impl<T: Real> Domain<T> {
    pub fn ball(center: CVector<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::BadSpec {
                reason: "ball radius must be positive and finite".into(),
            });
        }
        Ok(Self::Ball { center, radius })
    }

    /// Unit ball centered at the origin; in dimension one, the unit disk.
    pub fn unit_ball(dim: usize) -> Self {
        Self::Ball {
            center: CVector::zero(dim),
            radius: T::one(),
        }
    }

    pub fn unit_disk() -> Self {
        Self::unit_ball(1)
    }

    pub fn polydisk(center: CVector<T>, radii: Vec<T>) -> Result<Self> {
        if radii.len() != center.dim() {
            return Err(Error::DimensionMismatch {
                expected: center.dim(),
                got: radii.len(),
            });
        }
        if radii.iter().any(|r| !(*r > T::zero()) || !r.is_finite()) {
            return Err(Error::BadSpec {
                reason: "polydisk radii must be positive and finite".into(),
            });
        }
        Ok(Self::Polydisk { center, radii })
    }

    pub fn unit_bidisk() -> Self {
        Self::Polydisk {
            center: CVector::zero(2),
            radii: vec![T::one(), T::one()],
        }
    }

    pub fn half_space(normal: CVector<T>, offset: T) -> Result<Self> {
        if normal.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(Self::HalfSpace { normal, offset })
    }

    /// Upper half plane { Im z > 0 } in C^1.
    pub fn upper_half_plane() -> Self {
        Self::HalfSpace {
            normal: CVector::from_reals(&[T::zero(), T::one()]),
            offset: T::zero(),
        }
    }

    pub fn polynomial_graph(poly: HermitianPolynomial) -> Result<Self> {
        if poly.has_constant_term() {
            return Err(Error::ConstantTerm);
        }
        poly.nonneg_probe(64, 23)?;
        let nondegenerate = matches!(poly.nondegeneracy(8, 29), Nondegeneracy::Pass);
        let compiled = poly.compile();
        Ok(Self::PolynomialGraph {
            poly,
            compiled,
            nondegenerate,
        })
    }

    pub fn affine_image(map: AffineMap<T>, base: Domain<T>) -> Result<Self> {
        if map.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: map.dim(),
            });
        }
        let inv = map.inverse()?;
        Ok(Self::AffineImage {
            map,
            inv,
            base: Box::new(base),
        })
    }

    pub fn intersection(parts: Vec<Domain<T>>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::BadSpec {
                reason: "intersection needs at least one part".into(),
            });
        };
        let dim = first.dim();
        for p in &parts {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
        }
        Ok(Self::Intersection { parts })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.dim(),
            Self::Polydisk { center, .. } => center.dim(),
            Self::HalfSpace { normal, .. } => normal.dim(),
            Self::PolynomialGraph { compiled, .. } => compiled.dim() + 1,
            Self::AffineImage { base, .. } => base.dim(),
            Self::Intersection { parts } => parts[0].dim(),
        }
    }

    /// Open-set membership.
    pub fn contains(&self, p: &CVector<T>) -> bool {
        debug_assert_eq!(p.dim(), self.dim());
        match self {
            Self::Ball { center, radius } => p.dist(center) < *radius,
            Self::Polydisk { center, radii } => p
                .coords()
                .iter()
                .zip(center.coords())
                .zip(radii)
                .all(|((z, c), r)| (z - c).norm() < *r),
            Self::HalfSpace { normal, offset } => p.dot_re(normal) > *offset,
            Self::PolynomialGraph { compiled, .. } => {
                p.coord(0).re > compiled.eval(&p.coords()[1..])
            }
            Self::AffineImage { inv, base, .. } => match inv.apply(p) {
                Ok(q) => base.contains(&q),
                Err(_) => false,
            },
            Self::Intersection { parts } => parts.iter().all(|d| d.contains(p)),
        }
    }

    pub fn contains_checked(&self, p: &CVector<T>) -> Result<bool> {
        p.check_dim(self.dim())?;
        Ok(self.contains(p))
    }

    /// Whether the set can carry the metric computations: it must not
    /// contain a complex affine line. Conservative static analysis; a
    /// half-space qualifies only in dimension one, an intersection through
    /// any qualifying part, a polynomial graph through non-degeneracy.
    pub fn is_metric_carrier(&self) -> bool {
        match self {
            Self::Ball { .. } | Self::Polydisk { .. } => true,
            Self::HalfSpace { normal, .. } => normal.dim() == 1,
            Self::PolynomialGraph { nondegenerate, .. } => *nondegenerate,
            Self::AffineImage { base, .. } => base.is_metric_carrier(),
            Self::Intersection { parts } => parts.iter().any(|d| d.is_metric_carrier()),
        }
    }

    pub fn require_carrier(&self) -> Result<()> {
        if self.is_metric_carrier() {
            Ok(())
        } else {
            Err(Error::NotCProper {
                reason: "set contains (or may contain) a complex affine line",
            })
        }
    }

    pub fn require_member(&self, p: &CVector<T>) -> Result<()> {
        p.check_dim(self.dim())?;
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain)
        }
    }

    /// First exit parameter of the ray p + t u (t > 0), assuming p inside.
    /// `None` when the ray stays inside up to the search radius.
    pub fn ray_hit(&self, p: &CVector<T>, u: &CVector<T>) -> Option<T> {
        match self {
            Self::Ball { center, radius } => {
                let rel = p.sub(center);
                let a = u.norm_sq();
                let b = T::of(2.0) * rel.dot_re(u);
                let c = rel.norm_sq() - *radius * *radius;
                let disc = b * b - T::of(4.0) * a * c;
                if disc <= T::zero() {
                    return None;
                }
                Some((-b + disc.sqrt()) / (T::of(2.0) * a))
            }
            Self::Polydisk { center, radii } => {
                let mut best: Option<T> = None;
                for (i, r) in radii.iter().enumerate() {
                    let ui = u.coord(i);
                    if ui.norm() == T::zero() {
                        continue;
                    }
                    let rel = p.coord(i) - center.coord(i);
                    let a = ui.norm_sqr();
                    let b = T::of(2.0) * (rel * ui.conj()).re;
                    let cc = rel.norm_sqr() - *r * *r;
                    let disc = b * b - T::of(4.0) * a * cc;
                    if disc <= T::zero() {
                        continue;
                    }
                    let t = (-b + disc.sqrt()) / (T::of(2.0) * a);
                    best = Some(match best {
                        Some(old) if old < t => old,
                        _ => t,
                    });
                }
                best
            }
            Self::HalfSpace { normal, offset } => {
                let slope = u.dot_re(normal);
                if slope >= T::zero() {
                    return None;
                }
                Some((*offset - p.dot_re(normal)) / slope)
            }
            Self::AffineImage { inv, base, .. } => {
                let p0 = inv.apply(p).ok()?;
                let u0 = inv.apply_linear(u).ok()?;
                base.ray_hit(&p0, &u0)
            }
            Self::Intersection { parts } => {
                let mut best: Option<T> = None;
                for d in parts {
                    if let Some(t) = d.ray_hit(p, u) {
                        best = Some(match best {
                            Some(old) if old < t => old,
                            _ => t,
                        });
                    }
                }
                best
            }
            Self::PolynomialGraph { .. } => self.ray_hit_bisect(p, u),
        }
    }

    /// Generic sign-oracle hit: geometric expansion then bisection.
    fn ray_hit_bisect(&self, p: &CVector<T>, u: &CVector<T>) -> Option<T> {
        let un = u.norm();
        if un == T::zero() {
            return None;
        }
        let t_max = T::of(RAY_R_MAX) / un;
        let mut lo = T::zero();
        let mut t = T::of(1e-3) / un;
        loop {
            if t > t_max {
                return None;
            }
            if self.contains(&p.add_scaled(u, t)) {
                lo = t;
                t *= T::of(2.0);
            } else {
                break;
            }
        }
        let tol = T::of(BOUNDARY_RESIDUAL) / un;
        Some(bisect_flip(lo, t, tol, |s| {
            self.contains(&p.add_scaled(u, s))
        }))
    }

    fn hit_from_t(&self, p: &CVector<T>, u: &CVector<T>, t: T, width: T) -> BoundaryHit<T> {
        BoundaryHit {
            t_hit: t,
            point: p.add_scaled(u, t),
            bracket_width: width,
        }
    }

    /// Distance from p to the complement within the complex line p + C v,
    /// with the realizing hit.
    pub fn dir_boundary_distance(&self, p: &CVector<T>, v: &CVector<T>) -> Result<DirDistance<T>> {
        self.require_member(p)?;
        v.check_dim(self.dim())?;
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        Ok(self.dir_distance_inner(p, v))
    }

    fn dir_distance_inner(&self, p: &CVector<T>, v: &CVector<T>) -> DirDistance<T> {
        let vn = v.norm();
        match self {
            Self::Ball { center, radius } => {
                // The slice of a ball along a complex line is a round disk.
                let zeta = center.sub(p).dot(v) / v.norm_sq();
                let foot = p.add(&v.scale_c(zeta));
                let h2 = center.sub(&foot).norm_sq();
                let r_line = (*radius * *radius - h2).max(T::zero()).sqrt();
                let off = p.sub(&foot).norm();
                let dist = r_line - off;
                let dir = if off > T::of(1e-300) {
                    p.sub(&foot).scale(T::one() / off)
                } else {
                    v.scale(T::one() / vn)
                };
                let point = foot.add(&dir.scale(r_line));
                DirDistance {
                    distance: dist,
                    hit: Some(BoundaryHit {
                        t_hit: dist,
                        point,
                        bracket_width: T::of(BOUNDARY_RESIDUAL),
                    }),
                }
            }
            Self::Polydisk { center, radii } => {
                // Per factor, |p_i + zeta v_i - c_i| < r_i is a disk in the
                // zeta plane; the distance to the complement of the
                // intersection is the smallest margin.
                let mut best: Option<(T, Complex<T>)> = None;
                for (i, r) in radii.iter().enumerate() {
                    let vi = v.coord(i);
                    if vi.norm() == T::zero() {
                        continue;
                    }
                    let w = (center.coord(i) - p.coord(i)) / vi;
                    let rho = *r / vi.norm();
                    let margin = rho - w.norm();
                    let zeta = if w.norm() > T::of(1e-300) {
                        w - w * (rho / w.norm())
                    } else {
                        Complex::new(rho, T::zero())
                    };
                    if best.as_ref().is_none_or(|(m, _)| margin < *m) {
                        best = Some((margin, zeta));
                    }
                }
                match best {
                    Some((margin, zeta)) => {
                        let point = p.add(&v.scale_c(zeta));
                        DirDistance {
                            distance: margin * vn,
                            hit: Some(BoundaryHit {
                                t_hit: margin * vn,
                                point,
                                bracket_width: T::of(BOUNDARY_RESIDUAL),
                            }),
                        }
                    }
                    None => DirDistance::infinite(),
                }
            }
            Self::HalfSpace { normal, offset } => {
                let gap = p.dot_re(normal) - *offset;
                let beta = v.dot(normal);
                if beta.norm() <= T::of(1e-300) {
                    return DirDistance::infinite();
                }
                let zeta = -beta.conj() * (gap / beta.norm_sqr());
                let point = p.add(&v.scale_c(zeta));
                let dist = gap / beta.norm() * vn;
                DirDistance {
                    distance: dist,
                    hit: Some(BoundaryHit {
                        t_hit: dist,
                        point,
                        bracket_width: T::of(BOUNDARY_RESIDUAL),
                    }),
                }
            }
            Self::AffineImage { map, inv, base } => {
                // The line pulls back to a line with one uniform scaling:
                // delta scales by |v| / |A^-1 v|.
                let p0 = match inv.apply(p) {
                    Ok(x) => x,
                    Err(_) => return DirDistance::infinite(),
                };
                let v0 = match inv.apply_linear(v) {
                    Ok(x) => x,
                    Err(_) => return DirDistance::infinite(),
                };
                let inner = base.dir_distance_inner(&p0, &v0);
                let scale = vn / v0.norm();
                DirDistance {
                    distance: inner.distance * scale,
                    hit: inner.hit.and_then(|h| {
                        let point = map.apply(&h.point).ok()?;
                        Some(BoundaryHit {
                            t_hit: h.t_hit * scale,
                            point,
                            bracket_width: h.bracket_width * scale.max(T::one()),
                        })
                    }),
                }
            }
            Self::Intersection { parts } => {
                let mut best = DirDistance::infinite();
                for d in parts {
                    let cand = d.dir_distance_inner(p, v);
                    if cand.distance < best.distance {
                        best = cand;
                    }
                }
                best
            }
            Self::PolynomialGraph { .. } => self.dir_distance_phase_scan(p, v),
        }
    }

    /// Phase-grid scan with golden refinement for sign-oracle domains.
    fn dir_distance_phase_scan(&self, p: &CVector<T>, v: &CVector<T>) -> DirDistance<T> {
        let vn = v.norm();
        let vhat = v.scale(T::one() / vn);
        let hit_at = |theta: T| -> Option<T> {
            let phase = Complex::from_polar(T::one(), theta);
            self.ray_hit(p, &vhat.scale_c(phase))
        };
        let two_pi = T::PI() * T::of(2.0);
        let mut best: Option<(T, T)> = None;
        for k in 0..PHASE_GRID {
            let theta = two_pi * T::of(k as f64) / T::of(PHASE_GRID as f64);
            if let Some(t) = hit_at(theta) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, theta));
                }
            }
        }
        let Some((_, theta0)) = best else {
            return DirDistance::infinite();
        };
        let step = two_pi / T::of(PHASE_GRID as f64);
        let big = T::of(RAY_R_MAX);
        let (theta_best, t_best) = golden_min(theta0 - step, theta0 + step, 32, |th| {
            hit_at(th).unwrap_or(big)
        });
        let phase = Complex::from_polar(T::one(), theta_best);
        let dir = vhat.scale_c(phase);
        DirDistance {
            distance: t_best,
            hit: Some(self.hit_from_t(p, &dir, t_best, T::of(BOUNDARY_RESIDUAL))),
        }
    }

    /// Euclidean distance from p to the complement.
    pub fn boundary_distance(&self, p: &CVector<T>) -> Result<T> {
        self.require_member(p)?;
        Ok(self.boundary_distance_inner(p))
    }

    fn boundary_distance_inner(&self, p: &CVector<T>) -> T {
        match self {
            Self::Ball { center, radius } => *radius - p.dist(center),
            Self::Polydisk { center, radii } => {
                let mut best = T::infinity();
                for ((z, c), r) in p.coords().iter().zip(center.coords()).zip(radii) {
                    let m = *r - (z - c).norm();
                    if m < best {
                        best = m;
                    }
                }
                best
            }
            Self::HalfSpace { normal, offset } => {
                (p.dot_re(normal) - *offset) / normal.norm()
            }
            Self::Intersection { parts } => {
                let mut best = T::infinity();
                for d in parts {
                    let m = d.boundary_distance_inner(p);
                    if m < best {
                        best = m;
                    }
                }
                best
            }
            Self::AffineImage { .. } | Self::PolynomialGraph { .. } => {
                self.closest_boundary_search(p).0
            }
        }
    }

    /// Closest boundary point; analytic for balls, polydisks, half-spaces,
    /// otherwise a deterministic multi-start direction search. Ties broken
    /// by the first direction in the fixed sampling order.
    pub fn closest_boundary_point(&self, p: &CVector<T>) -> Result<CVector<T>> {
        self.require_member(p)?;
        Ok(self.closest_boundary_point_inner(p))
    }

    fn closest_boundary_point_inner(&self, p: &CVector<T>) -> CVector<T> {
        match self {
            Self::Ball { center, radius } => {
                let rel = p.sub(center);
                let n = rel.norm();
                if n > T::of(1e-300) {
                    center.add(&rel.scale(*radius / n))
                } else {
                    let dir = &fibonacci_sphere_grid::<T>(1, self.dim())[0];
                    center.add(&dir.scale(*radius))
                }
            }
            Self::Polydisk { center, radii } => {
                let mut best_i = 0;
                let mut best_m = T::infinity();
                for (i, r) in radii.iter().enumerate() {
                    let m = *r - (p.coord(i) - center.coord(i)).norm();
                    if m < best_m {
                        best_m = m;
                        best_i = i;
                    }
                }
                let mut out = p.clone();
                let rel = p.coord(best_i) - center.coord(best_i);
                let rn = rel.norm();
                let new = if rn > T::of(1e-300) {
                    center.coord(best_i) + rel * (radii[best_i] / rn)
                } else {
                    center.coord(best_i) + Complex::new(radii[best_i], T::zero())
                };
                out.set_coord(best_i, new);
                out
            }
            Self::HalfSpace { normal, offset } => {
                let nhat = normal.scale(T::one() / normal.norm());
                let gap = (p.dot_re(normal) - *offset) / normal.norm();
                p.sub(&nhat.scale(gap))
            }
            _ => self.closest_boundary_search(p).1,
        }
    }

    /// Multi-start direction search over the real unit sphere of R^{2d},
    /// refined by Nelder-Mead in a tangent chart.
    fn closest_boundary_search(&self, p: &CVector<T>) -> (T, CVector<T>) {
        let dim = self.dim();
        let mut dirs = structured_directions::<T>(dim);
        let negs: Vec<_> = dirs.iter().map(|d| d.scale(-T::one())).collect();
        dirs.extend(negs);
        dirs.extend(fibonacci_sphere_grid::<T>(
            CLOSEST_POINT_DIRECTIONS.saturating_sub(dirs.len()),
            dim,
        ));

        let mut best: Option<(T, CVector<T>)> = None;
        for u in &dirs {
            if let Some(t) = self.ray_hit(p, u) {
                if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                    best = Some((t, u.clone()));
                }
            }
        }
        let Some((t0, u0)) = best else {
            // No hit in any sampled direction; report an effectively
            // infinite distance with an arbitrary far point.
            return (T::infinity(), p.clone());
        };

        // Chart around u0: u(xi) = normalize(u0 + sum xi_j b_j).
        let mut span = vec![u0.clone()];
        for i in 0..dim {
            span.push(CVector::axis(dim, i, Complex::new(T::one(), T::zero())));
            span.push(CVector::axis(dim, i, Complex::new(T::zero(), T::one())));
        }
        let frame = orthonormalize(&span, T::of(1e-9));
        let tangent = &frame[1..];
        let objective = |xi: &[T]| -> T {
            let mut u = u0.clone();
            for (x, b) in xi.iter().zip(tangent) {
                u = u.add(&b.scale(*x));
            }
            let u = match u.normalized() {
                Ok(u) => u,
                Err(_) => return T::infinity(),
            };
            self.ray_hit(p, &u).unwrap_or_else(T::infinity)
        };
        let start = vec![T::zero(); tangent.len()];
        let (xi, t_ref) = nelder_mead(&start, T::of(0.2), 120, objective);
        let (t_final, u_final) = if t_ref < t0 {
            let mut u = u0.clone();
            for (x, b) in xi.iter().zip(tangent) {
                u = u.add(&b.scale(*x));
            }
            (t_ref, u.normalized().unwrap_or(u0))
        } else {
            (t0, u0)
        };
        let point = p.add_scaled(&u_final, t_final);
        (t_final, point)
    }

    /// Closest boundary point within the affine complex plane
    /// p + span_C(basis). Directions are confined to the plane.
    pub fn closest_boundary_point_in_plane(
        &self,
        p: &CVector<T>,
        basis: &[CVector<T>],
    ) -> Result<(T, CVector<T>)> {
        self.require_member(p)?;
        if basis.is_empty() {
            return Err(Error::ZeroVector);
        }
        let m = basis.len();
        // Directions in the plane come from the real sphere of C^m mapped
        // through the basis.
        let mut coeffs = structured_directions::<T>(m);
        let negs: Vec<_> = coeffs.iter().map(|d| d.scale(-T::one())).collect();
        coeffs.extend(negs);
        coeffs.extend(fibonacci_sphere_grid::<T>(
            CLOSEST_POINT_DIRECTIONS.saturating_sub(coeffs.len()),
            m,
        ));
        let to_ambient = |c: &CVector<T>| -> CVector<T> {
            let mut u = CVector::zero(self.dim());
            for (j, b) in basis.iter().enumerate() {
                u = u.add(&b.scale_c(c.coord(j)));
            }
            u
        };

        let mut best: Option<(T, CVector<T>)> = None;
        for cvec in &coeffs {
            let u = to_ambient(cvec);
            if let Some(t) = self.ray_hit(p, &u) {
                if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                    best = Some((t, cvec.clone()));
                }
            }
        }
        let Some((t0, c0)) = best else {
            return Err(Error::NoBoundaryHit { r_max: RAY_R_MAX });
        };

        let mut span = vec![c0.clone()];
        for i in 0..m {
            span.push(CVector::axis(m, i, Complex::new(T::one(), T::zero())));
            span.push(CVector::axis(m, i, Complex::new(T::zero(), T::one())));
        }
        let frame = orthonormalize(&span, T::of(1e-9));
        let tangent = &frame[1..];
        let objective = |xi: &[T]| -> T {
            let mut c = c0.clone();
            for (x, b) in xi.iter().zip(tangent) {
                c = c.add(&b.scale(*x));
            }
            let c = match c.normalized() {
                Ok(c) => c,
                Err(_) => return T::infinity(),
            };
            self.ray_hit(p, &to_ambient(&c)).unwrap_or_else(T::infinity)
        };
        let start = vec![T::zero(); tangent.len()];
        let (xi, t_ref) = nelder_mead(&start, T::of(0.2), 120, objective);
        let (t_final, c_final) = if t_ref < t0 {
            let mut c = c0.clone();
            for (x, b) in xi.iter().zip(tangent) {
                c = c.add(&b.scale(*x));
            }
            (t_ref, c.normalized().unwrap_or(c0))
        } else {
            (t0, c0)
        };
        let u = to_ambient(&c_final);
        Ok((t_final * u.norm(), p.add_scaled(&u, t_final)))
    }

    /// A reasonably deep interior point: domain centers where available,
    /// otherwise the best of a seeded chord sample.
    pub fn deep_point(&self, region: T, seed: u64) -> Result<CVector<T>> {
        match self {
            Self::Ball { center, .. } | Self::Polydisk { center, .. } => Ok(center.clone()),
            _ => {
                let anchor = self.find_member(region, seed)?;
                let mut best = anchor.clone();
                let mut best_score = self.cheap_depth(&anchor);
                let mut rng = rng_from_seed(seed ^ 0x9e37_79b9);
                for _ in 0..48 {
                    let cand = self.sample_chord_point(&anchor, &mut rng);
                    let score = self.cheap_depth(&cand);
                    if score > best_score {
                        best_score = score;
                        best = cand;
                    }
                }
                Ok(best)
            }
        }
    }

    /// Min structured-direction hit distance; a cheap depth proxy.
    fn cheap_depth(&self, p: &CVector<T>) -> T {
        let mut worst = T::infinity();
        for u in structured_directions::<T>(self.dim()) {
            for sign in [T::one(), -T::one()] {
                let d = self
                    .ray_hit(p, &u.scale(sign))
                    .unwrap_or_else(T::infinity);
                if d < worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Finds any member within the ball of the given radius, by scanning a
    /// deterministic grid then seeded rejection sampling.
    pub fn find_member(&self, region: T, seed: u64) -> Result<CVector<T>> {
        let origin = CVector::zero(self.dim());
        if self.contains(&origin) {
            return Ok(origin);
        }
        if let Self::Ball { center, .. } | Self::Polydisk { center, .. } = self {
            return Ok(center.clone());
        }
        let mut rng = rng_from_seed(seed);
        for _ in 0..4096 {
            let dir = crate::sampling::random_in_unit_ball::<T>(&mut rng, self.dim());
            let cand = dir.scale(region);
            if self.contains(&cand) {
                return Ok(cand);
            }
        }
        Err(Error::NoInteriorSample)
    }

    /// Random member drawn from a chord through `anchor` (always succeeds
    /// for open convex sets; not uniform, but well spread for probes).
    pub fn sample_chord_point(&self, anchor: &CVector<T>, rng: &mut ChaCha8Rng) -> CVector<T> {
        use rand::Rng;
        let u = crate::sampling::random_direction::<T>(rng, self.dim());
        let cap = T::of(1e3);
        let fwd = self.ray_hit(anchor, &u).unwrap_or(cap).min(cap);
        let back = self
            .ray_hit(anchor, &u.scale(-T::one()))
            .unwrap_or(cap)
            .min(cap);
        let s = T::of(rng.gen_range(0.0..1.0f64));
        let shrink = T::of(0.999_999);
        // position in (-back, fwd)
        let t = (-back + (fwd + back) * s) * shrink;
        let cand = anchor.add_scaled(&u, t);
        if self.contains(&cand) {
            cand
        } else {
            anchor.clone()
        }
    }

    /// Convexity probe: midpoints of random member pairs must be members.
    pub fn convexity_probe(&self, pairs: usize, region: T, seed: u64) -> Result<()> {
        let anchor = self.find_member(region, seed)?;
        let mut rng = rng_from_seed(seed);
        for _ in 0..pairs {
            let a = self.sample_chord_point(&anchor, &mut rng);
            let b = self.sample_chord_point(&anchor, &mut rng);
            let mid = a.add(&b).scale(T::of(0.5));
            if !self.contains(&mid) {
                return Err(Error::BadSpec {
                    reason: "midpoint of members escaped the set".into(),
                });
            }
        }
        Ok(())
    }
}

// --- file schema -------------------------------------------------------------

/// Wire format for domains; complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainSpec {
    Ball {
        center: Vec<[f64; 2]>,
        radius: f64,
    },
    Polydisk {
        center: Vec<[f64; 2]>,
        radii: Vec<f64>,
    },
    HalfSpace {
        normal: Vec<[f64; 2]>,
        offset: f64,
    },
    PolynomialGraph {
        poly: PolySpec,
    },
    AffineImage {
        map: AffineSpec,
        base: Box<DomainSpec>,
    },
    Intersection {
        parts: Vec<DomainSpec>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineSpec {
    pub linear: Vec<Vec<[f64; 2]>>,
    pub translation: Vec<[f64; 2]>,
}

fn cvector_from_pairs<T: Real>(pairs: &[[f64; 2]]) -> Result<CVector<T>> {
    CVector::new(
        pairs
            .iter()
            .map(|&[re, im]| Complex::new(T::of(re), T::of(im)))
            .collect(),
    )
}

impl AffineSpec {
    pub fn to_map<T: Real>(&self) -> Result<AffineMap<T>> {
        let rows = self
            .linear
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&[re, im]| Complex::new(T::of(re), T::of(im)))
                    .collect()
            })
            .collect();
        AffineMap::new(CMatrix::new(rows)?, cvector_from_pairs(&self.translation)?)
    }

    pub fn from_map<T: Real>(map: &AffineMap<T>) -> Self {
        Self {
            linear: map
                .linear
                .rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                        .collect()
                })
                .collect(),
            translation: map.translation.to_pairs_f64(),
        }
    }
}

impl DomainSpec {
    pub fn to_domain<T: Real>(&self) -> Result<Domain<T>> {
        match self {
            Self::Ball { center, radius } => {
                Domain::ball(cvector_from_pairs(center)?, T::of(*radius))
            }
            Self::Polydisk { center, radii } => Domain::polydisk(
                cvector_from_pairs(center)?,
                radii.iter().map(|&r| T::of(r)).collect(),
            ),
            Self::HalfSpace { normal, offset } => {
                Domain::half_space(cvector_from_pairs(normal)?, T::of(*offset))
            }
            Self::PolynomialGraph { poly } => Domain::polynomial_graph(poly.to_polynomial()?),
            Self::AffineImage { map, base } => {
                Domain::affine_image(map.to_map()?, base.to_domain()?)
            }
            Self::Intersection { parts } => Domain::intersection(
                parts
                    .iter()
                    .map(|p| p.to_domain())
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn from_domain<T: Real>(domain: &Domain<T>) -> Self {
        match domain {
            Domain::Ball { center, radius } => Self::Ball {
                center: center.to_pairs_f64(),
                radius: radius.to_f64_lossy(),
            },
            Domain::Polydisk { center, radii } => Self::Polydisk {
                center: center.to_pairs_f64(),
                radii: radii.iter().map(|r| r.to_f64_lossy()).collect(),
            },
            Domain::HalfSpace { normal, offset } => Self::HalfSpace {
                normal: normal.to_pairs_f64(),
                offset: offset.to_f64_lossy(),
            },
            Domain::PolynomialGraph { poly, .. } => Self::PolynomialGraph {
                poly: PolySpec::from_polynomial(poly),
            },
            Domain::AffineImage { map, base, .. } => Self::AffineImage {
                map: AffineSpec::from_map(map),
                base: Box::new(Self::from_domain(base)),
            },
            Domain::Intersection { parts } => Self::Intersection {
                parts: parts.iter().map(Self::from_domain).collect(),
            },
        }
    }
}
