//! Kobayashi metric machinery: exact model metrics, two-sided infinitesimal
//! bounds, certified distance brackets, and quasi-geodesic certificates.
//!
//! On a convex set the infinitesimal metric K(p; v) is pinched between
//! |v| / (2 delta(p; v)) and |v| / delta(p; v), where delta(p; v) is the
//! distance to the complement inside the complex line through v. Integrating
//! the upper gauge along polylines gives certified upper distance bounds;
//! log ratios of boundary hits along the complex line through two points give
//! certified lower bounds. Disk, half-plane, ball, and polydisk carry exact
//! closed forms used as oracles and as fast paths.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::CVector;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{AffineMap, CMatrix};
use crate::opt::{golden_min, simpson_unit};
use crate::params::{
    PATH_DOUBLING_GAIN, PATH_NODES_INITIAL, PATH_NODES_MAX, PHASE_GRID, QG_T_GRID_END,
    QG_T_GRID_STEP, QUADRATURE_SAFETY, SIMPSON_NODES,
};
use crate::scalar::Real;

// --- exact model metrics -----------------------------------------------------

/// Poincare distance on the unit disk.
pub fn dist_disk<T: Real>(a: Complex<T>, b: Complex<T>) -> Result<T> {
    if a.norm() >= T::one() || b.norm() >= T::one() {
        return Err(Error::OutsideDomain);
    }
    let one = Complex::new(T::one(), T::zero());
    let m = (a - b) / (one - a * b.conj());
    Ok(m.norm().atanh())
}

/// Distance on the upper half plane, normalized like the disk metric.
pub fn dist_halfplane<T: Real>(a: Complex<T>, b: Complex<T>) -> Result<T> {
    if a.im <= T::zero() || b.im <= T::zero() {
        return Err(Error::OutsideDomain);
    }
    let two = T::of(2.0);
    let arg = T::one() + (a - b).norm_sqr() / (two * a.im * b.im);
    Ok(arg.acosh() / two)
}

/// Canonical model carried by an [`ExactModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Disk,
    HalfPlane,
    Ball,
    Polydisk,
}

/// A domain recognized as affinely equivalent to a model with closed-form
/// Kobayashi distance. `to_canonical` maps the domain onto the unit model.
#[derive(Debug, Clone)]
pub struct ExactModel<T: Real> {
    pub kind: ModelKind,
    pub to_canonical: AffineMap<T>,
}

impl<T: Real> ExactModel<T> {
    pub fn disk() -> Self {
        Self {
            kind: ModelKind::Disk,
            to_canonical: AffineMap::identity(1),
        }
    }

    pub fn half_plane() -> Self {
        Self {
            kind: ModelKind::HalfPlane,
            to_canonical: AffineMap::identity(1),
        }
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self {
            kind: if dim == 1 { ModelKind::Disk } else { ModelKind::Ball },
            to_canonical: AffineMap::identity(dim),
        }
    }

    pub fn unit_polydisk(dim: usize) -> Self {
        Self {
            kind: if dim == 1 { ModelKind::Disk } else { ModelKind::Polydisk },
            to_canonical: AffineMap::identity(dim),
        }
    }

    /// Recognizes balls, polydisks, one-dimensional half-planes, and affine
    /// images of those.
    pub fn detect(dom: &Domain<T>) -> Option<Self> {
        match dom {
            Domain::Ball { center, radius } => {
                let dim = center.dim();
                let inv_r = Complex::new(T::one() / *radius, T::zero());
                let linear = CMatrix::diagonal(&vec![inv_r; dim]);
                let translation = center.scale(-T::one() / *radius);
                Some(Self {
                    kind: if dim == 1 { ModelKind::Disk } else { ModelKind::Ball },
                    to_canonical: AffineMap::new(linear, translation).ok()?,
                })
            }
            Domain::Polydisk { center, radii } => {
                let dim = center.dim();
                let diag: Vec<Complex<T>> = radii
                    .iter()
                    .map(|r| Complex::new(T::one() / *r, T::zero()))
                    .collect();
                let linear = CMatrix::diagonal(&diag);
                let mut trans = CVector::zero(dim);
                for i in 0..dim {
                    trans.set_coord(i, -center.coord(i) / radii[i]);
                }
                Some(Self {
                    kind: if dim == 1 { ModelKind::Disk } else { ModelKind::Polydisk },
                    to_canonical: AffineMap::new(linear, trans).ok()?,
                })
            }
            Domain::HalfSpace { normal, offset } if normal.dim() == 1 => {
                // w = i (z conj(n) - offset) sends { Re<z,n> > offset } to
                // the upper half plane.
                let i_unit = Complex::new(T::zero(), T::one());
                let linear = CMatrix::diagonal(&[i_unit * normal.coord(0).conj()]);
                let trans = CVector::new(vec![-i_unit * Complex::new(*offset, T::zero())]).ok()?;
                Some(Self {
                    kind: ModelKind::HalfPlane,
                    to_canonical: AffineMap::new(linear, trans).ok()?,
                })
            }
            Domain::AffineImage { inv, base, .. } => {
                let inner = Self::detect(base)?;
                Some(Self {
                    kind: inner.kind,
                    to_canonical: inner.to_canonical.compose(inv).ok()?,
                })
            }
            _ => None,
        }
    }

    /// Exact Kobayashi distance.
    pub fn distance(&self, p: &CVector<T>, q: &CVector<T>) -> Result<T> {
        let a = self.to_canonical.apply(p)?;
        let b = self.to_canonical.apply(q)?;
        match self.kind {
            ModelKind::Disk => dist_disk(a.coord(0), b.coord(0)),
            ModelKind::HalfPlane => dist_halfplane(a.coord(0), b.coord(0)),
            ModelKind::Ball => {
                let (na, nb) = (a.norm_sq(), b.norm_sq());
                if na >= T::one() || nb >= T::one() {
                    return Err(Error::OutsideDomain);
                }
                let inner = Complex::new(T::one(), T::zero()) - a.dot(&b);
                let ratio = (T::one() - na) * (T::one() - nb) / inner.norm_sqr();
                Ok((T::one() - ratio).max(T::zero()).sqrt().atanh())
            }
            ModelKind::Polydisk => {
                let mut worst = T::zero();
                for (x, y) in a.coords().iter().zip(b.coords()) {
                    let d = dist_disk(*x, *y)?;
                    if d > worst {
                        worst = d;
                    }
                }
                Ok(worst)
            }
        }
    }

    /// Exact infinitesimal metric K(p; v).
    pub fn finsler(&self, p: &CVector<T>, v: &CVector<T>) -> Result<T> {
        let a = self.to_canonical.apply(p)?;
        let w = self.to_canonical.apply_linear(v)?;
        match self.kind {
            ModelKind::Disk => {
                let z = a.coord(0);
                if z.norm() >= T::one() {
                    return Err(Error::OutsideDomain);
                }
                Ok(w.coord(0).norm() / (T::one() - z.norm_sqr()))
            }
            ModelKind::HalfPlane => {
                let z = a.coord(0);
                if z.im <= T::zero() {
                    return Err(Error::OutsideDomain);
                }
                Ok(w.coord(0).norm() / (T::of(2.0) * z.im))
            }
            ModelKind::Ball => {
                let nz = a.norm_sq();
                if nz >= T::one() {
                    return Err(Error::OutsideDomain);
                }
                let one_m = T::one() - nz;
                let k2 = (w.norm_sq() * one_m + w.dot(&a).norm_sqr()) / (one_m * one_m);
                Ok(k2.sqrt())
            }
            ModelKind::Polydisk => {
                let mut worst = T::zero();
                for (z, u) in a.coords().iter().zip(w.coords()) {
                    if z.norm() >= T::one() {
                        return Err(Error::OutsideDomain);
                    }
                    let k = u.norm() / (T::one() - z.norm_sqr());
                    if k > worst {
                        worst = k;
                    }
                }
                Ok(worst)
            }
        }
    }
}

// --- infinitesimal bracket ---------------------------------------------------

/// Two-sided bound on K(p; v): `[|v|/(2 delta), |v|/delta]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FinslerBracket<T: Real> {
    pub lower: T,
    pub upper: T,
}

pub fn finsler_bracket<T: Real>(
    dom: &Domain<T>,
    p: &CVector<T>,
    v: &CVector<T>,
) -> Result<FinslerBracket<T>> {
    dom.require_carrier()?;
    let dd = dom.dir_boundary_distance(p, v)?;
    if !dd.is_finite() {
        return Err(Error::NoBoundaryHit {
            r_max: crate::params::RAY_R_MAX,
        });
    }
    let vn = v.norm();
    Ok(FinslerBracket {
        lower: vn / (T::of(2.0) * dd.distance),
        upper: vn / dd.distance,
    })
}

// --- distance lower bounds ---------------------------------------------------

/// Provenance of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    /// Log ratio of distances to a complement point on the complex line.
    BoundaryRatio,
    /// log(1 + |p-q| / min directional gauge).
    GaugeLog,
    /// Simpson-integrated upper gauge along an optimized polyline.
    PolylineSimpson,
    /// Closed-form model distance.
    ExactModel,
    /// Degenerate case p = q.
    Trivial,
}

/// Certified interval around a Kobayashi distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DistanceBracket<T: Real> {
    pub lower: T,
    pub upper: T,
    pub lower_method: BoundMethod,
    pub upper_method: BoundMethod,
}

impl<T: Real> DistanceBracket<T> {
    pub fn degenerate(d: T, method: BoundMethod) -> Self {
        Self {
            lower: d,
            upper: d,
            lower_method: method,
            upper_method: method,
        }
    }

    pub fn gap_to(&self, other: &Self) -> T {
        (other.lower - self.upper).max(self.lower - other.upper).max(T::zero())
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.gap_to(other) == T::zero()
    }
}

/// Certified lower bound on d(p, q): the best of the boundary log-ratio
/// bound (phase-optimized over the complex line through p and q) and the
/// gauge bound log(1 + |p-q| / min delta).
pub fn distance_lower<T: Real>(dom: &Domain<T>, p: &CVector<T>, q: &CVector<T>) -> Result<T> {
    dom.require_carrier()?;
    dom.require_member(p)?;
    dom.require_member(q)?;
    if p.dist(q) == T::zero() {
        return Ok(T::zero());
    }
    Ok(lower_bound_with_method(dom, p, q)?.0)
}

fn lower_bound_with_method<T: Real>(
    dom: &Domain<T>,
    p: &CVector<T>,
    q: &CVector<T>,
) -> Result<(T, BoundMethod)> {
    let v = q.sub(p);
    let vhat = v.scale(T::one() / v.norm());
    let half = T::of(0.5);

    // Boundary log-ratio over the boundary circle of the slice through p, q.
    let ratio_at = |theta: T| -> Option<T> {
        let dir = vhat.scale_c(Complex::from_polar(T::one(), theta));
        let t = dom.ray_hit(p, &dir)?;
        let xi = p.add_scaled(&dir, t);
        let dq = q.dist(&xi);
        if dq <= T::zero() {
            return None;
        }
        Some(half * (t / dq).ln().abs())
    };
    let two_pi = T::PI() * T::of(2.0);
    let mut best = T::zero();
    let mut best_theta = None;
    for k in 0..PHASE_GRID {
        let theta = two_pi * T::of(k as f64) / T::of(PHASE_GRID as f64);
        if let Some(val) = ratio_at(theta) {
            if val > best {
                best = val;
                best_theta = Some(theta);
            }
        }
    }
    if let Some(theta0) = best_theta {
        let step = two_pi / T::of(PHASE_GRID as f64);
        let (_, neg) = golden_min(theta0 - step, theta0 + step, 24, |th| {
            -ratio_at(th).unwrap_or(T::zero())
        });
        best = best.max(-neg);
    }
    let mut method = BoundMethod::BoundaryRatio;

    // Gauge bound from directional distances at both endpoints.
    let dp = dom.dir_boundary_distance(p, &v)?.distance;
    let dq = dom.dir_boundary_distance(q, &v.scale(-T::one()))?.distance;
    let gauge = dp.min(dq);
    if gauge.is_finite() && gauge > T::zero() {
        let cand = half * (T::one() + v.norm() / gauge).ln();
        if cand > best {
            best = cand;
            method = BoundMethod::GaugeLog;
        }
    }
    Ok((best.max(T::zero()), method))
}

// --- upper bounds along polylines ---------------------------------------------

/// Piecewise-linear path inside the domain with a certified length bound for
/// the metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PathPolyline<T: Real> {
    pub nodes: Vec<CVector<T>>,
    pub length_upper: T,
}

impl<T: Real> PathPolyline<T> {
    /// Every node and 32 interior samples per segment must be members.
    pub fn validate(&self, dom: &Domain<T>) -> Result<()> {
        for node in &self.nodes {
            dom.require_member(node)?;
        }
        for pair in self.nodes.windows(2) {
            for k in 1..=32 {
                let t = T::of(k as f64) / T::of(33.0);
                let x = pair[0].add(&pair[1].sub(&pair[0]).scale(t));
                dom.require_member(&x)?;
            }
        }
        Ok(())
    }
}

/// Pointwise upper bound on K(x; v): the centered gauge |v|/delta(x; v),
/// improved by the best round disk inside the slice that contains x
/// off-center (for a disk of radius rho centered s away from x the model
/// metric is rho |v| / (rho^2 - s^2)).
pub fn finsler_upper<T: Real>(dom: &Domain<T>, x: &CVector<T>, v: &CVector<T>) -> T {
    let Ok(dd) = dom.dir_boundary_distance(x, v) else {
        return T::infinity();
    };
    if !dd.is_finite() || dd.distance <= T::zero() {
        return T::infinity();
    }
    let delta = dd.distance;
    let vn = v.norm();
    let mut best = vn / delta;

    let Some(hit) = dd.hit else {
        return best;
    };
    let away_raw = x.sub(&hit.point);
    let Ok(away) = away_raw.normalized() else {
        return best;
    };
    let reach = match dom.ray_hit(x, &away) {
        Some(t) => t * T::of(0.999_999),
        None => T::of(64.0) * delta,
    }
    .min(T::of(64.0) * delta);
    let eval = |s: T| -> T {
        if s <= T::zero() {
            return vn / delta;
        }
        let c = x.add_scaled(&away, s);
        if !dom.contains(&c) {
            return T::infinity();
        }
        let rho = dom
            .dir_boundary_distance(&c, v)
            .map(|d| d.distance)
            .unwrap_or(T::zero());
        if !(rho > s) {
            return T::infinity();
        }
        vn * rho / (rho * rho - s * s)
    };
    let (_, val) = golden_min(T::zero(), reach, 20, eval);
    if val < best {
        best = val;
    }
    best
}

fn segment_upper_with<T: Real>(dom: &Domain<T>, a: &CVector<T>, b: &CVector<T>, nodes: usize) -> T {
    let v = b.sub(a);
    if v.norm() <= T::of(1e-300) {
        return T::zero();
    }
    simpson_unit(nodes, |t| {
        let x = a.add(&v.scale(t));
        finsler_upper(dom, &x, &v)
    })
}

fn segment_upper<T: Real>(dom: &Domain<T>, a: &CVector<T>, b: &CVector<T>) -> T {
    segment_upper_with(dom, a, b, SIMPSON_NODES)
}

/// Coarse quadrature used while shaping the path; the final reported value
/// is always re-integrated at full node count.
const OPT_NODES: usize = 9;

fn path_value<T: Real>(dom: &Domain<T>, nodes: &[CVector<T>]) -> T {
    nodes
        .windows(2)
        .map(|w| segment_upper(dom, &w[0], &w[1]))
        .sum()
}

fn straight_nodes<T: Real>(a: &CVector<T>, b: &CVector<T>, interior: usize) -> Vec<CVector<T>> {
    let mut nodes = Vec::with_capacity(interior + 2);
    for k in 0..=(interior + 1) {
        let t = T::of(k as f64) / T::of((interior + 1) as f64);
        nodes.push(a.add(&b.sub(a).scale(t)));
    }
    nodes
}

/// Coordinate-descent sweeps over interior nodes, evaluated with the coarse
/// quadrature. Returns the coarse value.
fn optimize_nodes<T: Real>(
    dom: &Domain<T>,
    nodes: &mut [CVector<T>],
    sweeps: usize,
) -> T {
    let dim = nodes[0].dim();
    let mut seg: Vec<T> = nodes
        .windows(2)
        .map(|w| segment_upper_with(dom, &w[0], &w[1], OPT_NODES))
        .collect();
    let scale = nodes[0].dist(nodes.last().unwrap()).max(T::of(1e-6));
    let mut step = scale / T::of(8.0);

    for _ in 0..sweeps {
        let mut improved = false;
        for i in 1..nodes.len() - 1 {
            for axis in 0..2 * dim {
                for sign in [T::one(), -T::one()] {
                    let mut reals = nodes[i].to_reals();
                    reals[axis] += sign * step;
                    let cand = CVector::from_reals(&reals);
                    if !dom.contains(&cand) {
                        continue;
                    }
                    let left = segment_upper_with(dom, &nodes[i - 1], &cand, OPT_NODES);
                    let right = segment_upper_with(dom, &cand, &nodes[i + 1], OPT_NODES);
                    let old = seg[i - 1] + seg[i];
                    if left + right < old - T::of(1e-14) {
                        nodes[i] = cand;
                        seg[i - 1] = left;
                        seg[i] = right;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= T::of(0.5);
            if step < scale * T::of(1e-5) {
                break;
            }
        }
    }
    seg.iter().copied().sum()
}

fn subdivide<T: Real>(nodes: &[CVector<T>]) -> Vec<CVector<T>> {
    let mut out = Vec::with_capacity(nodes.len() * 2 - 1);
    for w in nodes.windows(2) {
        out.push(w[0].clone());
        out.push(w[0].add(&w[1]).scale(T::of(0.5)));
    }
    out.push(nodes.last().unwrap().clone());
    out
}

/// Upper distance bound: Simpson-integrated upper gauge along a polyline,
/// locally optimized by coordinate descent with `budget` sweeps, node count
/// doubling while it pays. Returns the bound (with the quadrature safety
/// factor folded in) and the witness path.
pub fn distance_upper<T: Real>(
    dom: &Domain<T>,
    p: &CVector<T>,
    q: &CVector<T>,
    budget: usize,
) -> Result<(T, PathPolyline<T>)> {
    dom.require_carrier()?;
    dom.require_member(p)?;
    dom.require_member(q)?;
    let budget = if budget == 0 {
        crate::params::PATH_DEFAULT_BUDGET
    } else {
        budget
    };
    if p.dist(q) == T::zero() {
        return Ok((
            T::zero(),
            PathPolyline {
                nodes: vec![p.clone()],
                length_upper: T::zero(),
            },
        ));
    }

    let mut nodes = straight_nodes(p, q, PATH_NODES_INITIAL);
    // Bent seed through a deep interior point; straight segments are poor
    // near the boundary.
    let region = T::of(2.0) * (p.norm() + q.norm() + T::one());
    if let Ok(anchor) = dom.deep_point(region, 0) {
        if anchor.dist(p) > T::of(1e-9) && anchor.dist(q) > T::of(1e-9) {
            let half = PATH_NODES_INITIAL / 2;
            let mut bent = straight_nodes(p, &anchor, half);
            bent.pop();
            bent.extend(straight_nodes(&anchor, q, PATH_NODES_INITIAL - half));
            let cheap = |ns: &[CVector<T>]| -> T {
                ns.windows(2)
                    .map(|w| segment_upper_with(dom, &w[0], &w[1], OPT_NODES))
                    .sum()
            };
            if cheap(&bent) < cheap(&nodes) {
                nodes = bent;
            }
        }
    }

    let mut value = optimize_nodes(dom, &mut nodes, budget);
    while nodes.len() - 2 < PATH_NODES_MAX {
        let mut candidate = subdivide(&nodes);
        let refined = optimize_nodes(dom, &mut candidate, (budget / 3).max(4));
        if refined < value * (T::one() - T::of(PATH_DOUBLING_GAIN)) {
            nodes = candidate;
            value = refined;
        } else {
            break;
        }
    }

    // final certified value at full quadrature resolution
    let bound = path_value(dom, &nodes) * T::of(QUADRATURE_SAFETY);
    Ok((
        bound,
        PathPolyline {
            nodes,
            length_upper: bound,
        },
    ))
}

/// Certified bracket around d(p, q); both argument orders are evaluated and
/// the tighter bounds kept, so the result is symmetric.
pub fn distance_bracket<T: Real>(
    dom: &Domain<T>,
    p: &CVector<T>,
    q: &CVector<T>,
    budget: usize,
) -> Result<DistanceBracket<T>> {
    dom.require_carrier()?;
    dom.require_member(p)?;
    dom.require_member(q)?;
    if p.dist(q) == T::zero() {
        return Ok(DistanceBracket::degenerate(T::zero(), BoundMethod::Trivial));
    }
    let (lo_pq, m_pq) = lower_bound_with_method(dom, p, q)?;
    let (lo_qp, m_qp) = lower_bound_with_method(dom, q, p)?;
    let (lower, lower_method) = if lo_pq >= lo_qp {
        (lo_pq, m_pq)
    } else {
        (lo_qp, m_qp)
    };

    let (up, path) = distance_upper(dom, p, q, budget)?;
    // Re-evaluating the reversed witness path costs one pass and keeps the
    // bracket order-symmetric.
    let mut rev = path.nodes.clone();
    rev.reverse();
    let up_rev = path_value(dom, &rev) * T::of(QUADRATURE_SAFETY);
    let upper = up.min(up_rev);

    if lower > upper * (T::one() + T::of(1e-9)) + T::of(1e-12) {
        return Err(Error::BracketInversion {
            lower: lower.to_f64_lossy(),
            upper: upper.to_f64_lossy(),
        });
    }
    Ok(DistanceBracket {
        lower: lower.min(upper),
        upper,
        lower_method,
        upper_method: BoundMethod::PolylineSimpson,
    })
}

// --- metric front end ---------------------------------------------------------

/// Distance backend: exact closed form when the domain is a recognized
/// model, certified brackets otherwise.
pub struct Metric<'a, T: Real> {
    pub domain: &'a Domain<T>,
    pub model: Option<ExactModel<T>>,
    pub budget: usize,
}

impl<'a, T: Real> Metric<'a, T> {
    pub fn auto(domain: &'a Domain<T>, budget: usize) -> Self {
        Self {
            domain,
            model: ExactModel::detect(domain),
            budget,
        }
    }

    /// Forces the bracket route even on model domains.
    pub fn bracket_only(domain: &'a Domain<T>, budget: usize) -> Self {
        Self {
            domain,
            model: None,
            budget,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.model.is_some()
    }

    pub fn bracket(&self, p: &CVector<T>, q: &CVector<T>) -> Result<DistanceBracket<T>> {
        match &self.model {
            Some(m) => {
                self.domain.require_member(p)?;
                self.domain.require_member(q)?;
                Ok(DistanceBracket::degenerate(
                    m.distance(p, q)?,
                    BoundMethod::ExactModel,
                ))
            }
            None => distance_bracket(self.domain, p, q, self.budget),
        }
    }
}

// --- quasi-geodesics ------------------------------------------------------------

/// Certificate that t -> x + e^{-2t}(p - x) is an (A, 0)-quasi-geodesic,
/// with A = 2/epsilon and epsilon = delta(p; x-p) / |x-p|.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuasiGeodesicCert<T: Real> {
    pub a: T,
    pub b: T,
    pub epsilon: T,
    pub interior: CVector<T>,
    pub boundary: CVector<T>,
}

impl<T: Real> QuasiGeodesicCert<T> {
    /// x_t = x + e^{-2t} (p - x).
    pub fn point(&self, t: T) -> CVector<T> {
        let w = (-T::of(2.0) * t).exp();
        self.boundary
            .add(&self.interior.sub(&self.boundary).scale(w))
    }
}

pub fn quasi_geodesic<T: Real>(
    dom: &Domain<T>,
    p: &CVector<T>,
    x: &CVector<T>,
) -> Result<QuasiGeodesicCert<T>> {
    dom.require_carrier()?;
    dom.require_member(p)?;
    x.check_dim(dom.dim())?;

    // x must sit on the boundary: the ray from p toward x exits at |x - p|.
    let sep = x.dist(p);
    if sep == T::zero() {
        return Err(Error::NotOnBoundary {
            residual: f64::INFINITY,
        });
    }
    let dir = x.sub(p).scale(T::one() / sep);
    let t_exit = dom
        .ray_hit(p, &dir)
        .ok_or(Error::NoBoundaryHit {
            r_max: crate::params::RAY_R_MAX,
        })?;
    let residual = (t_exit - sep).abs();
    if residual > T::of(1e-6) * (T::one() + sep) {
        return Err(Error::NotOnBoundary {
            residual: residual.to_f64_lossy(),
        });
    }

    let delta = dom.dir_boundary_distance(p, &x.sub(p))?.distance;
    let epsilon = delta / sep;
    if !(epsilon > T::of(1e-12)) {
        return Err(Error::TangentiallyTrapped {
            epsilon: epsilon.to_f64_lossy(),
        });
    }
    Ok(QuasiGeodesicCert {
        a: T::of(2.0) / epsilon,
        b: T::zero(),
        epsilon,
        interior: p.clone(),
        boundary: x.clone(),
    })
}

/// One verified pair of curve parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QgPairCheck<T: Real> {
    pub t1: T,
    pub t2: T,
    pub bracket: DistanceBracket<T>,
    /// bracket.lower <= A |t1 - t2|
    pub lower_consistent: bool,
    /// bracket.upper >= |t1 - t2|
    pub upper_consistent: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QgVerification<T: Real> {
    pub pairs: Vec<QgPairCheck<T>>,
    pub ok: bool,
}

/// Samples the t-grid {0, 0.25, ..., 4} and checks bracket consistency of
/// the certificate against the domain metric.
pub fn verify_quasi_geodesic<T: Real>(
    dom: &Domain<T>,
    cert: &QuasiGeodesicCert<T>,
    budget: usize,
) -> Result<QgVerification<T>> {
    let metric = Metric::auto(dom, budget);
    let mut ts = Vec::new();
    let mut t = T::zero();
    while t <= T::of(QG_T_GRID_END) + T::of(1e-12) {
        ts.push(t);
        t += T::of(QG_T_GRID_STEP);
    }
    let pts: Vec<CVector<T>> = ts.iter().map(|&t| cert.point(t)).collect();
    let tol = T::of(1e-9);
    let mut pairs = Vec::new();
    let mut ok = true;
    for i in 0..ts.len() {
        for j in (i + 1)..ts.len() {
            let dt = (ts[j] - ts[i]).abs();
            let bracket = metric.bracket(&pts[i], &pts[j])?;
            let lower_consistent = bracket.lower <= cert.a * dt + tol;
            let upper_consistent = bracket.upper + tol >= dt;
            ok &= lower_consistent && upper_consistent;
            pairs.push(QgPairCheck {
                t1: ts[i],
                t2: ts[j],
                bracket,
                lower_consistent,
                upper_consistent,
            });
        }
    }
    Ok(QgVerification { pairs, ok })
}
