//! Gromov hyperbolicity estimation and non-hyperbolicity witnesses.
//!
//! The four-point condition is the primary signal: a space is hyperbolic iff
//! (x|y)_o >= min((x|z)_o, (z|y)_o) - delta for a uniform delta, and the
//! defect of any single quadruple is a certified lower bound on delta.
//! Products are computed from distance brackets, so lower bounds stay
//! certified on non-model domains; on recognized models (disk, ball,
//! polydisk) the products are exact.
//!
//! Fat-triangle witnesses drive delta to infinity on domains with an
//! analytic disk in the boundary: the triangle (o, x_T, y_T) built from
//! quasi-geodesic rays toward the disk gets arbitrarily thick as T grows.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::complex::CVector;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::kobayashi::{DistanceBracket, Metric, PathPolyline};
use crate::params::WITNESS_T0_GRID;
use crate::sampling::{rng_for_index, structured_directions};
use crate::scalar::Real;
use rand::Rng;

/// Interval around the Gromov product (x|y)_o.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GromovProductInterval<T: Real> {
    pub lower: T,
    pub upper: T,
    pub basepoint: CVector<T>,
}

fn product_interval<T: Real>(
    d_ox: &DistanceBracket<T>,
    d_oy: &DistanceBracket<T>,
    d_xy: &DistanceBracket<T>,
) -> (T, T) {
    let half = T::of(0.5);
    (
        (d_ox.lower + d_oy.lower - d_xy.upper) * half,
        (d_ox.upper + d_oy.upper - d_xy.lower) * half,
    )
}

/// (x|y)_o = (d(o,x) + d(o,y) - d(x,y)) / 2, as an interval from distance
/// brackets; degenerate on recognized exact models. When x = o or y = o the
/// product is exactly zero.
pub fn gromov_product<T: Real>(
    dom: &Domain<T>,
    x: &CVector<T>,
    y: &CVector<T>,
    o: &CVector<T>,
    budget: usize,
) -> Result<GromovProductInterval<T>> {
    dom.require_member(x)?;
    dom.require_member(y)?;
    dom.require_member(o)?;
    if x == o || y == o {
        return Ok(GromovProductInterval {
            lower: T::zero(),
            upper: T::zero(),
            basepoint: o.clone(),
        });
    }
    let metric = Metric::auto(dom, budget);
    let d_ox = metric.bracket(o, x)?;
    let d_oy = metric.bracket(o, y)?;
    let d_xy = metric.bracket(x, y)?;
    let (lower, upper) = product_interval(&d_ox, &d_oy, &d_xy);
    Ok(GromovProductInterval {
        lower,
        upper,
        basepoint: o.clone(),
    })
}

/// Point source for the four-point scan.
#[derive(Debug, Clone)]
pub enum SamplerSpec<T: Real> {
    /// Boundary-approaching layers at radial fractions 1 - 2^-k.
    Layered { k_min: u32, k_max: u32 },
    /// Explicit pool; the first point is the basepoint.
    Points(Vec<CVector<T>>),
}

/// Per-scale scan summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScaleStat<T: Real> {
    pub k: u32,
    pub delta_lower: T,
    pub delta_upper_estimate: T,
    pub triples: usize,
}

/// Scan outcome. `delta_lower` is certified (some quadruple forces at least
/// this defect); `delta_upper_estimate` is the empirical maximum of the
/// optimistic defect over the sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HyperbolicityReport<T: Real> {
    pub delta_lower: T,
    pub delta_upper_estimate: T,
    pub samples: usize,
    pub seed: u64,
    pub per_scale: Vec<ScaleStat<T>>,
}

struct PairCache<'m, 'a, T: Real> {
    metric: &'m Metric<'a, T>,
    pool: Vec<CVector<T>>,
    cache: HashMap<(usize, usize), DistanceBracket<T>>,
}

impl<'m, 'a, T: Real> PairCache<'m, 'a, T> {
    fn bracket(&mut self, i: usize, j: usize) -> Result<DistanceBracket<T>> {
        let key = (i.min(j), i.max(j));
        if let Some(b) = self.cache.get(&key) {
            return Ok(b.clone());
        }
        let b = self.metric.bracket(&self.pool[key.0], &self.pool[key.1])?;
        self.cache.insert(key, b.clone());
        Ok(b)
    }

    /// (defect_lower, defect_upper) of the quadruple (o=0, x, y, z).
    fn defect(&mut self, x: usize, y: usize, z: usize) -> Result<(T, T)> {
        let d_ox = self.bracket(0, x)?;
        let d_oy = self.bracket(0, y)?;
        let d_oz = self.bracket(0, z)?;
        let d_xz = self.bracket(x, z)?;
        let d_zy = self.bracket(z, y)?;
        let d_xy = self.bracket(x, y)?;
        let (xz_lo, xz_up) = product_interval(&d_ox, &d_oz, &d_xz);
        let (zy_lo, zy_up) = product_interval(&d_oz, &d_oy, &d_zy);
        let (xy_lo, xy_up) = product_interval(&d_ox, &d_oy, &d_xy);
        let lower = (xz_lo.min(zy_lo) - xy_up).max(T::zero());
        let upper = (xz_up.min(zy_up) - xy_lo).max(T::zero());
        Ok((lower, upper))
    }
}

fn layered_pool<T: Real>(
    dom: &Domain<T>,
    anchor: &CVector<T>,
    k_min: u32,
    k_max: u32,
) -> Vec<(CVector<T>, u32)> {
    let mut pool = vec![(anchor.clone(), 0)];
    for k in k_min..=k_max {
        let s = T::one() - T::of(2.0).powi(-(k as i32));
        for dir in structured_directions::<T>(dom.dim()) {
            for sign in [T::one(), -T::one()] {
                let d = dir.scale(sign);
                if let Some(t) = dom.ray_hit(anchor, &d) {
                    pool.push((anchor.add_scaled(&d, t * s), k));
                }
            }
        }
    }
    pool
}

fn scan_one_scale<T: Real>(
    dom: &Domain<T>,
    metric: &Metric<'_, T>,
    anchor: &CVector<T>,
    k_min: u32,
    k: u32,
    triples: usize,
    seed: u64,
) -> Result<ScaleStat<T>> {
    // Cumulative pool up to scale k; the deepest layer is enumerated
    // exhaustively in structured triples before random fill.
    let tagged = layered_pool(dom, anchor, k_min, k);
    let deepest: Vec<usize> = tagged
        .iter()
        .enumerate()
        .filter(|(_, (_, layer))| *layer == k)
        .map(|(i, _)| i)
        .collect();
    let pool: Vec<CVector<T>> = tagged.into_iter().map(|(p, _)| p).collect();

    let mut cache = PairCache {
        metric,
        pool: pool.clone(),
        cache: HashMap::new(),
    };

    let mut delta_lower = T::zero();
    let mut delta_upper = T::zero();
    let mut used = 0usize;

    'structured: for &x in &deepest {
        for &y in &deepest {
            for &z in &deepest {
                if used >= triples {
                    break 'structured;
                }
                let (lo, up) = cache.defect(x, y, z)?;
                delta_lower = delta_lower.max(lo);
                delta_upper = delta_upper.max(up);
                used += 1;
            }
        }
    }

    let mut rng = rng_for_index(seed, k as u64);
    while used < triples {
        let x = rng.gen_range(1..pool.len());
        let y = rng.gen_range(1..pool.len());
        let z = rng.gen_range(1..pool.len());
        let (lo, up) = cache.defect(x, y, z)?;
        delta_lower = delta_lower.max(lo);
        delta_upper = delta_upper.max(up);
        used += 1;
    }

    Ok(ScaleStat {
        k,
        delta_lower,
        delta_upper_estimate: delta_upper,
        triples: used,
    })
}

/// Four-point scan. Quadruples are (anchor, x, y, z) with the triple drawn
/// from boundary-approaching layers (structured corner/axis points first,
/// seeded random fill after). Deterministic for a fixed seed; scales may be
/// evaluated on parallel workers without changing the result.
pub fn four_point_scan<T: Real>(
    dom: &Domain<T>,
    sampler: &SamplerSpec<T>,
    n: usize,
    budget: usize,
    seed: u64,
    threads: usize,
) -> Result<HyperbolicityReport<T>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    dom.require_carrier()?;
    let metric = Metric::auto(dom, budget);

    let per_scale: Vec<ScaleStat<T>> = match sampler {
        SamplerSpec::Points(points) => {
            if points.is_empty() {
                return Err(Error::EmptySample);
            }
            for p in points {
                dom.require_member(p)?;
            }
            let mut cache = PairCache {
                metric: &metric,
                pool: points.clone(),
                cache: HashMap::new(),
            };
            let mut delta_lower = T::zero();
            let mut delta_upper = T::zero();
            let mut used = 0usize;
            let m = points.len();
            'all: for x in 1..m {
                for y in 1..m {
                    for z in 1..m {
                        if used >= n {
                            break 'all;
                        }
                        let (lo, up) = cache.defect(x, y, z)?;
                        delta_lower = delta_lower.max(lo);
                        delta_upper = delta_upper.max(up);
                        used += 1;
                    }
                }
            }
            let mut rng = rng_for_index(seed, 0);
            while used < n && m > 1 {
                let x = rng.gen_range(1..m);
                let y = rng.gen_range(1..m);
                let z = rng.gen_range(1..m);
                let (lo, up) = cache.defect(x, y, z)?;
                delta_lower = delta_lower.max(lo);
                delta_upper = delta_upper.max(up);
                used += 1;
            }
            vec![ScaleStat {
                k: 0,
                delta_lower,
                delta_upper_estimate: delta_upper,
                triples: used,
            }]
        }
        SamplerSpec::Layered { k_min, k_max } => {
            let (k_min, k_max) = (*k_min, (*k_max).max(*k_min));
            let anchor = dom.deep_point(T::of(4.0), seed)?;
            let scales: Vec<u32> = (k_min..=k_max).collect();
            let per = (n / scales.len()).max(1);
            let workers = threads.max(1).min(scales.len());
            if workers <= 1 {
                scales
                    .iter()
                    .map(|&k| scan_one_scale(dom, &metric, &anchor, k_min, k, per, seed))
                    .collect::<Result<Vec<_>>>()?
            } else {
                let chunks: Vec<Vec<u32>> = scales
                    .chunks(scales.len().div_ceil(workers))
                    .map(|c| c.to_vec())
                    .collect();
                let results: Vec<Result<Vec<ScaleStat<T>>>> = std::thread::scope(|scope| {
                    let handles: Vec<_> = chunks
                        .iter()
                        .map(|chunk| {
                            let metric_ref = &metric;
                            let anchor_ref = &anchor;
                            scope.spawn(move || {
                                chunk
                                    .iter()
                                    .map(|&k| {
                                        scan_one_scale(
                                            dom, metric_ref, anchor_ref, k_min, k, per, seed,
                                        )
                                    })
                                    .collect::<Result<Vec<_>>>()
                            })
                        })
                        .collect();
                    handles.into_iter().map(|h| h.join().unwrap()).collect()
                });
                let mut flat = Vec::new();
                for r in results {
                    flat.extend(r?);
                }
                flat.sort_by_key(|s| s.k);
                flat
            }
        }
    };

    let mut delta_lower = T::zero();
    let mut delta_upper = T::zero();
    let mut samples = 0usize;
    for s in &per_scale {
        delta_lower = delta_lower.max(s.delta_lower);
        delta_upper = delta_upper.max(s.delta_upper_estimate);
        samples += s.triples;
    }
    Ok(HyperbolicityReport {
        delta_lower,
        delta_upper_estimate: delta_upper.max(delta_lower),
        samples,
        seed,
        per_scale,
    })
}

// --- fat triangles -------------------------------------------------------------

/// Boundary-disk data for the witness: an interior basepoint, a point in
/// the open analytic disk inside the boundary, and a point on the disk edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundaryDiskWitness<T: Real> {
    pub interior: CVector<T>,
    pub disk_point: CVector<T>,
    pub disk_edge: CVector<T>,
}

/// Triangle with a certified thickness lower bound: some point on one side
/// is at least `defect_lower` away from the union of the other two sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TriangleDefect<T: Real> {
    pub vertices: [CVector<T>; 3],
    pub defect_lower: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WitnessOutcome<T: Real> {
    pub defect: TriangleDefect<T>,
    /// Whether the requested thickness was certified within budget.
    pub reached: bool,
    pub t_used: T,
    /// (T, certified defect) per doubling step; nondecreasing in T.
    pub history: Vec<(T, T)>,
}

/// Segment discretization with certified piece lengths for the upper gauge.
struct SideProfile<T: Real> {
    nodes: Vec<CVector<T>>,
    piece_len: Vec<T>,
}

/// Adaptive discretization of the segment [a, b]. Piece lengths bound the
/// metric length from above by the trapezoid rule on the centered gauge
/// |v| / delta(x; v): delta is concave along segments of a convex set, so
/// the gauge is convex and the trapezoid overestimates. Pieces split until
/// each carries at most `target` length (or the piece budget runs out).
fn side_profile<T: Real>(
    dom: &Domain<T>,
    a: &CVector<T>,
    b: &CVector<T>,
    target: T,
    max_pieces: usize,
) -> SideProfile<T> {
    let v = b.sub(a);
    if v.norm() <= T::of(1e-300) {
        return SideProfile {
            nodes: vec![a.clone()],
            piece_len: vec![],
        };
    }
    let gauge = |u: T| -> T {
        let x = a.add(&v.scale(u));
        match dom.dir_boundary_distance(&x, &v) {
            Ok(dd) if dd.is_finite() && dd.distance > T::zero() => v.norm() / dd.distance,
            _ => T::infinity(),
        }
    };
    // pieces as (u_from, u_to, gauge_from, gauge_to)
    let mut pieces: Vec<(T, T, T, T)> = Vec::new();
    let seed = 16usize;
    let mut gs = Vec::with_capacity(seed + 1);
    for i in 0..=seed {
        gs.push(gauge(T::of(i as f64 / seed as f64)));
    }
    for i in 0..seed {
        let (u0, u1) = (T::of(i as f64 / seed as f64), T::of((i + 1) as f64 / seed as f64));
        pieces.push((u0, u1, gs[i], gs[i + 1]));
    }
    let len_of = |p: &(T, T, T, T)| (p.2 + p.3) * T::of(0.5) * (p.1 - p.0);
    loop {
        let mut worst = 0usize;
        let mut worst_len = T::zero();
        for (i, p) in pieces.iter().enumerate() {
            let l = len_of(p);
            if l > worst_len {
                worst_len = l;
                worst = i;
            }
        }
        if worst_len <= target || pieces.len() >= max_pieces {
            break;
        }
        let (u0, u1, g0, g1) = pieces[worst];
        let um = (u0 + u1) * T::of(0.5);
        let gm = gauge(um);
        pieces[worst] = (u0, um, g0, gm);
        pieces.insert(worst + 1, (um, u1, gm, g1));
    }

    let mut nodes = Vec::with_capacity(pieces.len() + 1);
    nodes.push(a.clone());
    let mut piece_len = Vec::with_capacity(pieces.len());
    for p in &pieces {
        nodes.push(a.add(&v.scale(p.1)));
        piece_len.push(len_of(p));
    }
    SideProfile { nodes, piece_len }
}

/// Certified lower bound on the distance from `pt` to the segment behind
/// `profile`: within each piece, d(pt, s) >= max(endpoint distances) - piece
/// length.
fn side_lower<T: Real>(
    metric: &Metric<'_, T>,
    pt: &CVector<T>,
    profile: &SideProfile<T>,
) -> Result<T> {
    let lows: Vec<T> = profile
        .nodes
        .iter()
        .map(|s| metric.bracket(pt, s).map(|b| b.lower))
        .collect::<Result<Vec<_>>>()?;
    let mut best = T::infinity();
    for (i, len) in profile.piece_len.iter().enumerate() {
        let piece = lows[i].max(lows[i + 1]) - *len;
        if piece < best {
            best = piece;
        }
    }
    Ok(best.max(T::zero()))
}

/// Margin-space evaluator for the witness on a unit polydisk in standard
/// position. Every point of the construction has real coordinates 1 - m_j
/// whose margins m_j interpolate linearly along the rays and sides, so the
/// whole computation runs on margins: exact factor distances become
/// atanh(|m_a - m_b| / (m_a + m_b - m_a m_b)) and the gauge along a side is
/// max_j |v_j| / m_j. This keeps the construction accurate at boundary
/// depths far below machine epsilon, where absolute coordinates would round
/// onto the boundary.
struct MarginWitness<T: Real> {
    o: Vec<T>,
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> MarginWitness<T> {
    fn margins_of(v: &CVector<T>) -> Option<Vec<T>> {
        let mut out = Vec::with_capacity(v.dim());
        for z in v.coords() {
            if z.im != T::zero() || z.re < T::zero() || z.re > T::one() {
                return None;
            }
            out.push(T::one() - z.re);
        }
        Some(out)
    }

    fn try_new(dom: &Domain<T>, witness: &BoundaryDiskWitness<T>) -> Option<Self> {
        let Domain::Polydisk { center, radii } = dom else {
            return None;
        };
        if center.norm() != T::zero() || radii.iter().any(|r| *r != T::one()) {
            return None;
        }
        let o = Self::margins_of(&witness.interior)?;
        let x = Self::margins_of(&witness.disk_point)?;
        let y = Self::margins_of(&witness.disk_edge)?;
        Some(Self { o, x, y })
    }

    fn validate(&self) -> Result<()> {
        if self.o.iter().any(|m| !(*m > T::zero())) {
            return Err(Error::OutsideDomain);
        }
        let on_boundary = |m: &[T]| m.iter().any(|v| *v == T::zero());
        if !on_boundary(&self.x) || !on_boundary(&self.y) {
            return Err(Error::NotOnBoundary { residual: 0.0 });
        }
        // the open segment [x, y] stays in the boundary iff the zero margin
        // is shared by a coordinate
        let shared = self
            .x
            .iter()
            .zip(&self.y)
            .any(|(a, b)| *a == T::zero() && *b == T::zero());
        if !shared {
            return Err(Error::BadSpec {
                reason: "segment [x, y] leaves the boundary: no affine disk there".into(),
            });
        }
        Ok(())
    }

    fn lerp(a: &[T], b: &[T], w: T) -> Vec<T> {
        a.iter().zip(b).map(|(x, y)| *x + (*y - *x) * w).collect()
    }

    /// Exact polydisk distance from margins (all coordinates real positive).
    fn dist(a: &[T], b: &[T]) -> T {
        let mut worst = T::zero();
        for (ma, mb) in a.iter().zip(b) {
            let denom = *ma + *mb - *ma * *mb;
            if denom <= T::zero() {
                return T::infinity();
            }
            let d = ((*ma - *mb).abs() / denom).atanh();
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    /// Adaptive certified profile of the segment a -> b in margin space.
    /// Direction components are v_j = m_a_j - m_b_j; the centered gauge
    /// max_j |v_j| / m_j(u) is convex in u, so trapezoid pieces overestimate.
    fn side_profile(&self, a: &[T], b: &[T], target: T, max_pieces: usize) -> (Vec<Vec<T>>, Vec<T>) {
        let v: Vec<T> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
        let gauge = |u: T| -> T {
            let m = Self::lerp(a, b, u);
            let mut worst = T::zero();
            for (vj, mj) in v.iter().zip(&m) {
                if vj.abs() == T::zero() {
                    continue;
                }
                if !(*mj > T::zero()) {
                    return T::infinity();
                }
                let g = vj.abs() / *mj;
                if g > worst {
                    worst = g;
                }
            }
            worst
        };
        let seed = 16usize;
        let mut pieces: Vec<(T, T, T, T)> = Vec::new();
        let mut gs = Vec::with_capacity(seed + 1);
        for i in 0..=seed {
            gs.push(gauge(T::of(i as f64 / seed as f64)));
        }
        for i in 0..seed {
            pieces.push((
                T::of(i as f64 / seed as f64),
                T::of((i + 1) as f64 / seed as f64),
                gs[i],
                gs[i + 1],
            ));
        }
        let len_of = |p: &(T, T, T, T)| (p.2 + p.3) * T::of(0.5) * (p.1 - p.0);
        loop {
            let mut worst = 0usize;
            let mut worst_len = T::zero();
            for (i, p) in pieces.iter().enumerate() {
                let l = len_of(p);
                if l > worst_len {
                    worst_len = l;
                    worst = i;
                }
            }
            if worst_len <= target || pieces.len() >= max_pieces {
                break;
            }
            let (u0, u1, g0, g1) = pieces[worst];
            let um = (u0 + u1) * T::of(0.5);
            let gm = gauge(um);
            pieces[worst] = (u0, um, g0, gm);
            pieces.insert(worst + 1, (um, u1, gm, g1));
        }
        let mut nodes = vec![a.to_vec()];
        let mut lens = Vec::with_capacity(pieces.len());
        for p in &pieces {
            nodes.push(Self::lerp(a, b, p.1));
            lens.push(len_of(p));
        }
        (nodes, lens)
    }

    fn side_lower(pt: &[T], nodes: &[Vec<T>], lens: &[T]) -> T {
        let lows: Vec<T> = nodes.iter().map(|s| Self::dist(pt, s)).collect();
        let mut best = T::infinity();
        for (i, len) in lens.iter().enumerate() {
            let piece = lows[i].max(lows[i + 1]) - *len;
            if piece < best {
                best = piece;
            }
        }
        best.max(T::zero())
    }

    fn materialize(m: &[T]) -> CVector<T> {
        CVector::new(
            m.iter()
                .map(|v| num_complex::Complex::new(T::one() - *v, T::zero()))
                .collect(),
        )
        .expect("nonempty margins")
    }

    fn run(&self, m_target: T, doublings: usize) -> Result<WitnessOutcome<T>> {
        self.validate()?;
        let mut history: Vec<(T, T)> = Vec::new();
        let mut best: Option<(T, T, Vec<T>, Vec<T>)> = None;
        let mut t_cap = T::one();
        for _ in 0..doublings.max(1) {
            let w_cap = (-T::of(2.0) * t_cap).exp();
            if w_cap == T::zero() {
                break; // margins below the floating-point floor
            }
            let x_t = Self::lerp(&self.x, &self.o, w_cap);
            let y_t = Self::lerp(&self.y, &self.o, w_cap);
            let (far_nodes, far_lens) = self.side_profile(&x_t, &y_t, T::of(0.2), 4096);
            let (near_nodes, near_lens) = self.side_profile(&y_t, &self.o, T::of(0.2), 4096);
            let mut defect = T::zero();
            for i in 1..=WITNESS_T0_GRID {
                let t0 = t_cap * T::of(i as f64) / T::of(WITNESS_T0_GRID as f64);
                let pt = Self::lerp(&self.x, &self.o, (-T::of(2.0) * t0).exp());
                let d = Self::side_lower(&pt, &far_nodes, &far_lens)
                    .min(Self::side_lower(&pt, &near_nodes, &near_lens));
                if d > defect {
                    defect = d;
                }
            }
            history.push((t_cap, defect));
            if best.as_ref().is_none_or(|(_, bd, _, _)| defect > *bd) {
                best = Some((t_cap, defect, x_t.clone(), y_t.clone()));
            }
            if defect > m_target {
                return Ok(WitnessOutcome {
                    defect: TriangleDefect {
                        vertices: [
                            Self::materialize(&self.o),
                            Self::materialize(&x_t),
                            Self::materialize(&y_t),
                        ],
                        defect_lower: defect,
                    },
                    reached: true,
                    t_used: t_cap,
                    history,
                });
            }
            t_cap *= T::of(2.0);
        }
        let (t_best, d_best, x_t, y_t) = best.expect("at least one doubling ran");
        Ok(WitnessOutcome {
            defect: TriangleDefect {
                vertices: [
                    Self::materialize(&self.o),
                    Self::materialize(&x_t),
                    Self::materialize(&y_t),
                ],
                defect_lower: d_best,
            },
            reached: false,
            t_used: t_best,
            history,
        })
    }
}

/// Builds the fat quasi-geodesic triangle (o, x_T, y_T) and doubles T until
/// the certified defect exceeds `m_target`. When the budget runs out the
/// best triangle found is returned with `reached == false`.
///
/// On a unit polydisk with real nonnegative witness data the evaluation
/// runs in margin space, which keeps the certificate
/// exact at large T; other domains use bracket-certified side profiles.
pub fn fat_triangle_witness<T: Real>(
    dom: &Domain<T>,
    witness: &BoundaryDiskWitness<T>,
    m_target: T,
    doublings: usize,
    budget: usize,
) -> Result<WitnessOutcome<T>> {
    if let Some(margin) = MarginWitness::try_new(dom, witness) {
        return margin.run(m_target, doublings);
    }
    dom.require_carrier()?;
    let o = &witness.interior;
    let x = &witness.disk_point;
    let y = &witness.disk_edge;
    dom.require_member(o)?;

    // x, y, and the interior of [x, y] must all sit on the boundary;
    // a strictly convex domain (no boundary disk) fails here.
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let pt = x.add(&y.sub(x).scale(T::of(frac)));
        if dom.contains(&pt) {
            return Err(Error::BadSpec {
                reason: "segment [x, y] leaves the boundary: no affine disk there".into(),
            });
        }
        let inward = o.sub(&pt);
        let nudge = pt.add(&inward.scale(T::of(1e-7)));
        if !dom.contains(&nudge) {
            return Err(Error::NotOnBoundary { residual: 1e-7 });
        }
    }

    let metric = Metric::auto(dom, budget);
    let point_on = |from: &CVector<T>, t: T| -> CVector<T> {
        // x_t = x + e^{-2t}(o - x)
        from.add(&o.sub(from).scale((-T::of(2.0) * t).exp()))
    };

    let mut history: Vec<(T, T)> = Vec::new();
    let mut best: Option<(T, T)> = None; // (T, defect)
    let mut t_cap = T::one();
    for _ in 0..doublings.max(1) {
        let x_t = point_on(x, t_cap);
        let y_t = point_on(y, t_cap);
        // Absolute coordinates collapse onto the boundary once e^{-2T}
        // drops below machine epsilon; stop there and report the best
        // triangle found so far.
        if !dom.contains(&x_t) || !dom.contains(&y_t) {
            break;
        }
        let far = side_profile(dom, &x_t, &y_t, T::of(0.2), 2048);
        let near = side_profile(dom, &y_t, o, T::of(0.2), 2048);
        let mut defect = T::zero();
        for i in 1..=WITNESS_T0_GRID {
            let t0 = t_cap * T::of(i as f64) / T::of(WITNESS_T0_GRID as f64);
            let pt = point_on(x, t0);
            if !dom.contains(&pt) {
                continue;
            }
            let d = side_lower(&metric, &pt, &far)?.min(side_lower(&metric, &pt, &near)?);
            if d > defect {
                defect = d;
            }
        }
        history.push((t_cap, defect));
        if best.is_none_or(|(_, bd)| defect > bd) {
            best = Some((t_cap, defect));
        }
        if defect > m_target {
            return Ok(WitnessOutcome {
                defect: TriangleDefect {
                    vertices: [o.clone(), x_t, y_t],
                    defect_lower: defect,
                },
                reached: true,
                t_used: t_cap,
                history,
            });
        }
        t_cap *= T::of(2.0);
    }

    let (t_best, d_best) = best.ok_or(Error::FrameSearchFailed { step: 0 })?;
    Ok(WitnessOutcome {
        defect: TriangleDefect {
            vertices: [o.clone(), point_on(x, t_best), point_on(y, t_best)],
            defect_lower: d_best,
        },
        reached: false,
        t_used: t_best,
        history,
    })
}

/// Certified thickness of the triangle with the given vertices, using
/// near-geodesic witness polylines as sides. Returns the largest certified
/// distance from a sampled point of side xy to the union of the other two
/// sides.
pub fn thin_triangle_defect<T: Real>(
    dom: &Domain<T>,
    x: &CVector<T>,
    y: &CVector<T>,
    z: &CVector<T>,
    side_samples: usize,
    budget: usize,
) -> Result<TriangleDefect<T>> {
    dom.require_carrier()?;
    dom.require_member(x)?;
    dom.require_member(y)?;
    dom.require_member(z)?;
    let vertices = [x.clone(), y.clone(), z.clone()];
    if x == y && y == z {
        return Ok(TriangleDefect {
            vertices,
            defect_lower: T::zero(),
        });
    }
    let metric = Metric::auto(dom, budget);
    let side = |a: &CVector<T>, b: &CVector<T>| -> Result<PathPolyline<T>> {
        Ok(crate::kobayashi::distance_upper(dom, a, b, budget)?.1)
    };
    let side_xy = side(x, y)?;
    let side_yz = side(y, z)?;
    let side_zx = side(z, x)?;

    let mut profiles = Vec::new();
    for path in [&side_yz, &side_zx] {
        for w in path.nodes.windows(2) {
            profiles.push(side_profile(dom, &w[0], &w[1], T::of(0.05), 512));
        }
    }

    // Sample side xy uniformly in metric length, not Euclidean length: the
    // thick points sit deep toward the boundary where Euclidean spacing
    // collapses. The adaptive profile nodes are already metric-equidistributed.
    let mut xy_nodes: Vec<CVector<T>> = Vec::new();
    for w in side_xy.nodes.windows(2) {
        let prof = side_profile(dom, &w[0], &w[1], T::of(0.05), 512);
        xy_nodes.extend(prof.nodes);
    }
    if xy_nodes.is_empty() {
        xy_nodes.push(side_xy.nodes[0].clone());
    }
    let samples = side_samples.max(2).min(xy_nodes.len());
    let mut defect = T::zero();
    for i in 0..samples {
        let idx = i * (xy_nodes.len() - 1) / (samples - 1).max(1);
        let pt = &xy_nodes[idx];
        if !dom.contains(pt) {
            continue;
        }
        let mut low = T::infinity();
        for prof in &profiles {
            low = low.min(side_lower(&metric, pt, prof)?);
        }
        if low.is_finite() && low > defect {
            defect = low;
        }
    }
    Ok(TriangleDefect {
        vertices,
        defect_lower: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Domain<f64>;
    type V = CVector<f64>;

    fn cv(pairs: &[(f64, f64)]) -> V {
        V::from_pairs(pairs).unwrap()
    }

    #[test]
    fn gromov_product_examples() {
        let bidisk = D::unit_bidisk();
        let o = V::zero(2);
        // x = o gives exactly zero
        let g = gromov_product(&bidisk, &o, &cv(&[(0.5, 0.0), (0.0, 0.0)]), &o, 0).unwrap();
        assert_eq!((g.lower, g.upper), (0.0, 0.0));

        // (x|y)_o = (1.4722 + 1.4722 - 1.4722)/2 under the max metric
        let x = cv(&[(0.9, 0.0), (0.0, 0.0)]);
        let y = cv(&[(0.0, 0.0), (0.9, 0.0)]);
        let g = gromov_product(&bidisk, &x, &y, &o, 0).unwrap();
        let a = 0.9f64.atanh();
        assert!((g.lower - a / 2.0).abs() < 1e-12);
        assert!((g.upper - a / 2.0).abs() < 1e-12);

        // disk: o on the geodesic between 0.5 and -0.5 gives product 0
        let disk = D::unit_disk();
        let g = gromov_product(
            &disk,
            &cv(&[(0.5, 0.0)]),
            &cv(&[(-0.5, 0.0)]),
            &V::zero(1),
            0,
        )
        .unwrap();
        assert!(g.lower.abs() < 1e-12 && g.upper.abs() < 1e-12);
    }

    #[test]
    fn product_nonnegative_and_basepoint_stable_on_models() {
        use crate::sampling::rng_from_seed;
        let ball = D::unit_ball(2);
        let model = crate::kobayashi::ExactModel::detect(&ball).unwrap();
        let mut rng = rng_from_seed(6);
        for _ in 0..100 {
            let x = ball.sample_chord_point(&V::zero(2), &mut rng);
            let y = ball.sample_chord_point(&V::zero(2), &mut rng);
            let o = ball.sample_chord_point(&V::zero(2), &mut rng);
            let o2 = ball.sample_chord_point(&V::zero(2), &mut rng);
            let g = gromov_product(&ball, &x, &y, &o, 0).unwrap();
            assert!(g.lower >= -1e-12);
            let g2 = gromov_product(&ball, &x, &y, &o2, 0).unwrap();
            let shift = model.distance(&o, &o2).unwrap();
            assert!((g.lower - g2.lower).abs() <= shift + 1e-9);
        }
    }

    #[test]
    fn degenerate_triples_contribute_zero() {
        // pools of two points only produce quadruples with z = x or z = y
        let disk = D::unit_disk();
        let pool = vec![V::zero(1), cv(&[(0.5, 0.0)]), cv(&[(-0.3, 0.2)])];
        let report =
            four_point_scan(&disk, &SamplerSpec::Points(pool), 8, 0, 1, 1).unwrap();
        assert_eq!(report.delta_lower, 0.0);
    }

    #[test]
    fn layered_scan_runs_deterministically() {
        let ball = D::unit_ball(2);
        let spec = SamplerSpec::Layered { k_min: 2, k_max: 4 };
        let r1 = four_point_scan(&ball, &spec, 300, 0, 7, 1).unwrap();
        let r2 = four_point_scan(&ball, &spec, 300, 0, 7, 2).unwrap();
        assert_eq!(r1.delta_lower, r2.delta_lower);
        assert_eq!(r1.delta_upper_estimate, r2.delta_upper_estimate);
        assert!(r1.delta_lower <= r1.delta_upper_estimate);
        assert_eq!(r1.per_scale.len(), 3);
    }

    #[test]
    fn witness_grows_on_bidisk_and_rejects_ball() {
        let bidisk = D::unit_bidisk();
        let witness = BoundaryDiskWitness {
            interior: V::zero(2),
            disk_point: cv(&[(0.0, 0.0), (1.0, 0.0)]),
            disk_edge: cv(&[(1.0, 0.0), (1.0, 0.0)]),
        };
        let out = fat_triangle_witness(&bidisk, &witness, 1.0, 8, 0).unwrap();
        assert!(out.reached, "defect history: {:?}", out.history);
        assert!(out.defect.defect_lower > 1.0);
        assert!(out.t_used <= 8.0 + 1e-9);
        // certified defects are nondecreasing along the doubling history
        for w in out.history.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9);
        }

        // trivial target: any nondegenerate triangle qualifies
        let out0 = fat_triangle_witness(&bidisk, &witness, 0.0, 3, 0).unwrap();
        assert!(out0.reached);

        // the ball has no affine disk in its boundary
        let ball = D::unit_ball(2);
        let bad = BoundaryDiskWitness {
            interior: V::zero(2),
            disk_point: cv(&[(1.0, 0.0), (0.0, 0.0)]),
            disk_edge: cv(&[(0.0, 0.0), (1.0, 0.0)]),
        };
        assert!(fat_triangle_witness(&ball, &bad, 1.0, 3, 0).is_err());
    }

    #[test]
    fn thin_triangle_defect_disk_is_bounded() {
        let disk = D::unit_disk();
        let x = cv(&[(0.9, 0.0)]);
        let y = cv(&[(-0.9, 0.0)]);
        let z = cv(&[(0.0, 0.9)]);
        let defect = thin_triangle_defect(&disk, &x, &y, &z, 8, 4).unwrap();
        assert!(defect.defect_lower < 1.0, "disk triangles stay thin");

        let degenerate = thin_triangle_defect(&disk, &x, &x, &x, 4, 2).unwrap();
        assert_eq!(degenerate.defect_lower, 0.0);
    }

    #[test]
    fn thin_triangle_consistent_with_witness_certificate() {
        // the triangle certified fat by the witness at M = 2 must also look
        // fat to the generic thin-triangle scan
        let bidisk = D::unit_bidisk();
        let witness = BoundaryDiskWitness {
            interior: V::zero(2),
            disk_point: cv(&[(0.0, 0.0), (1.0, 0.0)]),
            disk_edge: cv(&[(1.0, 0.0), (1.0, 0.0)]),
        };
        let out = fat_triangle_witness(&bidisk, &witness, 2.0, 8, 0).unwrap();
        assert!(out.reached);
        let [o, x_t, y_t] = out.defect.vertices.clone();
        let defect = thin_triangle_defect(&bidisk, &o, &x_t, &y_t, 48, 0).unwrap();
        assert!(
            defect.defect_lower > 2.0,
            "thin-triangle defect {} below the witness certificate",
            defect.defect_lower
        );
    }
}
