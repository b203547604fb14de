//! Local Hausdorff distance between convex sets, d_H^(R).
//!
//! Convex bodies are compared through their support functions: for compact
//! convex K1, K2 the Hausdorff distance equals sup_u |h_K1(u) - h_K2(u)| over
//! unit directions. Each truncated body closure(D) n B_R(0) is sampled as a
//! radial boundary cloud from an interior anchor, the support function is
//! read off the cloud, and the sup is taken over a deterministic
//! Fibonacci-type direction grid. The angular gap of the grid sets the
//! reported resolution; the grid doubles (up to a cap) when the measured gap
//! is within twice the resolution.

use crate::complex::CVector;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::params::{HAUSDORFF_DIRECTIONS, HAUSDORFF_DIRECTIONS_MAX};
use crate::sampling::{fibonacci_sphere_grid, rng_from_seed};
use crate::scalar::Real;

/// Hausdorff estimate with its sampling resolution.
#[derive(Debug, Clone)]
pub struct HausdorffEstimate<T: Real> {
    pub distance: T,
    /// Support-sampling error scale: R times the squared covering angle.
    pub resolution: T,
    pub directions: usize,
}

/// Sampled support function of one truncated body on a fixed grid size.
#[derive(Debug, Clone)]
pub struct SupportCloud<T: Real> {
    pub count: usize,
    pub values: Vec<T>,
    pub resolution: T,
}

fn interior_anchor<T: Real>(dom: &Domain<T>, r: T) -> Result<CVector<T>> {
    let origin = CVector::zero(dom.dim());
    if dom.contains(&origin) {
        return Ok(origin);
    }
    if let Domain::Ball { center, .. } | Domain::Polydisk { center, .. } = dom {
        if center.norm() < r * T::of(0.999) {
            return Ok(center.clone());
        }
    }
    let mut rng = rng_from_seed(0);
    for _ in 0..8192 {
        let cand = crate::sampling::random_in_unit_ball::<T>(&mut rng, dom.dim())
            .scale(r * T::of(0.95));
        if dom.contains(&cand) {
            return Ok(cand);
        }
    }
    Err(Error::EmptyTruncation)
}

/// Exit parameter of the ray against the monitoring ball B_R(0).
fn ball_exit<T: Real>(anchor: &CVector<T>, u: &CVector<T>, r: T) -> T {
    let a = u.norm_sq();
    let b = T::of(2.0) * anchor.dot_re(u);
    let c = anchor.norm_sq() - r * r;
    let disc = (b * b - T::of(4.0) * a * c).max(T::zero());
    (-b + disc.sqrt()) / (T::of(2.0) * a)
}

/// Largest covering angle of the grid, estimated on a probe subset.
fn covering_angle<T: Real>(dirs: &[CVector<T>]) -> T {
    let stride = (dirs.len() / 48).max(1);
    let mut worst = T::zero();
    for probe in dirs.iter().step_by(stride) {
        let mut best = T::of(-1.0);
        for other in dirs {
            if std::ptr::eq(probe, other) {
                continue;
            }
            let c = probe.dot_re(other);
            if c > best {
                best = c;
            }
        }
        let angle = best.min(T::one()).max(-T::one()).acos();
        if angle > worst {
            worst = angle;
        }
    }
    worst
}

/// Samples the support function of closure(dom) n B_r(0) on the standard
/// grid of the given size.
pub fn support_cloud<T: Real>(dom: &Domain<T>, r: T, count: usize) -> Result<SupportCloud<T>> {
    let dim = dom.dim();
    let anchor = interior_anchor(dom, r)?;
    let dirs = fibonacci_sphere_grid::<T>(count, dim);
    let n_reals = 2 * dim;

    // Flat row-major buffers keep the O(count^2) support sweep in cache.
    let mut boundary: Vec<T> = Vec::with_capacity(count * n_reals);
    let mut flat_dirs: Vec<T> = Vec::with_capacity(count * n_reals);
    for u in &dirs {
        let t_dom = dom.ray_hit(&anchor, u).unwrap_or_else(T::infinity);
        let t = t_dom.min(ball_exit(&anchor, u, r));
        boundary.extend(anchor.add_scaled(u, t).to_reals());
        flat_dirs.extend(u.to_reals());
    }

    let mut values = vec![T::neg_infinity(); count];
    for b in boundary.chunks_exact(n_reals) {
        for (h, d) in values.iter_mut().zip(flat_dirs.chunks_exact(n_reals)) {
            let mut dot = T::zero();
            for k in 0..n_reals {
                dot += d[k] * b[k];
            }
            if dot > *h {
                *h = dot;
            }
        }
    }

    let theta = covering_angle(&dirs);
    Ok(SupportCloud {
        count,
        values,
        resolution: r * theta * theta,
    })
}

/// Sup of |h1 - h2| over the shared grid.
pub fn hausdorff_from_clouds<T: Real>(a: &SupportCloud<T>, b: &SupportCloud<T>) -> T {
    assert_eq!(a.count, b.count, "clouds must share one direction grid");
    let mut worst = T::zero();
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = (*x - *y).abs();
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// Local Hausdorff distance d_H^(R) between the closures of two convex sets
/// truncated to B_R(0). The grid refines while the measured gap is within
/// twice the reported resolution.
pub fn local_hausdorff<T: Real>(
    dom_a: &Domain<T>,
    dom_b: &Domain<T>,
    r: T,
) -> Result<HausdorffEstimate<T>> {
    if dom_a.dim() != dom_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom_a.dim(),
            got: dom_b.dim(),
        });
    }
    let mut count = HAUSDORFF_DIRECTIONS;
    loop {
        let a = support_cloud(dom_a, r, count)?;
        let b = support_cloud(dom_b, r, count)?;
        let distance = hausdorff_from_clouds(&a, &b);
        let resolution = a.resolution.max(b.resolution);
        if distance < T::of(2.0) * resolution && count < HAUSDORFF_DIRECTIONS_MAX {
            count = (count * 2).min(HAUSDORFF_DIRECTIONS_MAX);
            continue;
        }
        return Ok(HausdorffEstimate {
            distance,
            resolution,
            directions: count,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Domain<f64>;
    type V = CVector<f64>;

    #[test]
    fn identical_sets_have_zero_distance() {
        let ball = D::unit_ball(2);
        let est = local_hausdorff(&ball, &ball, 3.0).unwrap();
        assert!(est.distance <= est.resolution.max(1e-12));
    }

    #[test]
    fn concentric_balls_differ_by_radius_gap() {
        let a = D::unit_ball(2);
        let b = D::ball(V::zero(2), 1.1).unwrap();
        let est = local_hausdorff(&a, &b, 3.0).unwrap();
        assert!(
            (est.distance - 0.1).abs() <= est.resolution,
            "distance {} resolution {}",
            est.distance,
            est.resolution
        );
    }

    #[test]
    fn shifted_balls_differ_by_shift() {
        let a = D::unit_ball(2);
        let b = D::ball(V::from_pairs(&[(0.05, 0.0), (0.0, 0.0)]).unwrap(), 1.0).unwrap();
        let est = local_hausdorff(&a, &b, 3.0).unwrap();
        assert!(
            (est.distance - 0.05).abs() <= est.resolution,
            "distance {} resolution {}",
            est.distance,
            est.resolution
        );
    }

    #[test]
    fn triangle_inequality_on_sampled_triples() {
        let a = D::unit_ball(2);
        let b = D::ball(V::from_pairs(&[(0.1, 0.0), (0.0, 0.0)]).unwrap(), 1.0).unwrap();
        let c = D::ball(V::zero(2), 1.2).unwrap();
        let dab = local_hausdorff(&a, &b, 3.0).unwrap();
        let dbc = local_hausdorff(&b, &c, 3.0).unwrap();
        let dac = local_hausdorff(&a, &c, 3.0).unwrap();
        let res = dab.resolution.max(dbc.resolution).max(dac.resolution);
        assert!(dac.distance <= dab.distance + dbc.distance + 2.0 * res);
        // symmetry comes from the shared grid
        let dba = local_hausdorff(&b, &a, 3.0).unwrap();
        assert!((dab.distance - dba.distance).abs() < 1e-12);
    }
}
