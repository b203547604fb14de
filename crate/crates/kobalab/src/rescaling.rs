//! Affine blow-up at boundary points and convergence monitoring.
//!
//! The frame at an interior point q is built by repeated closest-point
//! searches: x_0 is a boundary point closest to q, and x_{k+1} is the
//! closest boundary point inside the maximal complex plane through q
//! orthogonal to the lines q -> x_0, ..., x_k. With tau_i = |q - x_i|, the
//! composite Lambda U T (translate q to the origin, rotate the frame
//! directions onto the axes, stretch by 1/tau_i) sends each x_i to the i-th
//! standard basis vector. Pushing q toward a boundary point and applying the
//! composites blows the domain up; the trace records tau decay and, when a
//! target is supplied, the local Hausdorff gap per step.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::complex::{orthonormalize, CVector};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::hausdorff::{hausdorff_from_clouds, support_cloud, SupportCloud};
use crate::kobayashi::{DistanceBracket, Metric};
use crate::linalg::{AffineMap, CMatrix};
use crate::params::{FRAME_TAU_MIN, HAUSDORFF_DIRECTIONS, HAUSDORFF_DIRECTIONS_MAX};
use crate::scalar::Real;

/// Per-point blow-up data: boundary frame, stretch factors, and the
/// composite normalization Lambda U T.
#[derive(Debug, Clone)]
pub struct RescalingFrame<T: Real> {
    pub base_point: CVector<T>,
    pub boundary_points: Vec<CVector<T>>,
    pub taus: Vec<T>,
    pub translation: AffineMap<T>,
    pub unitary: CMatrix<T>,
    pub scaling: CMatrix<T>,
    pub composite: AffineMap<T>,
    /// max_i |composite(x_i) - e_i|; at most 1e-8 on success.
    pub residual: T,
}

/// Builds the frame at q. Fails when q is too close to the boundary for the
/// stretch to stay conditioned, or when a plane-restricted boundary search
/// finds nothing.
pub fn rescaling_frame<T: Real>(dom: &Domain<T>, q: &CVector<T>) -> Result<RescalingFrame<T>> {
    dom.require_carrier()?;
    dom.require_member(q)?;
    let d = dom.dim();

    let x0 = dom.closest_boundary_point(q)?;
    let tau0 = q.dist(&x0);
    if tau0 < T::of(FRAME_TAU_MIN) {
        return Err(Error::FrameConditioning {
            tau0: tau0.to_f64_lossy(),
        });
    }

    let mut points = vec![x0];
    let mut taus = vec![tau0];
    let mut dirs = vec![points[0].sub(q).scale(T::one() / tau0)];

    for step in 1..d {
        // Orthonormal basis of the Hermitian complement of the chosen lines.
        let mut span = dirs.clone();
        for i in 0..d {
            span.push(CVector::axis(d, i, Complex::new(T::one(), T::zero())));
        }
        let frame = orthonormalize(&span, T::of(1e-9));
        if frame.len() < d {
            return Err(Error::FrameSearchFailed { step });
        }
        let complement = &frame[dirs.len()..];
        let (_, x) = dom
            .closest_boundary_point_in_plane(q, complement)
            .map_err(|_| Error::FrameSearchFailed { step })?;
        let tau = q.dist(&x);
        if tau < T::of(FRAME_TAU_MIN) {
            return Err(Error::FrameConditioning {
                tau0: tau.to_f64_lossy(),
            });
        }
        dirs.push(x.sub(q).scale(T::one() / tau));
        points.push(x);
        taus.push(tau);
    }

    // The plane restriction makes the directions orthogonal by construction;
    // a final Gram-Schmidt absorbs the numerical slack before the unitary is
    // assembled from the conjugated rows.
    let ortho = orthonormalize(&dirs, T::of(1e-9));
    if ortho.len() < d {
        return Err(Error::FrameSearchFailed { step: d });
    }
    let rows: Vec<CVector<T>> = ortho
        .iter()
        .map(|u| {
            CVector::new(u.coords().iter().map(|z| z.conj()).collect()).expect("unit row")
        })
        .collect();
    let unitary = CMatrix::from_rows(rows)?;
    let scaling = CMatrix::diagonal(
        &taus
            .iter()
            .map(|t| Complex::new(T::one() / *t, T::zero()))
            .collect::<Vec<_>>(),
    );
    let translation = AffineMap::translation_to_origin(q);
    let unitary_map = AffineMap::new(unitary.clone(), CVector::zero(d))?;
    let scaling_map = AffineMap::new(scaling.clone(), CVector::zero(d))?;
    let composite = scaling_map.compose(&unitary_map)?.compose(&translation)?;

    let mut residual = T::zero();
    for (i, x) in points.iter().enumerate() {
        let e = CVector::axis(d, i, Complex::new(T::one(), T::zero()));
        let r = composite.apply(x)?.dist(&e);
        if r > residual {
            residual = r;
        }
    }
    if residual > T::of(1e-8) {
        return Err(Error::FrameResidual {
            residual: residual.to_f64_lossy(),
        });
    }

    Ok(RescalingFrame {
        base_point: q.clone(),
        boundary_points: points,
        taus,
        translation,
        unitary,
        scaling,
        composite,
        residual,
    })
}

/// Approach q_n = xi + rate^n * direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ApproachSpec<T: Real> {
    pub direction: CVector<T>,
    pub rate: T,
}

impl<T: Real> ApproachSpec<T> {
    pub fn normal(direction: CVector<T>) -> Self {
        Self {
            direction,
            rate: T::of(0.5),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlowupStep<T: Real> {
    pub n: usize,
    pub q: CVector<T>,
    pub tau: Vec<T>,
    pub hausdorff: Option<T>,
    pub resolution: Option<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BlowupTrace<T: Real> {
    pub steps: Vec<BlowupStep<T>>,
}

/// Runs the blow-up along the approach sequence, rescaling the domain by
/// each step's composite frame map. When `target` is given, the local
/// Hausdorff gap d_H^(R)(A_n Omega, target) is monitored per step with the
/// usual grid-doubling rule (target support clouds are cached per grid
/// size).
pub fn blowup_sequence<T: Real>(
    dom: &Domain<T>,
    xi: &CVector<T>,
    approach: &ApproachSpec<T>,
    n_max: usize,
    radius: T,
    target: Option<&Domain<T>>,
) -> Result<BlowupTrace<T>> {
    dom.require_carrier()?;
    xi.check_dim(dom.dim())?;
    if approach.direction.is_zero() {
        return Err(Error::ZeroVector);
    }
    if !(approach.rate > T::zero() && approach.rate < T::one()) {
        return Err(Error::BadSpec {
            reason: "approach rate must lie in (0, 1)".into(),
        });
    }

    let mut target_clouds: HashMap<usize, SupportCloud<T>> = HashMap::new();
    let mut steps = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let wrap = |source: Error| Error::BlowupStep {
            n,
            source: Box::new(source),
        };
        let q = xi.add(&approach.direction.scale(approach.rate.powi(n as i32)));
        if !dom.contains(&q) {
            return Err(wrap(Error::OutsideDomain));
        }
        let frame = rescaling_frame(dom, &q).map_err(wrap)?;
        let (mut hausdorff, mut resolution) = (None, None);
        if let Some(target_dom) = target {
            let rescaled =
                Domain::affine_image(frame.composite.clone(), dom.clone()).map_err(wrap)?;
            let mut count = HAUSDORFF_DIRECTIONS;
            loop {
                let a = support_cloud(&rescaled, radius, count).map_err(wrap)?;
                let b = match target_clouds.get(&count) {
                    Some(c) => c.clone(),
                    None => {
                        let c = support_cloud(target_dom, radius, count).map_err(wrap)?;
                        target_clouds.insert(count, c.clone());
                        c
                    }
                };
                let distance = hausdorff_from_clouds(&a, &b);
                let res = a.resolution.max(b.resolution);
                if distance < T::of(2.0) * res && count < HAUSDORFF_DIRECTIONS_MAX {
                    count = (count * 2).min(HAUSDORFF_DIRECTIONS_MAX);
                    continue;
                }
                hausdorff = Some(distance);
                resolution = Some(res);
                break;
            }
        }
        steps.push(BlowupStep {
            n,
            q,
            tau: frame.taus.clone(),
            hausdorff,
            resolution,
        });
    }
    Ok(BlowupTrace { steps })
}

// --- infinite-type scaling family ---------------------------------------------

/// One-variable convex profile s -> f(0, s), with the selection of scaling
/// centers z_n used by the diagonal maps.
pub trait ScalingProfile<T: Real> {
    fn value(&self, s: T) -> T;
    /// Returns (z_n, f(z_n)); the profile must dominate f(s) <= f(z_n)
    /// (s/z_n)^n for 0 < s <= z_n.
    fn select(&self, n: u32) -> (T, T);
}

/// exp(-1/s): flat to every polynomial order at 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpInvProfile;

impl<T: Real> ScalingProfile<T> for ExpInvProfile {
    fn value(&self, s: T) -> T {
        if s <= T::zero() {
            T::zero()
        } else {
            (-T::one() / s).exp()
        }
    }

    fn select(&self, n: u32) -> (T, T) {
        // s -> f(s)/s^n increases up to s = 1/n, so any z_n <= 1/n inherits
        // domination on (0, z_n]; 1/(n^2+1) also sends f(z_n)/z_n^n to zero.
        let z = T::one() / T::of((n as f64).mul_add(n as f64, 1.0));
        (z, <Self as ScalingProfile<T>>::value(self, z))
    }
}

/// Rescaled profile value f_n(0, w) = f(0, z_n w) / f(0, z_n).
pub fn rescaled_profile<T: Real>(profile: &impl ScalingProfile<T>, n: u32, w: T) -> T {
    let (z, fz) = profile.select(n);
    profile.value(z * w) / fz
}

/// Diagonal scaling map diag(1/f(0, z_n), 1/z_n) on C^2, after validating
/// the domination inequality f_n(0, w) <= w^n on a sampled |w| grid.
pub fn infinite_type_map<T: Real>(
    profile: &impl ScalingProfile<T>,
    n: u32,
) -> Result<AffineMap<T>> {
    let (z, fz) = profile.select(n);
    if !(z > T::zero()) || !(fz > T::zero()) {
        return Err(Error::BadSpec {
            reason: "profile selection must be positive".into(),
        });
    }
    for k in 1..=20 {
        let w = T::of(k as f64 * 0.05);
        let value = rescaled_profile(profile, n, w);
        let bound = w.powi(n as i32);
        if value > bound * (T::one() + T::of(1e-9)) {
            return Err(Error::ProfileDomination {
                w: w.to_f64_lossy(),
                value: value.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
    }
    let diag = [
        Complex::new(T::one() / fz, T::zero()),
        Complex::new(T::one() / z, T::zero()),
    ];
    if diag.iter().any(|c| !c.re.is_finite()) {
        return Err(Error::NonFinite);
    }
    AffineMap::new(CMatrix::diagonal(&diag), CVector::zero(2))
}

// --- distance continuity under local Hausdorff convergence ----------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProbeTrace<T: Real> {
    pub probe: (CVector<T>, CVector<T>),
    /// First index from which the probe lies in every later domain.
    pub start_index: usize,
    pub limit_bracket: DistanceBracket<T>,
    /// Interval gap to the limit bracket, for each n >= start_index.
    pub gaps: Vec<T>,
    pub terminal_gap: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ContinuityReport<T: Real> {
    pub probes: Vec<ProbeTrace<T>>,
    pub max_terminal_gap: T,
}

/// Checks that distance brackets along a domain sequence approach the
/// bracket of the limit domain at each probe pair.
pub fn distance_continuity_check<T: Real>(
    sequence: &[Domain<T>],
    limit: &Domain<T>,
    probes: &[(CVector<T>, CVector<T>)],
    budget: usize,
) -> Result<ContinuityReport<T>> {
    limit.require_carrier()?;
    let limit_metric = Metric::auto(limit, budget);
    let mut out = Vec::with_capacity(probes.len());
    let mut max_terminal = T::zero();

    for (idx, (p, q)) in probes.iter().enumerate() {
        limit.require_member(p)?;
        limit.require_member(q)?;
        let start_index = (0..sequence.len())
            .find(|&n0| {
                sequence[n0..]
                    .iter()
                    .all(|dom| dom.contains(p) && dom.contains(q))
            })
            .ok_or(Error::ProbeEscapes { probe: idx })?;

        let limit_bracket = limit_metric.bracket(p, q)?;
        let mut gaps = Vec::with_capacity(sequence.len() - start_index);
        for dom in &sequence[start_index..] {
            let bracket = Metric::auto(dom, budget).bracket(p, q)?;
            gaps.push(bracket.gap_to(&limit_bracket));
        }
        let terminal_gap = *gaps.last().unwrap_or(&T::zero());
        if terminal_gap > max_terminal {
            max_terminal = terminal_gap;
        }
        out.push(ProbeTrace {
            probe: (p.clone(), q.clone()),
            start_index,
            limit_bracket,
            gaps,
            terminal_gap,
        });
    }
    Ok(ContinuityReport {
        probes: out,
        max_terminal_gap: max_terminal,
    })
}
