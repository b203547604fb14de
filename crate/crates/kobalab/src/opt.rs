//! Small numeric kernels: bracketing bisection, golden-section search,
//! composite Simpson, and a Nelder-Mead simplex used on direction spheres.

use crate::scalar::Real;

/// Bisection on a sign oracle over `[lo, hi]` with `inside(lo) && !inside(hi)`.
/// Shrinks the bracket below `tol` and returns the midpoint.
pub fn bisect_flip<T: Real>(mut lo: T, mut hi: T, tol: T, inside: impl Fn(T) -> bool) -> T {
    debug_assert!(lo < hi);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * T::of(0.5);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::of(0.5)
}

/// Golden-section minimization of a unimodal-ish function on `[a, b]`.
pub fn golden_min<T: Real>(mut a: T, mut b: T, iters: usize, f: impl Fn(T) -> T) -> (T, T) {
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut x1 = b - (b - a) * inv_phi;
    let mut x2 = a + (b - a) * inv_phi;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * inv_phi;
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * inv_phi;
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Composite Simpson over `[0, 1]` with `nodes` samples (`nodes` odd).
pub fn simpson_unit<T: Real>(nodes: usize, f: impl Fn(T) -> T) -> T {
    debug_assert!(nodes >= 3 && nodes % 2 == 1);
    let n = nodes - 1;
    let h = T::one() / T::of(n as f64);
    let mut acc = f(T::zero()) + f(T::one());
    for i in 1..n {
        let w = if i % 2 == 1 { T::of(4.0) } else { T::of(2.0) };
        acc += w * f(T::of(i as f64) * h);
    }
    acc * h / T::of(3.0)
}

/// Nelder-Mead over R^n. Plain downhill simplex; good enough for the
/// low-dimensional direction refinements used here.
pub fn nelder_mead<T: Real>(
    start: &[T],
    step: T,
    iters: usize,
    f: impl Fn(&[T]) -> T,
) -> (Vec<T>, T) {
    let n = start.len();
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += step;
        let fv = f(&v);
        simplex.push((v, fv));
    }

    let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= T::of(1e-14) * (T::one() + best.abs()) {
            break;
        }

        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += *x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= T::of(n as f64);
        }

        let mix = |a: &[T], b: &[T], t: T| -> Vec<T> {
            a.iter().zip(b).map(|(x, y)| *x + (*y - *x) * t).collect()
        };

        let reflected = mix(&centroid, &simplex[n].0, -alpha);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = mix(&centroid, &simplex[n].0, -gamma);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = mix(&centroid, &simplex[n].0, rho);
            let fc = f(&contracted);
            if fc < simplex[n].1 {
                simplex[n] = (contracted, fc);
            } else {
                let best_v = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    item.0 = mix(&best_v, &item.0, sigma);
                    item.1 = f(&item.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_unit_crossing() {
        let root = bisect_flip(0.0f64, 2.0, 1e-12, |t| t < 1.0);
        assert!((root - 1.0).abs() < 1e-11);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, _) = golden_min(-1.0f64, 2.0, 80, |t| (t - 0.3) * (t - 0.3));
        assert!((x - 0.3).abs() < 1e-9);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = simpson_unit(33, |t: f64| t * t * t);
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn nelder_mead_minimizes_quadratic() {
        let (x, fx) = nelder_mead(&[1.0f64, -1.0], 0.5, 200, |v| {
            (v[0] - 2.0).powi(2) + (v[1] + 3.0).powi(2)
        });
        assert!(fx < 1e-10);
        assert!((x[0] - 2.0).abs() < 1e-5 && (x[1] + 3.0).abs() < 1e-5);
    }
}
