//! Seeded samplers. Every randomized routine takes an explicit 64-bit seed
//! and uses ChaCha8 so results are identical across platforms and runs.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::CVector;
use crate::scalar::Real;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for item `index` of a scan, so parallel
/// workers reproduce the sequential result.
pub fn rng_for_index(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Standard normal via Box-Muller.
fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    T::of((-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos())
}

/// Uniform direction on the unit sphere of R^{2d}, returned as a unit vector
/// of C^d.
pub fn random_direction<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> CVector<T> {
    loop {
        let reals: Vec<T> = (0..2 * dim).map(|_| normal(rng)).collect();
        let v = CVector::from_reals(&reals);
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

/// Uniform point in the real unit ball of R^{2d} (as a vector of C^d).
pub fn random_in_unit_ball<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> CVector<T> {
    let dir = random_direction::<T>(rng, dim);
    let u: f64 = rng.gen_range(0.0..1.0f64);
    let r = T::of(u.powf(1.0 / (2.0 * dim as f64)));
    dir.scale(r)
}

/// Deterministic, quasi-uniform direction grid on the unit sphere of R^{2d}.
///
/// A Kronecker (additive golden-ratio) sequence in the unit cube is pushed
/// through Box-Muller pairs and normalized. Low-discrepancy in the cube gives
/// a well-spread set of directions without any RNG state.
pub fn fibonacci_sphere_grid<T: Real>(count: usize, dim: usize) -> Vec<CVector<T>> {
    let n_reals = 2 * dim;
    // Generalized golden-ratio increments: alpha_j = phi_m^-(j+1) where
    // phi_m solves x^(m+1) = x + 1 for m = n_reals.
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (n_reals as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=n_reals).map(|j| phi.powi(-(j as i32)) % 1.0).collect();

    let mut out = Vec::with_capacity(count);
    let mut k = 0u64;
    while out.len() < count {
        k += 1;
        let cube: Vec<f64> = alphas
            .iter()
            .map(|a| {
                let x = (0.5 + a * k as f64) % 1.0;
                x.clamp(1e-12, 1.0 - 1e-12)
            })
            .collect();
        let mut reals = Vec::with_capacity(n_reals);
        for pair in cube.chunks(2) {
            let (u1, u2) = (pair[0], pair[1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let th = 2.0 * std::f64::consts::PI * u2;
            reals.push(T::of(r * th.cos()));
            reals.push(T::of(r * th.sin()));
        }
        let v = CVector::from_reals(&reals);
        if let Ok(u) = v.normalized() {
            out.push(u);
        }
    }
    out
}

/// Fixed direction set used ahead of random fill in layered scans: axis
/// vectors and pairwise mixes. These hit the corner and face geometry of
/// product domains, which pure random sampling finds slowly.
pub fn structured_directions<T: Real>(dim: usize) -> Vec<CVector<T>> {
    let one = Complex::new(T::one(), T::zero());
    let i_unit = Complex::new(T::zero(), T::one());
    let mut dirs = Vec::new();
    for i in 0..dim {
        dirs.push(CVector::axis(dim, i, one));
        dirs.push(CVector::axis(dim, i, i_unit));
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (a, b) in [(one, one), (one, -one), (one, i_unit)] {
                let mut v = CVector::zero(dim);
                v.set_coord(i, a);
                v.set_coord(j, b);
                dirs.push(v.normalized().expect("nonzero by construction"));
            }
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_directions_are_reproducible() {
        let a: Vec<CVector<f64>> = (0..4)
            .map(|i| random_direction(&mut rng_for_index(7, i), 2))
            .collect();
        let b: Vec<CVector<f64>> = (0..4)
            .map(|i| random_direction(&mut rng_for_index(7, i), 2))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_directions_are_unit_and_spread() {
        let grid = fibonacci_sphere_grid::<f64>(256, 2);
        assert_eq!(grid.len(), 256);
        for v in &grid {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        // crude spread check: mean should be near the origin
        let mut mean = CVector::<f64>::zero(2);
        for v in &grid {
            mean = mean.add(v);
        }
        assert!(mean.scale(1.0 / 256.0).norm() < 0.2);
    }
}
