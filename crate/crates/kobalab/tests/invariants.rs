//! Property-based invariants across modules.

use kobalab::complex::CVector;
use kobalab::domain::Domain;
use kobalab::kobayashi::{dist_disk, finsler_bracket, ExactModel};
use kobalab::linalg::{AffineMap, CMatrix};
use num_complex::Complex64 as C;
use proptest::prelude::*;

type D = Domain<f64>;
type V = CVector<f64>;

fn disk_point() -> impl Strategy<Value = C> {
    (0.0..0.95f64, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| C::from_polar(r, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn disk_distance_is_a_metric(a in disk_point(), b in disk_point(), c in disk_point()) {
        let dab = dist_disk(a, b).unwrap();
        let dba = dist_disk(b, a).unwrap();
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert!(dab >= 0.0);
        if (a - b).norm() > 1e-12 {
            prop_assert!(dab > 0.0);
        }
        let dac = dist_disk(a, c).unwrap();
        let dcb = dist_disk(c, b).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-12);
    }

    #[test]
    fn finsler_bracket_pinches_exact_disk_metric(z in disk_point(), th in 0.0..std::f64::consts::TAU) {
        let disk = D::unit_disk();
        let p = V::new(vec![z]).unwrap();
        let v = V::new(vec![C::from_polar(1.0, th)]).unwrap();
        let exact = 1.0 / (1.0 - z.norm_sqr());
        let b = finsler_bracket(&disk, &p, &v).unwrap();
        prop_assert!(b.lower <= exact * (1.0 + 1e-12));
        prop_assert!(exact <= b.upper * (1.0 + 1e-12));
        prop_assert!(b.upper <= 2.0 * b.lower * (1.0 + 1e-12));
    }

    #[test]
    fn affine_round_trip_preserves_points(
        re in -2.0..2.0f64, im in -2.0..2.0f64,
        a in 0.5..2.0f64, b in -0.4..0.4f64,
    ) {
        // well-conditioned map: diagonal-dominant with an off-diagonal tie
        let map = AffineMap::new(
            CMatrix::new(vec![
                vec![C::new(a, 0.1), C::new(b, 0.0)],
                vec![C::new(0.0, b), C::new(a, -0.1)],
            ]).unwrap(),
            V::from_pairs(&[(0.3, 0.0), (0.0, -0.7)]).unwrap(),
        ).unwrap();
        let inv = map.inverse().unwrap();
        let p = V::from_pairs(&[(re, im), (im, re)]).unwrap();
        let back = inv.apply(&map.apply(&p).unwrap()).unwrap();
        prop_assert!(back.dist(&p) < 1e-10);
    }

    #[test]
    fn unitary_rows_preserve_norm(th1 in 0.0..std::f64::consts::TAU, th2 in 0.0..std::f64::consts::TAU) {
        let c1 = C::from_polar(1.0, th1);
        let c2 = C::from_polar(1.0, th2);
        let u = CMatrix::new(vec![
            vec![c1 * C::new(0.6, 0.0), c1 * C::new(0.0, 0.8)],
            vec![c2 * C::new(0.0, 0.8), c2 * C::new(0.6, 0.0)],
        ]).unwrap();
        prop_assert!(u.unitary_defect() < 1e-12);
        let p = V::from_pairs(&[(0.3, -1.2), (0.7, 0.4)]).unwrap();
        let image = u.apply(&p).unwrap();
        prop_assert!((image.norm() - p.norm()).abs() < 1e-12);
    }

    #[test]
    fn polydisk_oracle_is_max_of_factors(
        r1 in 0.0..0.9f64, t1 in 0.0..std::f64::consts::TAU,
        r2 in 0.0..0.9f64, t2 in 0.0..std::f64::consts::TAU,
    ) {
        let bidisk = D::unit_bidisk();
        let model = ExactModel::detect(&bidisk).unwrap();
        let q = V::new(vec![C::from_polar(r1, t1), C::from_polar(r2, t2)]).unwrap();
        let d = model.distance(&V::zero(2), &q).unwrap();
        let expected = dist_disk(C::new(0.0, 0.0), q.coord(0)).unwrap()
            .max(dist_disk(C::new(0.0, 0.0), q.coord(1)).unwrap());
        prop_assert!((d - expected).abs() < 1e-12);
    }
}

/// The floating-point core instantiates at f32 as well.
#[test]
fn core_is_generic_over_f32() {
    use kobalab::complex::CVector as CV;
    use kobalab::domain::Domain as Dom;
    let ball: Dom<f32> = Dom::unit_ball(2);
    let p = CV::<f32>::from_pairs(&[(0.5, 0.0), (0.0, 0.0)]).unwrap();
    assert!(ball.contains(&p));
    let d = ball.boundary_distance(&p).unwrap();
    assert!((d - 0.5).abs() < 1e-6);
    let b = kobalab::kobayashi::finsler_bracket(
        &ball,
        &p,
        &CV::<f32>::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]).unwrap(),
    )
    .unwrap();
    assert!(b.lower <= b.upper && b.upper <= 2.0 * b.lower * (1.0 + 1e-5));
}
