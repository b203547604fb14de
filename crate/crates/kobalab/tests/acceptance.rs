//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured runtime. Tolerances are pinned in the assertions.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use kobalab::complex::CVector;
use kobalab::domain::Domain;
use kobalab::error::Error;
use kobalab::finite_type::{line_type, LineType};
use kobalab::hyperbolicity::{fat_triangle_witness, four_point_scan, BoundaryDiskWitness, SamplerSpec};
use kobalab::kobayashi::{
    dist_disk, dist_halfplane, distance_bracket, distance_upper, finsler_bracket, ExactModel,
};
use kobalab::linalg::{AffineMap, CMatrix};
use kobalab::poly::{HermitianPolynomial, Rational};
use kobalab::rescaling::{
    blowup_sequence, distance_continuity_check, rescaling_frame, infinite_type_map,
    rescaled_profile, ApproachSpec, ExpInvProfile,
};
use kobalab::sampling::{random_direction, rng_from_seed};
use num_complex::Complex64 as C;
use num_traits::One;
use rand::Rng;

type D = Domain<f64>;
type V = CVector<f64>;

fn cv(pairs: &[(f64, f64)]) -> V {
    V::from_pairs(pairs).unwrap()
}

fn report(id: &str, name: &str, start: Instant, limit_s: f64, detail: String) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("[{id}] PASS {name} ({elapsed:.2}s < {limit_s}s) {detail}");
    assert!(
        elapsed < limit_s,
        "{id} exceeded its runtime budget: {elapsed:.2}s >= {limit_s}s"
    );
}

/// Independent closed-form routes through logarithms only.
fn disk_reference(a: C, b: C) -> f64 {
    let m = ((a - b) / (C::one() - a * b.conj())).norm();
    0.5 * ((1.0 + m) / (1.0 - m)).ln()
}

fn halfplane_reference(a: C, b: C) -> f64 {
    let y = 1.0 + (a - b).norm_sqr() / (2.0 * a.im * b.im);
    0.5 * (y + (y * y - 1.0).sqrt()).ln()
}

#[test]
fn c01_closed_form_model_distances() {
    let start = Instant::now();
    // anchors
    let d = dist_disk(C::new(0.0, 0.0), C::new(0.5, 0.0)).unwrap();
    assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-12); // arctanh(1/2) = ln(3)/2
    assert!((d - 0.549306).abs() < 1e-6);
    let h = dist_halfplane(C::new(0.0, 1.0), C::new(0.0, 2.0)).unwrap();
    assert!((h - 0.5 * 2.0f64.ln()).abs() < 1e-12);
    assert!((h - 0.346574).abs() < 1e-6);

    let mut rng = rng_from_seed(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = C::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..6.2831853));
        let b = C::from_polar(rng.gen_range(0.0..0.95), rng.gen_range(0.0..6.2831853));
        let err = (dist_disk(a, b).unwrap() - disk_reference(a, b)).abs();
        worst = worst.max(err);
        assert!(err < 1e-12, "disk mismatch {err:.3e} at {a}, {b}");

        let p = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
        let q = C::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
        let err = (dist_halfplane(p, q).unwrap() - halfplane_reference(p, q)).abs();
        worst = worst.max(err);
        assert!(err < 1e-12, "half-plane mismatch {err:.3e} at {p}, {q}");
    }
    report(
        "C01",
        "disk/half-plane closed forms at 1e-12",
        start,
        1.0,
        format!("worst |err| = {worst:.2e} over 1000 pairs each"),
    );
}

#[test]
fn c02_two_sided_finsler_bound() {
    let start = Instant::now();
    let domains = [D::unit_disk(), D::unit_ball(2), D::unit_bidisk()];
    for dom in &domains {
        let model = ExactModel::detect(dom).unwrap();
        let mut rng = rng_from_seed(202);
        for _ in 0..1000 {
            let p = dom.sample_chord_point(&V::zero(dom.dim()), &mut rng);
            let v = random_direction::<f64>(&mut rng, dom.dim());
            let exact = model.finsler(&p, &v).unwrap();
            let b = finsler_bracket(dom, &p, &v).unwrap();
            assert!(
                b.lower <= exact * (1.0 + 1e-9),
                "lower {} > exact {exact}",
                b.lower
            );
            assert!(
                exact <= b.upper * (1.0 + 1e-9),
                "exact {exact} > upper {}",
                b.upper
            );
            assert!(b.upper <= 2.0 * b.lower * (1.0 + 1e-12), "ratio above 2");
        }
    }
    report(
        "C02",
        "exact infinitesimal metric inside the two-sided bracket",
        start,
        10.0,
        "3 domains x 1000 random (p, v)".into(),
    );
}

#[test]
fn c03_distance_brackets_contain_oracles() {
    let start = Instant::now();

    // disk: containment plus the 1.05 tightness requirement on the upper bound
    let disk = D::unit_disk();
    let model = ExactModel::detect(&disk).unwrap();
    let mut rng = rng_from_seed(303);
    let mut worst_ratio = 1.0f64;
    for _ in 0..100 {
        let p = V::new(vec![C::from_polar(
            rng.gen_range(0.0..0.9),
            rng.gen_range(0.0..6.2831853),
        )])
        .unwrap();
        let q = V::new(vec![C::from_polar(
            rng.gen_range(0.0..0.9),
            rng.gen_range(0.0..6.2831853),
        )])
        .unwrap();
        let exact = model.distance(&p, &q).unwrap();
        let b = distance_bracket(&disk, &p, &q, 0).unwrap();
        assert!(b.lower <= exact + 1e-9 && exact <= b.upper + 1e-9);
        if exact > 1e-9 {
            let ratio = b.upper / exact;
            worst_ratio = worst_ratio.max(ratio);
            assert!(ratio <= 1.05, "disk upper/exact = {ratio:.4}");
        }
    }

    // half-plane, ball, bidisk: oracle containment
    let cases: Vec<(D, Box<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> V>)> = vec![
        (
            D::upper_half_plane(),
            Box::new(|rng: &mut rand_chacha::ChaCha8Rng| {
                cv(&[(rng.gen_range(-1.5..1.5), rng.gen_range(0.2..2.5))])
            }),
        ),
        (
            D::unit_ball(2),
            Box::new(|rng| {
                let dir = random_direction::<f64>(rng, 2);
                dir.scale(rng.gen_range(0.0..0.9))
            }),
        ),
        (
            D::unit_bidisk(),
            Box::new(|rng| {
                V::new(vec![
                    C::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.2831853)),
                    C::from_polar(rng.gen_range(0.0..0.9), rng.gen_range(0.0..6.2831853)),
                ])
                .unwrap()
            }),
        ),
    ];
    for (dom, sample) in &cases {
        let model = ExactModel::detect(dom).unwrap();
        let mut rng = rng_from_seed(304);
        for _ in 0..100 {
            let p = sample(&mut rng);
            let q = sample(&mut rng);
            let exact = model.distance(&p, &q).unwrap();
            let b = distance_bracket(dom, &p, &q, 0).unwrap();
            assert!(
                b.lower <= exact + 1e-9 && exact <= b.upper + 1e-9,
                "oracle {exact} outside [{}, {}]",
                b.lower,
                b.upper
            );
        }
    }
    report(
        "C03",
        "oracle containment (4 models x 100 pairs), disk upper within 1.05x",
        start,
        60.0,
        format!("worst disk upper/exact = {worst_ratio:.4}"),
    );
}

#[test]
fn c04_quasi_geodesic_certificate_on_ball_radius() {
    let start = Instant::now();
    let ball = D::unit_ball(2);
    let model = ExactModel::detect(&ball).unwrap();
    let cert =
        kobalab::kobayashi::quasi_geodesic(&ball, &V::zero(2), &cv(&[(1.0, 0.0), (0.0, 0.0)]))
            .unwrap();
    assert!((cert.epsilon - 1.0).abs() < 1e-9);
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 * 0.25).collect();
    for (i, &t1) in grid.iter().enumerate() {
        for &t2 in &grid[i + 1..] {
            let d = model.distance(&cert.point(t1), &cert.point(t2)).unwrap();
            let dt = t2 - t1;
            assert!(dt <= d + 1e-6, "lower side failed at ({t1}, {t2}): {d}");
            assert!(d <= 2.0 * dt + 1e-6, "upper side failed at ({t1}, {t2}): {d}");
        }
    }
    report(
        "C04",
        "|dt| <= d <= 2|dt| along the radial curve (epsilon = 1)",
        start,
        5.0,
        format!("{} pairs on the t-grid", grid.len() * (grid.len() - 1) / 2),
    );
}

#[test]
fn c05_fat_triangle_witness_on_bidisk() {
    let start = Instant::now();
    let bidisk = D::unit_bidisk();
    let witness = BoundaryDiskWitness {
        interior: V::zero(2),
        disk_point: cv(&[(0.0, 0.0), (1.0, 0.0)]),
        disk_edge: cv(&[(1.0, 0.0), (1.0, 0.0)]),
    };
    let mut details = Vec::new();
    for m in [1.0, 2.0, 4.0, 8.0] {
        let out = fat_triangle_witness(&bidisk, &witness, m, 10, 0).unwrap();
        assert!(out.reached, "M = {m} not reached: {:?}", out.history);
        assert!(out.defect.defect_lower > m);
        for w in out.history.windows(2) {
            assert!(
                w[1].1 >= w[0].1 - 1e-9,
                "defect not monotone in T: {:?}",
                out.history
            );
        }
        details.push(format!("M={m}: defect {:.2} at T={}", out.defect.defect_lower, out.t_used));
    }
    report(
        "C05",
        "fat triangles certified for M in {1,2,4,8}, monotone in T",
        start,
        30.0,
        details.join("; "),
    );
}

#[test]
fn c06_four_point_scan_stability_and_growth() {
    let start = Instant::now();
    let spec = SamplerSpec::Layered { k_min: 4, k_max: 12 };

    let ball = D::unit_ball(2);
    let report_ball = four_point_scan(&ball, &spec, 10_000, 0, 606, 1).unwrap();
    let at4 = report_ball.per_scale[0].delta_upper_estimate;
    assert!(at4 > 0.0, "scale-4 estimate must be positive");
    let max_est = report_ball
        .per_scale
        .iter()
        .map(|s| s.delta_upper_estimate)
        .fold(0.0f64, f64::max);
    assert!(
        max_est <= 2.0 * at4,
        "ball delta estimate escaped: {max_est} > 2 x {at4}"
    );

    let bidisk = D::unit_bidisk();
    let report_bd = four_point_scan(&bidisk, &spec, 10_000, 0, 606, 1).unwrap();
    let low4 = report_bd.per_scale.first().unwrap().delta_lower;
    let low12 = report_bd.per_scale.last().unwrap().delta_lower;
    assert!(
        low12 - low4 >= 1.0,
        "bidisk delta_lower grew only {low4} -> {low12}"
    );
    report(
        "C06",
        "ball estimate stable (<= 2x scale-4), bidisk delta_lower grows >= 1",
        start,
        120.0,
        format!(
            "ball: {at4:.3} .. {max_est:.3}; bidisk: {low4:.3} -> {low12:.3}"
        ),
    );
}

/// The five-polynomial multitype suite. The fourth member is non-convex with
/// a mixed term of exact weight 3/2; the decomposition must reject it naming
/// that term, and handle the other four exactly.
#[test]
fn c07_multitype_exactness() {
    let start = Instant::now();
    let m = HermitianPolynomial::modulus_monomial;

    // |z|^2
    let p1 = m(1, &[1], 1);
    // |z|^2 + |z|^4
    let p2 = m(1, &[1], 1).sum(&m(1, &[2], 1)).unwrap();
    // |z1|^2 + |z2|^4
    let p3 = m(2, &[1, 0], 1).sum(&m(2, &[0, 2], 1)).unwrap();
    // |z1|^2 + |z1|^2 |z2|^2 + |z2|^4 (rejected: mixed weight 3/2)
    let p4 = m(2, &[1, 0], 1)
        .sum(&m(2, &[1, 1], 1))
        .unwrap()
        .sum(&m(2, &[0, 2], 1))
        .unwrap();
    // |z1|^4 + |z2|^6
    let p5 = m(2, &[2, 0], 1).sum(&m(2, &[0, 3], 1)).unwrap();

    let positive: [(&HermitianPolynomial, &[u32], &HermitianPolynomial); 4] = [
        (&p1, &[2], &p1),
        (&p2, &[4], &m(1, &[2], 1)),
        (&p3, &[2, 4], &p3),
        (&p5, &[4, 6], &p5),
    ];
    for (p, weights, limit) in positive {
        let mt = p.multitype().unwrap();
        assert_eq!(mt.weights, weights);
        assert_eq!(&mt.limit, limit);
        assert!(mt.adapted);
        // every limit term has weight exactly one, as rationals
        for ((alpha, beta), _) in mt.limit.terms() {
            let w = HermitianPolynomial::weight(alpha, beta, &mt.weights);
            assert!(w.is_one(), "term {alpha:?}|{beta:?} has weight {w}");
        }
        // idempotence
        let mt2 = mt.limit.multitype().unwrap();
        assert_eq!(mt2.weights, mt.weights);
        assert_eq!(mt2.limit, mt.limit);
        // independent term-by-term scaling-limit route agrees
        let oracle = p.scaling_limit_by_weights(&mt.weights).unwrap();
        assert_eq!(oracle, mt.limit);
        // numeric spot check of weighted homogeneity: t P1(t^{-1/m_i} z_i) = P1(z)
        for t in [2.0f64, 0.5] {
            let z: Vec<C> = (0..p.dim())
                .map(|i| C::new(0.3 + 0.1 * i as f64, 0.2 - 0.05 * i as f64))
                .collect();
            let scaled: Vec<C> = z
                .iter()
                .zip(&mt.weights)
                .map(|(zi, &mi)| zi * t.powf(-1.0 / mi as f64))
                .collect();
            let lhs = t * mt.limit.eval_f64(&scaled);
            let rhs = mt.limit.eval_f64(&z);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    match p4.multitype() {
        Err(Error::WeightExceedsOne { alpha, beta, omega }) => {
            assert_eq!((alpha, beta), (vec![1, 1], vec![1, 1]));
            assert_eq!(omega, "3/2");
            let expected = Rational::new(3.into(), 2.into());
            assert_eq!(
                HermitianPolynomial::weight(&[1, 1], &[1, 1], &[2, 4]),
                expected
            );
        }
        other => panic!("expected exact weight-guard rejection, got {other:?}"),
    }
    // the rejected member really is non-convex at larger scale: the real
    // Hessian at (3, 1) is indefinite, with a concave direction near
    // (1, -0.39)
    let at = |s: f64| {
        p4.eval_f64(&[C::new(3.0 + s, 0.0), C::new(1.0 - 0.39 * s, 0.0)])
    };
    let second = at(1e-3) + at(-1e-3) - 2.0 * at(0.0);
    assert!(second < 0.0, "expected a concave direction, got {second}");

    report(
        "C07",
        "multitype suite exact (4 positive cases + guarded 3/2 rejection)",
        start,
        5.0,
        "weights (2),(4),(2,4),(4,6); mixed term rejected with omega = 3/2".into(),
    );
}

#[test]
fn c08_frame_scalings_on_quartic_graph() {
    let start = Instant::now();
    // Omega = { Re z0 > |z1|^4 }: along q_h = (h, 0), tau0 ~ h, tau1 ~ h^(1/4)
    let graph = D::polynomial_graph(HermitianPolynomial::modulus_monomial(1, &[2], 1)).unwrap();
    let mut xs = Vec::new();
    let mut y0 = Vec::new();
    let mut y1 = Vec::new();
    for e in 4..=14 {
        let h = 2.0f64.powi(-e);
        let q = cv(&[(h, 0.0), (0.0, 0.0)]);
        let frame = rescaling_frame(&graph, &q).unwrap();
        xs.push(h.ln());
        y0.push(frame.taus[0].ln());
        y1.push(frame.taus[1].ln());
    }
    let slope = |ys: &[f64]| {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    };
    let s0 = slope(&y0);
    let s1 = slope(&y1);
    assert!((s0 - 1.0).abs() < 0.05, "tau0 slope {s0}");
    assert!((s1 - 0.25).abs() < 0.05, "tau1 slope {s1}");
    report(
        "C08",
        "tau scaling slopes 1 and 1/4 on the quartic graph",
        start,
        30.0,
        format!("slopes: tau0 {s0:.4}, tau1 {s1:.4} over h = 2^-4 .. 2^-14"),
    );
}

#[test]
fn c09_ball_blowup_converges_to_quadric() {
    let start = Instant::now();
    let ball = D::unit_ball(2);
    let xi = cv(&[(1.0, 0.0), (0.0, 0.0)]);
    let approach = ApproachSpec::normal(cv(&[(-1.0, 0.0), (0.0, 0.0)]));
    // The frame normalization maps the blow-up limit onto
    // { Re(1 - w0) > |w1|^2 }, the affine image of the standard quadric.
    let quadric = D::polynomial_graph(HermitianPolynomial::modulus_monomial(1, &[1], 1)).unwrap();
    let flip = AffineMap::new(
        CMatrix::diagonal(&[C::new(-1.0, 0.0), C::new(1.0, 0.0)]),
        cv(&[(1.0, 0.0), (0.0, 0.0)]),
    )
    .unwrap();
    let target = D::affine_image(flip, quadric).unwrap();

    let trace = blowup_sequence(&ball, &xi, &approach, 12, 2.0, Some(&target)).unwrap();
    let gaps: Vec<f64> = trace.steps.iter().map(|s| s.hausdorff.unwrap()).collect();
    assert!(
        gaps[10] < 0.05,
        "gap at n=10 is {} (resolution {:?})",
        gaps[10],
        trace.steps[10].resolution
    );
    let quarter = gaps.len() / 4;
    let first: f64 = gaps[..quarter].iter().sum::<f64>() / quarter as f64;
    let last: f64 = gaps[gaps.len() - quarter..].iter().sum::<f64>() / quarter as f64;
    assert!(last < first, "no decreasing trend: first {first}, last {last}");
    report(
        "C09",
        "blow-up Hausdorff gap to the quadric target",
        start,
        60.0,
        format!("gap(n=10) = {:.4}; quarter means {first:.4} -> {last:.4}", gaps[10]),
    );
}

#[test]
fn c10_distance_continuity_under_shrinking_balls() {
    let start = Instant::now();
    let seq: Vec<D> = (1..=64)
        .map(|n| D::ball(V::zero(2), 1.0 + 1.0 / n as f64).unwrap())
        .collect();
    let limit = D::unit_ball(2);
    let probes = vec![
        (V::zero(2), cv(&[(0.5, 0.0), (0.0, 0.0)])),
        (cv(&[(0.2, 0.0), (0.0, 0.0)]), cv(&[(0.0, 0.0), (0.3, 0.0)])),
    ];
    let report_out = distance_continuity_check(&seq, &limit, &probes, 0).unwrap();
    assert!(
        report_out.max_terminal_gap < 0.02,
        "terminal gap {}",
        report_out.max_terminal_gap
    );
    for probe in &report_out.probes {
        let gaps = &probe.gaps;
        let quarter = gaps.len() / 4;
        let first: f64 = gaps[..quarter].iter().sum::<f64>() / quarter as f64;
        let last: f64 = gaps[gaps.len() - quarter..].iter().sum::<f64>() / quarter as f64;
        assert!(last < first, "gap trend not decreasing");
    }
    report(
        "C10",
        "bracket gaps shrink along Ball(1 + 1/n) -> Ball(1)",
        start,
        60.0,
        format!("terminal gap {:.4} at n = 64", report_out.max_terminal_gap),
    );
}

#[test]
fn c11_infinite_type_scaling_family() {
    let start = Instant::now();
    let profile = ExpInvProfile;
    for n in 1..=20u32 {
        assert_eq!(
            rescaled_profile::<f64>(&profile, n, 1.0),
            1.0,
            "f_n(0,1) must be exactly one"
        );
        for k in 1..=9 {
            let w = k as f64 * 0.1;
            let value = rescaled_profile::<f64>(&profile, n, w);
            assert!(
                value <= w.powi(n as i32) * (1.0 + 1e-12),
                "domination failed at n={n}, w={w}: {value}"
            );
        }
        let map = infinite_type_map::<f64>(&profile, n).unwrap();
        assert!(map.linear.entry(0, 0).re.is_finite());
    }
    report(
        "C11",
        "rescaled profiles: f_n(0,1) = 1 and f_n(0,w) <= w^n for n <= 20",
        start,
        5.0,
        "profile exp(-1/|z|), w in {0.1, ..., 0.9}".into(),
    );
}

/// Supporting check kept alongside the criteria: line type of the ball is 2
/// at random boundary points (used by the finite-type machinery above).
#[test]
fn supporting_ball_line_type_is_two() {
    let ball = D::unit_ball(2);
    let mut rng = rng_from_seed(1212);
    for _ in 0..10 {
        let x = random_direction::<f64>(&mut rng, 2);
        assert_eq!(line_type(&ball, &x, 16, 3).unwrap(), LineType::Finite(2));
    }
}

/// Supporting check: the distance_upper witness path is usable and its value
/// dominates the bidisk oracle (product metric lower bound).
#[test]
fn supporting_upper_bound_dominates_bidisk_oracle() {
    let bidisk = D::unit_bidisk();
    let model = ExactModel::detect(&bidisk).unwrap();
    let p = V::zero(2);
    let q = cv(&[(0.5, 0.0), (0.3, 0.0)]);
    let exact = model.distance(&p, &q).unwrap();
    let (up, path) = distance_upper(&bidisk, &p, &q, 0).unwrap();
    assert!(up >= exact - 1e-12);
    path.validate(&bidisk).unwrap();
}
