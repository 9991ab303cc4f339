use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use pefem_core::geometry::CurvedDomain;
use pefem_core::Vec2;
use proptest::prelude::*;

/// Brute-force closest parameter: a uniform sweep, then bisection on the
/// sign of the optimality residual around the best sample.
fn sweep_closest(domain: &CurvedDomain, x: Vec2, samples: usize) -> Vec2 {
    let dist = |t: f64| domain.point(t).distance(x);
    let best = (0..samples)
        .min_by(|&i, &j| dist(i as f64 / samples as f64).total_cmp(&dist(j as f64 / samples as f64)))
        .unwrap();
    let f = |t: f64| (domain.point(t) - x).dot(domain.tangent(t));
    let (mut lo, mut hi) = (
        (best as f64 - 1.0) / samples as f64,
        (best as f64 + 1.0) / samples as f64,
    );
    assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    domain.point(0.5 * (lo + hi))
}

#[test]
fn circle_projections() {
    let disk = CurvedDomain::unit_disk();
    let tr = disk.closest_point(Vec2::new(2.0, 0.0)).unwrap();
    assert_abs_diff_eq!(tr.projected.x, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(tr.projected.y, 0.0, epsilon = 1e-12);
    assert!(tr.parameter.min(1.0 - tr.parameter) < 1e-12);
    assert_abs_diff_eq!(tr.normal.x, 1.0, epsilon = 1e-12);

    let tr = disk.closest_point(Vec2::new(0.6, 0.6)).unwrap();
    let s = 0.5f64.sqrt();
    assert_abs_diff_eq!(tr.projected.x, s, epsilon = 1e-12);
    assert_abs_diff_eq!(tr.projected.y, s, epsilon = 1e-12);
}

#[test]
fn ellipse_projection_matches_dense_sweep() {
    let ellipse = CurvedDomain::ellipse();
    let x = Vec2::new(1.4, 0.3);
    let oracle = sweep_closest(&ellipse, x, 1_000_000);
    let tr = ellipse.closest_point(x).unwrap();
    assert!(
        tr.projected.distance(oracle) < 1e-10,
        "{:?} vs {:?}",
        tr.projected,
        oracle
    );
    assert!(tr.residual.abs() < 1e-12);
}

#[test]
fn circle_normals() {
    let disk = CurvedDomain::unit_disk();
    let n = disk.exact_normal(0.0);
    assert_abs_diff_eq!(n.x, 1.0, epsilon = 1e-14);
    let n = disk.exact_normal(0.25);
    assert_abs_diff_eq!(n.x, 0.0, epsilon = 1e-14);
    assert_abs_diff_eq!(n.y, 1.0, epsilon = 1e-14);
}

#[test]
fn star_normal_matches_finite_difference() {
    let star = CurvedDomain::star();
    let t = 0.1;
    let e = 1e-6;
    let d = (star.point(t + e) - star.point(t - e)) * (1.0 / (2.0 * e));
    let fd = d.perp_cw().normalized();
    let n = star.exact_normal(t);
    assert!((n - fd).norm() < 1e-8, "{n:?} vs {fd:?}");
    assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-14);
}

#[test]
fn chord_gaps_are_sagittas() {
    let disk = CurvedDomain::unit_disk();
    for (theta, expected) in [(PI / 6.0, 0.034074), (PI / 3.0, 0.133975)] {
        let a = disk.point(0.0);
        let b = disk.point(theta / TAU);
        let gap = disk.chord_gap(a, b).unwrap();
        assert_abs_diff_eq!(gap, 1.0 - (theta / 2.0).cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(gap, expected, epsilon = 1e-6);
    }
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse(), CurvedDomain::star()] {
        let a = d.point(0.3);
        assert_eq!(d.chord_gap(a, a).unwrap(), 0.0);
    }
}

#[test]
fn catalog_curves_are_regular_and_simple() {
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse(), CurvedDomain::star()] {
        assert!(d.min_speed(4096) > 0.0, "{}", d.name());
        assert!(d.is_simple(2048), "{}", d.name());
        assert!(d.point(0.0).distance(d.point(1.0 - 1e-12)) < 1e-10);
    }
}

#[test]
fn facet_normals_approach_exact_normals() {
    // n . n_h >= 1 - C l^2 with C frozen from a first measurement on each domain
    for (d, c) in [
        (CurvedDomain::unit_disk(), 0.13),
        (CurvedDomain::ellipse(), 0.25),
        (CurvedDomain::star(), 6.0),
    ] {
        for n in [32usize, 64, 128, 256] {
            let params = d.arclength_parameters(n);
            for i in 0..n {
                let (a, b) = (d.point(params[i]), d.point(params[(i + 1) % n]));
                let l = a.distance(b);
                let nh = (b - a).perp_cw().normalized();
                let mid = d.closest_point(a.lerp(b, 0.5)).unwrap();
                assert!(mid.normal.dot(nh) >= 1.0 - c * l * l, "{} n={n} edge {i}", d.name());
            }
        }
    }
}

fn domain_strategy() -> impl Strategy<Value = CurvedDomain> {
    prop_oneof![
        Just(CurvedDomain::unit_disk()),
        Just(CurvedDomain::ellipse()),
        Just(CurvedDomain::star()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_idempotent(d in domain_strategy(), t in 0.0..1.0f64, s in -0.1..0.1f64) {
        let x = d.point(t) + d.exact_normal(t) * s;
        let eta = d.closest_point(x).unwrap().projected;
        let again = d.closest_point(eta).unwrap().projected;
        prop_assert!(eta.distance(again) <= 1e-10);
    }

    #[test]
    fn projection_offset_is_normal(d in domain_strategy(), t in 0.0..1.0f64, s in -0.1..0.1f64) {
        let x = d.point(t) + d.exact_normal(t) * s;
        let tr = d.closest_point(x).unwrap();
        prop_assert!(tr.projected.distance(d.point(tr.parameter)) <= 1e-12);
        prop_assert!((tr.normal.norm() - 1.0).abs() <= 1e-12);
        if tr.offset_length > 1e-9 {
            prop_assert!(tr.offset.normalized().cross(tr.normal).abs() <= 1e-8);
        }
    }

    #[test]
    fn circle_chord_gap_closed_form(t in 0.0..1.0f64, theta in 0.01..1.0f64) {
        let disk = CurvedDomain::unit_disk();
        let a = disk.point(t);
        let b = disk.point(t + theta / TAU);
        let l = a.distance(b);
        let gap = disk.chord_gap(a, b).unwrap();
        prop_assert!((gap - (1.0 - (1.0 - l * l / 4.0).sqrt())).abs() <= 1e-8);
    }
}
