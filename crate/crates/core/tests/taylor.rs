use pefem_core::field::{Field, Polynomial, SmoothField};
use pefem_core::geometry::CurvedDomain;
use pefem_core::study::mesh_sequence;
use pefem_core::taylor::*;
use pefem_core::Vec2;
use proptest::prelude::*;

fn catalog_fields() -> Vec<Field> {
    vec![
        Field::ExpSin,
        Field::CosCosh,
        Field::SinPlane {
            offset: 2.0,
            amplitude: 0.5,
        },
        Field::Polynomial(Polynomial::new(&[(3, 0, 1.0), (1, 2, -2.0), (0, 1, 0.5), (0, 0, 1.0)])),
    ]
}

#[test]
fn derivatives_match_finite_differences() {
    let step = 1e-5;
    for v in catalog_fields() {
        for i in 0..100 {
            let s = i as f64 * 2.399963;
            let p = Vec2::new(s.cos(), s.sin()) * (1.2 * ((i as f64 + 0.5) / 100.0).sqrt());
            for (a, b) in [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2), (3, 0)] {
                let d = v.derivative(p, a, b);
                let dx = Vec2::new(step, 0.0);
                let fd = (v.derivative(p + dx, a, b) - v.derivative(p - dx, a, b)) / (2.0 * step);
                let exact = v.derivative(p, a + 1, b);
                assert!(
                    (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                    "{v:?} ({a},{b}) at {p:?}: {d}"
                );
            }
        }
    }
}

#[test]
fn lemma2_orders_on_the_disk() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 5).unwrap();
    for (k, m) in [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1)] {
        let check = lemma2_rate_check(&Field::ExpSin, &disk, &meshes, k, m).unwrap();
        let order = check.fitted_order().unwrap();
        assert!(check.passed(), "(k,m)=({k},{m}): {order}");
        assert!((order - (k + 1 - m) as f64).abs() <= RATE_TOLERANCE);
    }
}

#[test]
fn polynomial_fields_are_exact() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 3).unwrap();
    let p = Field::Polynomial(Polynomial::new(&[(2, 0, 1.0), (1, 1, -0.5), (0, 1, 2.0)]));
    let check = lemma2_rate_check(&p, &disk, &meshes, 2, 0).unwrap();
    assert_eq!(check.status, RateStatus::Exact);
    assert!(check.passed());
    let check = lemma2_rate_check(&p, &disk, &meshes, 2, 1).unwrap();
    assert_eq!(check.status, RateStatus::Exact);
}

#[test]
fn too_few_usable_rows_are_insufficient() {
    let rows: Vec<LemmaRow> = (0..5)
        .map(|i| LemmaRow {
            level: i,
            h: 0.5f64.powi(i as i32),
            delta_h: 0.25f64.powi(i as i32),
            discrepancy: if i < 2 { 1e-3 } else { 1e-15 },
            usable: i < 2,
        })
        .collect();
    assert_eq!(fit_rows(&rows), RateStatus::Insufficient);
}

#[test]
fn stability_sweeps_on_catalog_domains() {
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse()] {
        let meshes = mesh_sequence(&d, pefem_core::study::default_boundary_count(&d), 4).unwrap();
        for k in 1..=3 {
            for v in [Field::ExpSin, Field::CosCosh] {
                let one = lemma1_sweep(&v, &d, &meshes, k).unwrap();
                assert!(one.passed, "{} k={k} {v:?}: {:?}", d.name(), one.rows);
                let three = lemma3_sweep(&v, &d, &meshes, k).unwrap();
                assert!(
                    three.passed,
                    "{} k={k} {v:?}: {:?} {:?}",
                    d.name(),
                    three.constants,
                    three.fitted_order
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn taylor_reproduces_polynomials(
        k in 0usize..=4,
        cx in -1.0..1.0f64, cy in -1.0..1.0f64,
        dx in -1.0..1.0f64, dy in -1.0..1.0f64,
        coeffs in proptest::collection::vec(-1.0..1.0f64, 15),
    ) {
        let mut terms = Vec::new();
        let mut n = 0;
        for d in 0..=k {
            for j in 0..=d {
                terms.push((d - j, j, coeffs[n]));
                n += 1;
            }
        }
        let p = Field::Polynomial(Polynomial::new(&terms));
        let c = Vec2::new(cx, cy);
        let t = c + Vec2::new(dx, dy) * 0.7;
        prop_assert!((taylor_eval(&p, c, t, k) - p.value(t)).abs() <= 1e-12 * (1.0 + p.value(t).abs()));
        let split = taylor_eval(&p, c, t, 0) + if k >= 1 { taylor_band(&p, c, t, 1, k) } else { 0.0 };
        prop_assert!((split - taylor_eval(&p, c, t, k)).abs() <= 1e-13);
        prop_assert!(taylor_band(&p, c, c, 1, k.max(1)) == 0.0);
    }
}
