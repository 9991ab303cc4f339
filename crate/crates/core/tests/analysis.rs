use pefem_core::analysis::{error_degree, error_norms, error_norms_with};
use pefem_core::assembly::Method;
use pefem_core::fespace::FeSpace;
use pefem_core::geometry::CurvedDomain;
use pefem_core::problem::ProblemData;
use pefem_core::solver::{solve, SolverKind};
use pefem_core::study::*;

#[test]
fn norms_agree_with_dense_quadrature() {
    let disk = CurvedDomain::unit_disk();
    let mesh = mesh_sequence(&disk, 8, 3).unwrap().pop().unwrap();
    let data = ProblemData::catalog("exp_sin", 1).unwrap();
    let space = FeSpace::new(&mesh, 1).unwrap();
    let sys = pefem_core::assembly::assemble_system(&space, &disk, &data, Method::PeFem).unwrap();
    let x = solve(&sys.operator, &sys.load, SolverKind::Direct).unwrap().solution;
    let u = data.exact.as_ref().unwrap();
    let e = error_norms(&space, &x, &**u).unwrap();
    let dense = error_norms_with(&space, &x, &**u, 10, 12).unwrap();
    assert!((e.l2 - dense.l2).abs() <= 1e-6 * dense.l2);
    assert!((e.h1 - dense.h1).abs() <= 1e-6 * dense.h1);
    assert!((e.w1inf - dense.w1inf).abs() <= 0.05 * dense.w1inf);
}

#[test]
fn sup_sampling_is_stable_and_errors_decrease() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 5).unwrap();
    for k in 1..=2 {
        let data = ProblemData::catalog("exp_sin", k).unwrap();
        let u = data.exact.as_ref().unwrap();
        let mut previous: Option<[f64; 3]> = None;
        for mesh in &meshes[2..] {
            let space = FeSpace::new(mesh, k).unwrap();
            let sys = pefem_core::assembly::assemble_system(&space, &disk, &data, Method::PeFem).unwrap();
            let x = solve(&sys.operator, &sys.load, SolverKind::Direct).unwrap().solution;
            let base = error_norms(&space, &x, &**u).unwrap();
            // the next exactness with at least twice as many sample points
            let doubled = error_norms_with(&space, &x, &**u, error_degree(k), error_degree(k) + 4).unwrap();
            assert!(
                (base.w1inf - doubled.w1inf).abs() < 0.05 * doubled.w1inf,
                "k={k} level {}",
                mesh.level
            );
            let now = [base.l2, base.h1, base.w1inf];
            if let Some(p) = previous {
                assert!(now.iter().zip(&p).all(|(a, b)| a < b), "k={k} level {}", mesh.level);
            }
            previous = Some(now);
        }
    }
}

#[test]
fn quadratic_study_on_the_disk() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 5).unwrap();
    let data = ProblemData::catalog("exp_sin", 2).unwrap();
    let study = convergence_study(&meshes, &disk, &data, 2, Method::PeFem, SolverKind::Direct).unwrap();
    let fitted = study.fitted.unwrap();
    assert!((2.85..=3.3).contains(&fitted.slopes[0]), "{:?}", fitted.slopes);
    assert!(fitted.slopes[0] - fitted.slopes[1] >= 0.7);
    assert_eq!(study.status, StudyStatus::Pass);
    assert_eq!(study.records.len(), 6);
    assert!(study.records[0].eoc.is_none() && study.records[1].eoc.is_some());
}

#[test]
fn linear_study_on_the_disk() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 5).unwrap();
    let data = ProblemData::catalog("exp_sin", 1).unwrap();
    let study = convergence_study(&meshes, &disk, &data, 1, Method::PeFem, SolverKind::Direct).unwrap();
    let s = study.fitted.unwrap().slopes;
    assert!(
        (s[0] - 2.0).abs() <= 0.25 && (s[1] - 1.0).abs() <= 0.25 && (s[2] - 1.0).abs() <= 0.3,
        "{s:?}"
    );
    assert!(s[0] - s[1] >= 0.7);
    assert_eq!(study.status, StudyStatus::Pass);
}

#[test]
fn polynomial_study_is_flagged_exact() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 3).unwrap();
    for k in 1..=3 {
        let data = ProblemData::catalog("poly_k", k).unwrap();
        let study = convergence_study(&meshes, &disk, &data, k, Method::PeFem, SolverKind::Direct).unwrap();
        assert_eq!(study.status, StudyStatus::Exact);
        assert!(study.fitted.is_none());
    }
}

#[test]
fn studies_need_manufactured_data() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 1).unwrap();
    let mut data = ProblemData::catalog("trig", 1).unwrap();
    data.exact = None;
    let r = convergence_study(&meshes, &disk, &data, 1, Method::PeFem, SolverKind::Direct);
    assert!(matches!(r, Err(pefem_core::Error::MissingExact)));
}

#[test]
fn expected_orders() {
    let convex = ExpectedOrders::new(2, true);
    assert_eq!(convex.l2, (3.0, 3.0));
    let star = ExpectedOrders::new(2, false);
    assert_eq!(star.l2, (2.5, 3.0));
    assert_eq!(judge([3.2, 2.1, 1.75], &convex), [true, true, true]);
    assert_eq!(judge([2.7, 1.7, 2.35], &convex), [false, false, false]);
}
