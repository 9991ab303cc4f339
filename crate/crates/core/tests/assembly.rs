use std::sync::Arc;

use pefem_core::analysis::error_norms;
use pefem_core::assembly::*;
use pefem_core::fespace::FeSpace;
use pefem_core::field::{Field, SmoothField};
use pefem_core::geometry::CurvedDomain;
use pefem_core::mesh::PolygonalMesh;
use pefem_core::problem::{patch_polynomial, ProblemData, CATALOG};
use pefem_core::quadrature::{make_quadrature, QuadratureKind};
use pefem_core::solver::{solve, SolverKind};
use pefem_core::sparse::CsrMatrix;
use pefem_core::study::{default_boundary_count, mesh_sequence};
use pefem_core::Vec2;
use proptest::prelude::*;

fn disk_level(level: usize) -> PolygonalMesh {
    mesh_sequence(&CurvedDomain::unit_disk(), 8, level)
        .unwrap()
        .pop()
        .unwrap()
}

fn with_data(
    diffusion: Field,
    reaction: Field,
    source: fn(Vec2) -> f64,
    neumann: fn(Vec2, Vec2) -> f64,
) -> ProblemData {
    ProblemData {
        name: "custom".into(),
        diffusion: Arc::new(diffusion),
        reaction: Arc::new(reaction),
        source: Arc::new(source),
        neumann: Arc::new(neumann),
        exact: None,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn flat_harness_has_no_correction() {
    let mesh = disk_level(2);
    let data = ProblemData::catalog("exp_sin", 2).unwrap();
    for k in 1..=3 {
        let space = FeSpace::new(&mesh, k).unwrap();
        let bq = BoundaryQuadrature::flat(&space, assembly_degree(k)).unwrap();
        let ext = assemble_extension_with(&space, &bq, &data);
        assert_eq!(ext.max_abs(), 0.0);
        let pe = assemble_system_with(&space, &bq, &data, Method::PeFem).unwrap();
        let base = assemble_system_with(&space, &bq, &data, Method::Baseline).unwrap();
        assert_eq!(pe.load, base.load);
        for (r, c, v) in pe.operator.iter() {
            assert_eq!(v, base.operator.get(r, c));
        }
        for (r, c, v) in base.operator.iter() {
            assert_eq!(v, pe.volume.get(r, c));
        }
    }
}

/// `int_e I(xi) phi(xi)` by the 10^4-point trapezoid rule, with the exact
/// circle projection `eta = xi / |xi|`.
fn trapezoid_on_edge(a: Vec2, b: Vec2, integrand: impl Fn(Vec2, Vec2) -> f64, end: usize) -> f64 {
    let n = 10_000;
    let len = a.distance(b);
    let mut s = 0.0;
    for i in 0..=n {
        let u = i as f64 / n as f64;
        let xi = a.lerp(b, u);
        let eta = xi * (1.0 / xi.norm());
        let phi = if end == 0 { 1.0 - u } else { u };
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        s += w * integrand(xi, eta) * phi;
    }
    s * len / n as f64
}

fn single_edge_action(
    space: &FeSpace<'_>,
    bq: &BoundaryQuadrature,
    edge: usize,
    data: &ProblemData,
    c: &[f64],
) -> Vec<f64> {
    let only = BoundaryQuadrature {
        points: bq.points.iter().filter(|p| p.edge == edge).cloned().collect(),
        degree: bq.degree,
    };
    let m = assemble_extension_with(space, &only, data);
    let mut out = vec![0.0; c.len()];
    m.mul_vec(c, &mut out);
    out
}

#[test]
fn extension_term_matches_dense_trapezoid() {
    let disk = CurvedDomain::unit_disk();
    let mesh = disk_level(3);
    let space = FeSpace::new(&mesh, 1).unwrap();
    let bq = BoundaryQuadrature::new(&space, &disk, assembly_degree(1)).unwrap();
    let data = ProblemData::catalog("exp_sin", 1).unwrap();
    let g = Vec2::new(0.7, -1.3);
    let c = space.interpolate(|x| g.dot(x));
    for edge in [0, mesh.boundary_edges.len() / 3] {
        let e = mesh.boundary_edges[edge];
        let [a, b] = e.vertices;
        let nh = mesh.facet_normal(edge);
        let r = single_edge_action(&space, &bq, edge, &data, &c);
        let p = &data.diffusion;
        let integrand = |xi: Vec2, eta: Vec2| p.value(eta) * g.dot(eta) - p.value(xi) * g.dot(nh);
        for (end, v) in [(0, a), (1, b)] {
            let oracle = trapezoid_on_edge(mesh.vertices[a], mesh.vertices[b], integrand, end);
            assert!(
                (r[v] - oracle).abs() <= 1e-8,
                "edge {edge} end {end}: {} vs {oracle}",
                r[v]
            );
        }
    }
}

#[test]
fn tangential_gradient_sees_only_normal_deviation() {
    let disk = CurvedDomain::unit_disk();
    let unit = with_data(Field::Constant(1.0), Field::Constant(1.0), |_| 0.0, |_, _| 0.0);
    let mut previous: Option<f64> = None;
    for level in 2..=4 {
        let mesh = disk_level(level);
        let space = FeSpace::new(&mesh, 1).unwrap();
        let bq = BoundaryQuadrature::new(&space, &disk, assembly_degree(1)).unwrap();
        let e = mesh.boundary_edges[0];
        let [a, b] = e.vertices;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let t = (pb - pa).normalized();
        let c = space.interpolate(|x| t.dot(x));
        let r = single_edge_action(&space, &bq, 0, &unit, &c);
        let oracle = trapezoid_on_edge(pa, pb, |_, eta| t.dot(eta), 0);
        assert!((r[a] - oracle).abs() <= 1e-8, "{} vs {oracle}", r[a]);
        let len = pa.distance(pb);
        // the normal deviation grows linearly along the facet, so entries scale like |e|^2
        assert!(r[a].abs() <= 0.1 * len * len, "{} vs {}", r[a], len);
        if let Some(p) = previous {
            let ratio = r[a] / p;
            assert!((0.2..=0.3).contains(&ratio), "{ratio}");
        }
        previous = Some(r[a]);
    }
}

#[test]
fn load_sums_measure_domain_and_boundary() {
    let disk = CurvedDomain::unit_disk();
    let mesh = disk_level(2);
    let area = with_data(Field::Constant(1.0), Field::Constant(1.0), |_| 1.0, |_, _| 0.0);
    let perimeter = with_data(Field::Constant(1.0), Field::Constant(1.0), |_| 0.0, |_, _| 1.0);
    for k in 1..=3 {
        let space = FeSpace::new(&mesh, k).unwrap();
        let l = assemble_load(&space, &disk, &area).unwrap();
        assert!((l.iter().sum::<f64>() - mesh.total_area()).abs() <= 1e-12);
        let l = assemble_load(&space, &disk, &perimeter).unwrap();
        assert!((l.iter().sum::<f64>() - mesh.boundary_length()).abs() <= 1e-12);
    }
}

#[test]
fn manufactured_load_matches_dense_quadrature() {
    let disk = CurvedDomain::unit_disk();
    let mesh = disk_level(3);
    let data = ProblemData::catalog("exp_sin", 2).unwrap();
    let space = FeSpace::new(&mesh, 2).unwrap();
    let load = assemble_load(&space, &disk, &data).unwrap();

    // each triangle split into 16 children, each integrated exactly to degree 12
    let rule = make_quadrature(QuadratureKind::Triangle, 12).unwrap();
    let mut oracle = vec![0.0; space.n_dofs()];
    let split = 4;
    for t in 0..space.n_elements() {
        let g = *space.geometry(t);
        let dofs = space.element_dofs(t);
        let h = 1.0 / split as f64;
        for i in 0..split {
            for j in 0..split - i {
                let mut children = vec![[(i, j), (i + 1, j), (i, j + 1)]];
                if i + j + 1 < split {
                    children.push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
                }
                for child in children {
                    let corner = |(a, b): (usize, usize)| Vec2::new(a as f64 * h, b as f64 * h);
                    let (p0, p1, p2) = (corner(child[0]), corner(child[1]), corner(child[2]));
                    let jac = (p1 - p0).cross(p2 - p0).abs();
                    for (x, w) in rule.iter() {
                        let xref = p0 + (p1 - p0) * x.x + (p2 - p0) * x.y;
                        let phys = g.map(xref);
                        let b = space.eval_basis(t, phys);
                        let f = (data.source)(phys) * w * jac * g.det.abs();
                        for (d, v) in dofs.iter().zip(&b.values) {
                            oracle[*d] += f * v;
                        }
                    }
                }
            }
        }
    }
    let seg = make_quadrature(QuadratureKind::Segment, 12).unwrap();
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        let dofs = space.element_dofs(e.triangle);
        for piece in 0..8 {
            for (s, w) in seg.iter() {
                let u = (piece as f64 + s.x) / 8.0;
                let xi = pa.lerp(pb, u);
                let eta = xi * (1.0 / xi.norm());
                let g = (data.neumann)(eta, eta) * w * pa.distance(pb) / 8.0;
                let basis = space.eval_basis(e.triangle, xi);
                for (d, v) in dofs.iter().zip(&basis.values) {
                    oracle[*d] += g * v;
                }
            }
        }
    }
    let diff: Vec<f64> = load.iter().zip(&oracle).map(|(a, b)| a - b).collect();
    assert!(
        max_abs(&diff) <= 1e-9 * max_abs(&oracle),
        "{}",
        max_abs(&diff) / max_abs(&oracle)
    );
}

#[test]
fn stiffness_annihilates_constants_and_volume_is_symmetric() {
    let mesh = disk_level(2);
    let data = with_data(
        Field::SinPlane {
            offset: 2.0,
            amplitude: 0.5,
        },
        Field::Constant(0.0),
        |_| 0.0,
        |_, _| 0.0,
    );
    for k in 1..=3 {
        let space = FeSpace::new(&mesh, k).unwrap();
        let a = assemble_volume(&space, &data).unwrap();
        assert!(max_abs(&a.row_sums()) <= 1e-10);
        let ones = vec![1.0; space.n_dofs()];
        assert!(a.bilinear(&ones, &ones).abs() <= 1e-10);
        let full = assemble_volume(&space, &ProblemData::catalog("trig", k).unwrap()).unwrap();
        assert!(full.asymmetry() <= 1e-12 * full.max_abs());
        assert!(full.is_structurally_symmetric());
    }
}

#[test]
fn perturbation_is_small_and_nonsymmetric() {
    let disk = CurvedDomain::unit_disk();
    let data = ProblemData::catalog("exp_sin", 2).unwrap();
    let mesh = disk_level(3);
    let space = FeSpace::new(&mesh, 2).unwrap();
    let sys = assemble_system(&space, &disk, &data, Method::PeFem).unwrap();
    assert!(sys.operator.is_structurally_symmetric());
    assert!(sys.operator.asymmetry() > 0.0);
    assert!(sys.boundary.norm_inf() <= mesh.h * sys.volume.norm_inf());
}

fn max_nodal_error(space: &FeSpace<'_>, x: &[f64], u: &dyn SmoothField) -> f64 {
    x.iter()
        .zip(space.nodes())
        .map(|(c, p)| (c - u.value(*p)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn patch_tests_reproduce_polynomials() {
    let disk = CurvedDomain::unit_disk();
    let meshes = mesh_sequence(&disk, 8, 3).unwrap();
    for k in 1..=3 {
        let data = ProblemData::catalog("poly_k", k).unwrap();
        let u = Field::Polynomial(patch_polynomial(k).unwrap());
        for mesh in &meshes {
            let space = FeSpace::new(mesh, k).unwrap();
            let sys = assemble_system(&space, &disk, &data, Method::PeFem).unwrap();
            let x = solve(&sys.operator, &sys.load, SolverKind::Direct).unwrap().solution;
            let err = max_nodal_error(&space, &x, &u);
            assert!(err <= 1e-9, "k={k} level {}: {err}", mesh.level);
        }
    }
}

#[test]
fn quadratic_patch_on_all_domains() {
    // u = x^2 - y + 3 with unit coefficients
    let u = Field::Polynomial(pefem_core::field::Polynomial::new(&[
        (2, 0, 1.0),
        (0, 1, -1.0),
        (0, 0, 3.0),
    ]));
    let data = ProblemData::manufactured("quadratic", u.clone(), Field::Constant(1.0), Field::Constant(1.0));
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse(), CurvedDomain::star()] {
        let mesh = PolygonalMesh::generate(&d, default_boundary_count(&d)).unwrap();
        let space = FeSpace::new(&mesh, 2).unwrap();
        let sys = assemble_system(&space, &d, &data, Method::PeFem).unwrap();
        for kind in [SolverKind::Direct, SolverKind::Iterative] {
            let x = solve(&sys.operator, &sys.load, kind).unwrap().solution;
            assert!(max_nodal_error(&space, &x, &u) <= 1e-8, "{}", d.name());
        }
    }
}

#[test]
fn constant_problem_is_exact() {
    let disk = CurvedDomain::unit_disk();
    let data = ProblemData::catalog("constant", 1).unwrap();
    for k in 1..=3 {
        let mesh = disk_level(2);
        let space = FeSpace::new(&mesh, k).unwrap();
        for method in [Method::PeFem, Method::Baseline] {
            let sys = assemble_system(&space, &disk, &data, method).unwrap();
            let x = solve(&sys.operator, &sys.load, SolverKind::Direct).unwrap().solution;
            assert!(x.iter().all(|v| (v - 1.0).abs() <= 1e-9), "k={k} {}", method.name());
        }
    }
}

#[test]
fn baseline_is_close_to_pefem_for_linears() {
    let disk = CurvedDomain::unit_disk();
    let data = ProblemData::catalog("exp_sin", 1).unwrap();
    let mesh = disk_level(4);
    let space = FeSpace::new(&mesh, 1).unwrap();
    let mut l2 = Vec::new();
    for method in [Method::PeFem, Method::Baseline] {
        let sys = assemble_system(&space, &disk, &data, method).unwrap();
        let x = solve(&sys.operator, &sys.load, SolverKind::Direct).unwrap().solution;
        l2.push(error_norms(&space, &x, &**data.exact.as_ref().unwrap()).unwrap().l2);
    }
    assert!((l2[0] - l2[1]).abs() < 0.1 * l2[0], "{l2:?}");
}

#[test]
fn catalog_data_is_consistent() {
    for d in [CurvedDomain::unit_disk(), CurvedDomain::ellipse(), CurvedDomain::star()] {
        let r = d.circumradius();
        let interior: Vec<Vec2> = (0..100)
            .map(|i| {
                let s = i as f64 * 2.399963;
                Vec2::new(s.cos(), s.sin()) * (r * ((i as f64 + 0.5) / 100.0).sqrt())
            })
            .collect();
        let boundary: Vec<f64> = (0..100).map(|i| (i as f64 * 0.618034) % 1.0).collect();
        for name in CATALOG {
            for k in 1..=3 {
                let data = ProblemData::catalog(name, k).unwrap();
                assert!(data.consistency_residual(&d, &interior, &boundary).unwrap() <= 1e-8);
                let lo = Vec2::new(-r, -r);
                let hi = Vec2::new(r, r);
                assert!(data.check_coefficients(lo, hi, 40).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn volume_form_of_linears_is_the_integral(gx in -2.0..2.0f64, gy in -2.0..2.0f64, c in -1.0..1.0f64) {
        // N(w, w) for w = c + g.x with unit coefficients: |g|^2 |Omega_h| + int w^2
        let mesh = disk_level(1);
        let space = FeSpace::new(&mesh, 1).unwrap();
        let data = with_data(Field::Constant(1.0), Field::Constant(1.0), |_| 0.0, |_, _| 0.0);
        let a: CsrMatrix = assemble_volume(&space, &data).unwrap();
        let g = Vec2::new(gx, gy);
        let w = space.interpolate(|x| c + g.dot(x));
        let rule = make_quadrature(QuadratureKind::Triangle, 2).unwrap();
        let mut mass = 0.0;
        for t in 0..space.n_elements() {
            let geo = *space.geometry(t);
            for (x, wq) in rule.iter() {
                let v = c + g.dot(geo.map(x));
                mass += wq * geo.det.abs() * v * v;
            }
        }
        let expected = g.norm_squared() * mesh.total_area() + mass;
        prop_assert!((a.bilinear(&w, &w) - expected).abs() <= 1e-12 * (1.0 + expected));
    }
}
