//! Discrete PE-FEM operator and load.
//!
//! The bilinear form is
//!
//! ```text
//! B(w, v) = (p grad w, grad v) + (q w, v)                       [volume, N_h]
//!         + < p(eta) grad w_E(eta) . n  -  p(xi) grad w . n_h,  v >  [extension]
//! ```
//!
//! where the boundary pairing runs over the facets, `eta = eta(xi)` is the
//! closest point on the curve, `n` the exact normal there, and `grad w_E(eta)`
//! the gradient of the owner element's polynomial continued to `eta`. The load
//! is `(f, v) + < g(eta), v >`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::fespace::FeSpace;
use crate::geometry::CurvedDomain;
use crate::point::Vec2;
use crate::problem::ProblemData;
use crate::quadrature::{make_quadrature, QuadratureKind, QuadratureRule};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Which boundary treatment to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Polynomial-extension correction, data evaluated at `eta(xi)`.
    PeFem,
    /// Plain polygonal Neumann FEM: no correction, data evaluated at `xi`.
    Baseline,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::PeFem => "pefem",
            Method::Baseline => "baseline",
        }
    }
}

/// Quadrature exactness used for every assembled term: `2k + 2`.
pub fn assembly_degree(k: usize) -> usize {
    2 * k + 2
}

/// A quadrature point on a boundary facet together with its projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub edge: usize,
    /// Owner triangle of the facet.
    pub element: usize,
    pub xi: Vec2,
    /// Quadrature weight times facet length.
    pub weight: f64,
    pub facet_normal: Vec2,
    pub eta: Vec2,
    /// Exact outward normal at `eta`.
    pub normal: Vec2,
}

/// Facet quadrature points with their boundary traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryQuadrature {
    pub points: Vec<BoundaryPoint>,
    pub degree: usize,
}

impl BoundaryQuadrature {
    /// Projects every facet quadrature point of exactness `degree` onto the curve.
    pub fn new(space: &FeSpace<'_>, domain: &CurvedDomain, degree: usize) -> Result<Self> {
        Self::build(space, degree, |xi, _| {
            let trace = domain.closest_point(xi)?;
            Ok((trace.projected, trace.normal))
        })
    }

    /// Flat-boundary harness: `eta(xi) = xi` and `n = n_h`.
    pub fn flat(space: &FeSpace<'_>, degree: usize) -> Result<Self> {
        Self::build(space, degree, |xi, nh| Ok((xi, nh)))
    }

    fn build(
        space: &FeSpace<'_>,
        degree: usize,
        mut project: impl FnMut(Vec2, Vec2) -> Result<(Vec2, Vec2)>,
    ) -> Result<Self> {
        let rule = make_quadrature(QuadratureKind::Segment, degree)?;
        let mesh = space.mesh;
        let mut points = Vec::with_capacity(mesh.boundary_edges.len() * rule.len());
        for (edge, e) in mesh.boundary_edges.iter().enumerate() {
            let [a, b] = e.vertices;
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let length = pa.distance(pb);
            let nh = mesh.facet_normal(edge);
            for (s, w) in rule.iter() {
                let xi = pa.lerp(pb, s.x);
                let (eta, normal) = project(xi, nh)?;
                points.push(BoundaryPoint {
                    edge,
                    element: e.triangle,
                    xi,
                    weight: w * length,
                    facet_normal: nh,
                    eta,
                    normal,
                });
            }
        }
        Ok(Self { points, degree })
    }
}

/// The assembled nonsymmetric system with its parts kept apart.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub method: Method,
    /// Conforming part `N_h`.
    pub volume: CsrMatrix,
    /// Boundary correction (all zeros for the baseline).
    pub boundary: CsrMatrix,
    /// `volume + boundary`.
    pub operator: CsrMatrix,
    pub load: Vec<f64>,
    pub volume_quadrature_degree: usize,
    pub boundary_quadrature_degree: usize,
}

struct ReferenceTable {
    rule: QuadratureRule,
    values: Vec<f64>,
    dlambda: Vec<[f64; 3]>,
}

fn reference_table(space: &FeSpace<'_>, degree: usize) -> Result<ReferenceTable> {
    let rule = make_quadrature(QuadratureKind::Triangle, degree)?;
    let n = space.local_size();
    let mut values = alloc::vec![0.0; rule.len() * n];
    let mut dlambda = alloc::vec![[0.0; 3]; rule.len() * n];
    for q in 0..rule.len() {
        space.basis.eval(
            rule.barycentric(q),
            &mut values[q * n..(q + 1) * n],
            &mut dlambda[q * n..(q + 1) * n],
        );
    }
    Ok(ReferenceTable { rule, values, dlambda })
}

/// Matrix of `(p grad phi_j, grad phi_i) + (q phi_j, phi_i)` with rows indexed by test functions.
pub fn assemble_volume(space: &FeSpace<'_>, data: &ProblemData) -> Result<CsrMatrix> {
    assemble_volume_with(space, data, assembly_degree(space.degree()))
}

pub fn assemble_volume_with(space: &FeSpace<'_>, data: &ProblemData, degree: usize) -> Result<CsrMatrix> {
    let table = reference_table(space, degree)?;
    let n = space.local_size();
    let mut builder = TripletBuilder::with_capacity(space.n_dofs(), space.n_dofs(), space.n_elements() * n * n);
    let mut local = alloc::vec![0.0; n * n];
    let mut grads = alloc::vec![Vec2::ZERO; n];
    for t in 0..space.n_elements() {
        let g = space.geometry(t);
        local.iter_mut().for_each(|v| *v = 0.0);
        for (q, (xref, w)) in table.rule.iter().enumerate() {
            let x = g.map(xref);
            let jw = w * g.det.abs();
            let (p, r) = (data.diffusion.value(x), data.reaction.value(x));
            let vals = &table.values[q * n..(q + 1) * n];
            for i in 0..n {
                let d = table.dlambda[q * n + i];
                grads[i] = g.grad_lambda[0] * d[0] + g.grad_lambda[1] * d[1] + g.grad_lambda[2] * d[2];
            }
            for i in 0..n {
                for j in 0..n {
                    local[i * n + j] += jw * (p * grads[j].dot(grads[i]) + r * vals[j] * vals[i]);
                }
            }
        }
        let dofs = space.element_dofs(t);
        for i in 0..n {
            for j in 0..n {
                builder.push(dofs[i], dofs[j], local[i * n + j]);
            }
        }
    }
    Ok(builder.build())
}

/// Polynomial-extension boundary correction.
pub fn assemble_extension_boundary(
    space: &FeSpace<'_>,
    domain: &CurvedDomain,
    data: &ProblemData,
) -> Result<CsrMatrix> {
    let bq = BoundaryQuadrature::new(space, domain, assembly_degree(space.degree()))?;
    Ok(assemble_extension_with(space, &bq, data))
}

pub fn assemble_extension_with(space: &FeSpace<'_>, bq: &BoundaryQuadrature, data: &ProblemData) -> CsrMatrix {
    let n = space.local_size();
    let mut builder = TripletBuilder::with_capacity(space.n_dofs(), space.n_dofs(), bq.points.len() * n * n);
    let mut test = alloc::vec![0.0; n];
    let mut grad_xi = alloc::vec![Vec2::ZERO; n];
    let mut vals_eta = alloc::vec![0.0; n];
    let mut grad_eta = alloc::vec![Vec2::ZERO; n];
    for bp in &bq.points {
        let e = bp.element;
        space.eval_basis_into(e, bp.xi, &mut test, &mut grad_xi);
        space.eval_basis_into(e, bp.eta, &mut vals_eta, &mut grad_eta);
        let p_eta = data.diffusion.value(bp.eta);
        let p_xi = data.diffusion.value(bp.xi);
        let dofs = space.element_dofs(e);
        for j in 0..n {
            let flux = p_eta * grad_eta[j].dot(bp.normal) - p_xi * grad_xi[j].dot(bp.facet_normal);
            for i in 0..n {
                builder.push(dofs[i], dofs[j], bp.weight * flux * test[i]);
            }
        }
    }
    builder.build()
}

/// `(f, phi_i)` over the mesh.
pub fn assemble_volume_load(space: &FeSpace<'_>, data: &ProblemData, degree: usize) -> Result<Vec<f64>> {
    let table = reference_table(space, degree)?;
    let n = space.local_size();
    let mut load = alloc::vec![0.0; space.n_dofs()];
    for t in 0..space.n_elements() {
        let g = space.geometry(t);
        let dofs = space.element_dofs(t);
        for (q, (xref, w)) in table.rule.iter().enumerate() {
            let fx = (data.source)(g.map(xref)) * w * g.det.abs();
            for i in 0..n {
                load[dofs[i]] += fx * table.values[q * n + i];
            }
        }
    }
    Ok(load)
}

/// `< g, phi_i >` on the facets, with `g` evaluated at `eta(xi)` ([`Method::PeFem`])
/// or at `xi` itself ([`Method::Baseline`]); the exact normal at `eta(xi)` is used in both.
pub fn assemble_boundary_load(
    space: &FeSpace<'_>,
    bq: &BoundaryQuadrature,
    data: &ProblemData,
    method: Method,
) -> Vec<f64> {
    let n = space.local_size();
    let mut load = alloc::vec![0.0; space.n_dofs()];
    let mut test = alloc::vec![0.0; n];
    let mut grads = alloc::vec![Vec2::ZERO; n];
    for bp in &bq.points {
        let at = match method {
            Method::PeFem => bp.eta,
            Method::Baseline => bp.xi,
        };
        let g = (data.neumann)(at, bp.normal) * bp.weight;
        space.eval_basis_into(bp.element, bp.xi, &mut test, &mut grads);
        let dofs = space.element_dofs(bp.element);
        for i in 0..n {
            load[dofs[i]] += g * test[i];
        }
    }
    load
}

/// Right-hand side of the PE-FEM system.
pub fn assemble_load(space: &FeSpace<'_>, domain: &CurvedDomain, data: &ProblemData) -> Result<Vec<f64>> {
    let degree = assembly_degree(space.degree());
    let bq = BoundaryQuadrature::new(space, domain, degree)?;
    let mut load = assemble_volume_load(space, data, degree)?;
    for (l, b) in load
        .iter_mut()
        .zip(assemble_boundary_load(space, &bq, data, Method::PeFem))
    {
        *l += b;
    }
    Ok(load)
}

/// Baseline boundary treatment: a zero operator and the boundary load with
/// the datum evaluated on the facets.
pub fn assemble_baseline_boundary(
    space: &FeSpace<'_>,
    bq: &BoundaryQuadrature,
    data: &ProblemData,
) -> (CsrMatrix, Vec<f64>) {
    (
        CsrMatrix::zeros(space.n_dofs(), space.n_dofs()),
        assemble_boundary_load(space, bq, data, Method::Baseline),
    )
}

/// Assembles the full system for `method` using precomputed boundary traces.
pub fn assemble_system_with(
    space: &FeSpace<'_>,
    bq: &BoundaryQuadrature,
    data: &ProblemData,
    method: Method,
) -> Result<LinearSystem> {
    let degree = assembly_degree(space.degree());
    let volume = assemble_volume_with(space, data, degree)?;
    let (boundary, boundary_load) = match method {
        Method::PeFem => (
            assemble_extension_with(space, bq, data),
            assemble_boundary_load(space, bq, data, Method::PeFem),
        ),
        Method::Baseline => assemble_baseline_boundary(space, bq, data),
    };
    let mut load = assemble_volume_load(space, data, degree)?;
    for (l, b) in load.iter_mut().zip(&boundary_load) {
        *l += b;
    }
    let operator = volume.add(&boundary);
    Ok(LinearSystem {
        method,
        volume,
        boundary,
        operator,
        load,
        volume_quadrature_degree: degree,
        boundary_quadrature_degree: bq.degree,
    })
}

pub fn assemble_system(
    space: &FeSpace<'_>,
    domain: &CurvedDomain,
    data: &ProblemData,
    method: Method,
) -> Result<LinearSystem> {
    let bq = BoundaryQuadrature::new(space, domain, assembly_degree(space.degree()))?;
    assemble_system_with(space, &bq, data, method)
}
