//! Continuous Lagrange spaces of degree 1 to 3 on triangle meshes.
//!
//! Element shape functions are polynomials in the barycentric coordinates of
//! their element. Evaluating them at points outside the element is the
//! polynomial continuation of the element's local solution; this is how the
//! boundary correction extends finite element functions beyond the facets.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mesh::PolygonalMesh;
use crate::point::Vec2;

/// Lagrange basis of degree `k` on the reference triangle, in barycentric form.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    degree: usize,
    /// Barycentric multi-index (times k) of each local node.
    nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::UnsupportedPolynomialDegree(degree));
        }
        let k = degree;
        let mut nodes = Vec::with_capacity((k + 1) * (k + 2) / 2);
        for m in 0..3 {
            let mut a = [0; 3];
            a[m] = k;
            nodes.push(a);
        }
        for (p, q) in LOCAL_EDGES {
            for r in 1..k {
                let mut a = [0; 3];
                a[p] = k - r;
                a[q] = r;
                nodes.push(a);
            }
        }
        if k == 3 {
            nodes.push([1, 1, 1]);
        }
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Barycentric coordinates of local node `i`.
    pub fn node(&self, i: usize) -> [f64; 3] {
        let k = self.degree as f64;
        let a = self.nodes[i];
        [a[0] as f64 / k, a[1] as f64 / k, a[2] as f64 / k]
    }

    /// Values and barycentric partial derivatives at `lambda` (which need not
    /// lie inside the triangle).
    pub fn eval(&self, lambda: [f64; 3], values: &mut [f64], dlambda: &mut [[f64; 3]]) {
        let k = self.degree;
        let kf = k as f64;
        // factor tables: P_n(l) = prod_{r<n} (k l - r) / (r + 1), and derivatives
        let mut p = [[0.0; 4]; 3];
        let mut dp = [[0.0; 4]; 3];
        for m in 0..3 {
            let l = lambda[m];
            p[m][0] = 1.0;
            dp[m][0] = 0.0;
            for n in 1..=k {
                let r = (n - 1) as f64;
                let factor = (kf * l - r) / (r + 1.0);
                dp[m][n] = dp[m][n - 1] * factor + p[m][n - 1] * kf / (r + 1.0);
                p[m][n] = p[m][n - 1] * factor;
            }
        }
        for (i, a) in self.nodes.iter().enumerate() {
            let (p0, p1, p2) = (p[0][a[0]], p[1][a[1]], p[2][a[2]]);
            values[i] = p0 * p1 * p2;
            dlambda[i] = [dp[0][a[0]] * p1 * p2, p0 * dp[1][a[1]] * p2, p0 * p1 * dp[2][a[2]]];
        }
    }
}

/// Local edges as (from, to) local vertex pairs; edge `m` is opposite vertex `m`.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(1, 2), (2, 0), (0, 1)];

/// Affine geometry of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Vec2,
    /// Columns are the edge vectors `v1 - v0`, `v2 - v0`.
    pub jacobian: [Vec2; 2],
    pub det: f64,
    /// Physical gradients of the three barycentric coordinates.
    pub grad_lambda: [Vec2; 3],
}

impl ElementGeometry {
    pub fn new(p: [Vec2; 3]) -> Self {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let det = e1.cross(e2);
        let g1 = Vec2::new(e2.y, -e2.x) * (1.0 / det);
        let g2 = Vec2::new(-e1.y, e1.x) * (1.0 / det);
        Self {
            origin: p[0],
            jacobian: [e1, e2],
            det,
            grad_lambda: [-(g1 + g2), g1, g2],
        }
    }

    /// Barycentric coordinates of `x` (negative entries outside the triangle).
    pub fn barycentric(&self, x: Vec2) -> [f64; 3] {
        let d = x - self.origin;
        let l1 = self.grad_lambda[1].dot(d);
        let l2 = self.grad_lambda[2].dot(d);
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn map(&self, reference: Vec2) -> Vec2 {
        self.origin + self.jacobian[0] * reference.x + self.jacobian[1] * reference.y
    }
}

/// Shape function values and physical gradients at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues {
    pub values: Vec<f64>,
    pub gradients: Vec<Vec2>,
}

#[derive(Debug, Clone)]
pub struct FeSpace<'m> {
    pub mesh: &'m PolygonalMesh,
    pub basis: LagrangeBasis,
    n_dofs: usize,
    element_dofs: Vec<usize>,
    nodes: Vec<Vec2>,
    geometry: Vec<ElementGeometry>,
}

impl<'m> FeSpace<'m> {
    pub fn new(mesh: &'m PolygonalMesh, degree: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(degree)?;
        let k = degree;
        let nv = mesh.vertices.len();
        let n_loc = basis.len();

        let mut geometry = Vec::with_capacity(mesh.triangles.len());
        for t in 0..mesh.triangles.len() {
            let p = mesh.triangle_points(t);
            let diam = p[0].distance(p[1]).max(p[1].distance(p[2])).max(p[2].distance(p[0]));
            let g = ElementGeometry::new(p);
            if !(g.det.abs() >= 1e-14 * diam * diam) {
                return Err(Error::SingularElement { element: t, det: g.det });
            }
            geometry.push(g);
        }

        let edge_index: BTreeMap<(usize, usize), usize> =
            mesh.edges().into_iter().enumerate().map(|(i, e)| (e, i)).collect();
        let n_edges = edge_index.len();
        let per_edge = k - 1;
        let interior_start = nv + n_edges * per_edge;
        let interior_per = if k == 3 { 1 } else { 0 };
        let n_dofs = interior_start + mesh.triangles.len() * interior_per;

        let mut nodes = alloc::vec![Vec2::ZERO; n_dofs];
        nodes[..nv].copy_from_slice(&mesh.vertices);
        let mut element_dofs = Vec::with_capacity(mesh.triangles.len() * n_loc);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let start = element_dofs.len();
            element_dofs.extend_from_slice(tri);
            for (p, q) in LOCAL_EDGES {
                let (gp, gq) = (tri[p], tri[q]);
                let e = edge_index[&(gp.min(gq), gp.max(gq))];
                for r in 1..k {
                    // edge slots run from the lower to the higher global vertex
                    let slot = if gp < gq { r - 1 } else { k - 1 - r };
                    element_dofs.push(nv + e * per_edge + slot);
                }
            }
            if k == 3 {
                element_dofs.push(interior_start + t);
            }
            let g = &geometry[t];
            for i in 0..n_loc {
                let l = basis.node(i);
                nodes[element_dofs[start + i]] = g.map(Vec2::new(l[1], l[2]));
            }
        }
        Ok(Self {
            mesh,
            basis,
            n_dofs,
            element_dofs,
            nodes,
            geometry,
        })
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_elements(&self) -> usize {
        self.geometry.len()
    }

    pub fn local_size(&self) -> usize {
        self.basis.len()
    }

    pub fn element_dofs(&self, element: usize) -> &[usize] {
        let n = self.basis.len();
        &self.element_dofs[element * n..(element + 1) * n]
    }

    pub fn geometry(&self, element: usize) -> &ElementGeometry {
        &self.geometry[element]
    }

    /// Physical coordinates of every global Lagrange node.
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    /// Shape functions of `element` (and their gradients) at `x`, anywhere in
    /// the plane.
    pub fn eval_basis(&self, element: usize, x: Vec2) -> BasisValues {
        let n = self.basis.len();
        let mut values = alloc::vec![0.0; n];
        let mut gradients = alloc::vec![Vec2::ZERO; n];
        self.eval_basis_into(element, x, &mut values, &mut gradients);
        BasisValues { values, gradients }
    }

    /// Allocation-free variant of [`eval_basis`](Self::eval_basis).
    pub fn eval_basis_into(&self, element: usize, x: Vec2, values: &mut [f64], gradients: &mut [Vec2]) {
        let g = &self.geometry[element];
        let mut dl = [[0.0; 3]; 10];
        let n = self.basis.len();
        self.basis.eval(g.barycentric(x), values, &mut dl[..n]);
        for i in 0..n {
            gradients[i] = g.grad_lambda[0] * dl[i][0] + g.grad_lambda[1] * dl[i][1] + g.grad_lambda[2] * dl[i][2];
        }
    }

    /// Nodal interpolant of `v`.
    pub fn interpolate(&self, v: impl Fn(Vec2) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&p| v(p)).collect()
    }

    /// Value and gradient of the element-`element` polynomial of `coeffs` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], element: usize, x: Vec2) -> (f64, Vec2) {
        let n = self.basis.len();
        let mut values = [0.0; 10];
        let mut grads = [Vec2::ZERO; 10];
        self.eval_basis_into(element, x, &mut values[..n], &mut grads[..n]);
        let dofs = self.element_dofs(element);
        let mut u = 0.0;
        let mut du = Vec2::ZERO;
        for i in 0..n {
            u += coeffs[dofs[i]] * values[i];
            du += grads[i] * coeffs[dofs[i]];
        }
        (u, du)
    }
}
