//! Straight-edged triangulations of the catalog domains.
//!
//! Meshes are built by a radial-layer construction (scaled copies of the
//! boundary polygon shrinking towards the centroid, with a fan at the centre)
//! and refined uniformly by red refinement. Boundary vertices always lie on the
//! curve: new boundary midpoints are re-projected with the closest-point map,
//! which keeps the facet/curve gap `delta_h` of order `h^2`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::CurvedDomain;
use crate::point::Vec2;

/// Smallest admissible interior angle, in degrees.
pub const MIN_ANGLE_DEG: f64 = 15.0;
/// Tolerance for boundary vertices lying on the curve.
pub const ON_CURVE_TOL: f64 = 1e-10;

/// A boundary facet, oriented so that its owner triangle lies to the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    /// Curve parameters of the two endpoints.
    pub params: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    pub vertices: Vec<Vec2>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Largest triangle diameter.
    pub h: f64,
    /// Largest gap between a boundary facet and the curve.
    pub delta_h: f64,
    pub level: usize,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn triangle_angles(p: [Vec2; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let u = p[(i + 1) % 3] - p[i];
        let v = p[(i + 2) % 3] - p[i];
        out[i] = u.cross(v).abs().atan2(u.dot(v));
    }
    out
}

impl PolygonalMesh {
    /// Radial-layer mesh with `n_boundary` arclength-equispaced boundary vertices.
    pub fn generate(domain: &CurvedDomain, n_boundary: usize) -> Result<Self> {
        if n_boundary < 8 {
            return Err(Error::InvalidInput("n_boundary must be at least 8"));
        }
        let centre = domain.centroid();
        let layers = ((n_boundary as f64 * domain.circumradius() / domain.perimeter()).ceil() as usize).max(1);

        let mut vertices = alloc::vec![centre];
        let mut rings: Vec<(Vec<usize>, Vec<f64>)> = Vec::with_capacity(layers);
        let mut boundary_params = Vec::new();
        for j in 1..=layers {
            let count = if j == layers {
                n_boundary
            } else {
                ((n_boundary * j) as f64 / layers as f64).round().max(3.0) as usize
            };
            // stagger alternate rings by half a spacing
            let shift = if (layers - j) % 2 == 1 { 0.5 } else { 0.0 };
            let fractions: Vec<f64> = (0..count).map(|i| (i as f64 + shift) / count as f64).collect();
            let params = domain.parameters_at_arclength(&fractions);
            let scale = j as f64 / layers as f64;
            let start = vertices.len();
            for &t in &params {
                let p = if j == layers {
                    domain.point(t)
                } else {
                    centre + (domain.point(t) - centre) * scale
                };
                vertices.push(p);
            }
            if j == layers {
                boundary_params = params;
            }
            rings.push(((start..start + count).collect(), fractions));
        }

        let mut triangles = Vec::new();
        let (first, _) = &rings[0];
        for i in 0..first.len() {
            triangles.push([0, first[i], first[(i + 1) % first.len()]]);
        }
        for j in 1..layers {
            stitch_rings(&vertices, &rings[j - 1], &rings[j], &mut triangles);
        }
        for tri in triangles.iter_mut() {
            let [a, b, c] = *tri;
            if (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]) < 0.0 {
                *tri = [a, c, b];
            }
        }

        let (outer, _) = &rings[layers - 1];
        let n = outer.len();
        let boundary: Vec<([usize; 2], [f64; 2])> = (0..n)
            .map(|i| {
                (
                    [outer[i], outer[(i + 1) % n]],
                    [boundary_params[i], boundary_params[(i + 1) % n]],
                )
            })
            .collect();
        Self::assemble(vertices, triangles, &boundary, domain, 0)
    }

    /// Builds a mesh from raw parts, validating every structural invariant and
    /// measuring `h` and `delta_h`.
    pub fn from_parts(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary: &[([usize; 2], [f64; 2])],
        domain: &CurvedDomain,
        level: usize,
    ) -> Result<Self> {
        Self::assemble(vertices, triangles, boundary, domain, level)
    }

    fn assemble(
        vertices: Vec<Vec2>,
        triangles: Vec<[usize; 3]>,
        boundary: &[([usize; 2], [f64; 2])],
        domain: &CurvedDomain,
        level: usize,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.iter().flatten().any(|&v| v >= nv) {
            return Err(Error::InvalidMesh("triangle references a missing vertex"));
        }
        // directed edge -> owning triangle
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            if (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a]) <= 0.0 {
                return Err(Error::InvalidMesh("triangle is not counterclockwise"));
            }
            for (p, q) in [(a, b), (b, c), (c, a)] {
                if directed.insert((p, q), t).is_some() {
                    return Err(Error::InvalidMesh("edge used twice with the same orientation"));
                }
            }
        }
        let open_edges = directed
            .keys()
            .filter(|&&(p, q)| !directed.contains_key(&(q, p)))
            .count();
        if open_edges != boundary.len() {
            return Err(Error::InvalidMesh("boundary edge list does not match the open edges"));
        }
        let mut boundary_edges = Vec::with_capacity(boundary.len());
        for &(v, params) in boundary {
            let Some(&triangle) = directed.get(&(v[0], v[1])) else {
                return Err(Error::InvalidMesh("boundary edge has no owner triangle"));
            };
            if directed.contains_key(&(v[1], v[0])) {
                return Err(Error::InvalidMesh("boundary edge is shared by two triangles"));
            }
            for i in 0..2 {
                if vertices[v[i]].distance(domain.point(params[i])) > ON_CURVE_TOL {
                    return Err(Error::InvalidMesh("boundary vertex is not on the curve"));
                }
            }
            boundary_edges.push(BoundaryEdge {
                vertices: v,
                triangle,
                params,
            });
        }

        let mut mesh = PolygonalMesh {
            vertices,
            triangles,
            boundary_edges,
            h: 0.0,
            delta_h: 0.0,
            level,
        };
        if mesh.euler_characteristic() != 2 {
            return Err(Error::InvalidMesh("mesh is not simply connected"));
        }
        let (triangle, min_angle_deg) = mesh.min_angle();
        if min_angle_deg < MIN_ANGLE_DEG {
            return Err(Error::QualityFailure {
                triangle,
                min_angle_deg,
            });
        }
        mesh.h = mesh.max_diameter();
        mesh.measure_delta_h(domain)?;
        Ok(mesh)
    }

    /// Uniform red refinement; boundary midpoints are projected onto the curve.
    pub fn refine(&self, domain: &CurvedDomain) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut boundary_mid: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut boundary = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            let chord_mid = self.vertices[a].lerp(self.vertices[b], 0.5);
            let trace = domain.closest_point(chord_mid)?;
            let m = vertices.len();
            vertices.push(trace.projected);
            midpoint.insert(edge_key(a, b), m);
            boundary_mid.insert(edge_key(a, b), trace.parameter);
            boundary.push(([a, m], [e.params[0], trace.parameter]));
            boundary.push(([m, b], [trace.parameter, e.params[1]]));
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [a, b, c] = *tri;
            let mut mid = |p: usize, q: usize| {
                *midpoint.entry(edge_key(p, q)).or_insert_with(|| {
                    vertices.push(self.vertices[p].lerp(self.vertices[q], 0.5));
                    vertices.len() - 1
                })
            };
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Self::assemble(vertices, triangles, &boundary, domain, self.level + 1)
    }

    /// Recomputes and stores `delta_h` as the largest chord gap over the boundary facets.
    pub fn measure_delta_h(&mut self, domain: &CurvedDomain) -> Result<f64> {
        let mut delta = 0.0_f64;
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            delta = delta.max(domain.chord_gap(self.vertices[a], self.vertices[b])?);
        }
        self.delta_h = delta;
        Ok(delta)
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle_points(t);
                a.distance(b).max(b.distance(c)).max(c.distance(a))
            })
            .fold(0.0, f64::max)
    }

    /// `(triangle, angle in degrees)` of the smallest interior angle.
    pub fn min_angle(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for t in 0..self.triangles.len() {
            let m = triangle_angles(self.triangle_points(t))
                .into_iter()
                .fold(f64::INFINITY, f64::min)
                * 180.0
                / PI;
            if m < best.1 {
                best = (t, m);
            }
        }
        best
    }

    /// Undirected edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [edge_key(a, b), edge_key(b, c), edge_key(c, a)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// `V - E + F`, counting the outer face.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64 + 1
    }

    /// Unit outward normal of a boundary facet.
    pub fn facet_normal(&self, edge: usize) -> Vec2 {
        let [a, b] = self.boundary_edges[edge].vertices;
        (self.vertices[b] - self.vertices[a]).normalized().perp_cw()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| self.vertices[e.vertices[0]].distance(self.vertices[e.vertices[1]]))
            .sum()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().map(|e| e.vertices[0]).collect();
        v.sort_unstable();
        v
    }
}

/// Triangulates the annulus between two closed rings of vertices whose
/// positions are given as arclength fractions.
/// Triangulates the annulus between two closed rings, always closing the
/// shorter of the two candidate diagonals.
fn stitch_rings(
    vertices: &[Vec2],
    inner: &(Vec<usize>, Vec<f64>),
    outer: &(Vec<usize>, Vec<f64>),
    out: &mut Vec<[usize; 3]>,
) {
    let (iv, ifrac) = inner;
    let (ov, ofrac) = outer;
    let (ni, no) = (iv.len(), ov.len());
    let wrap = |d: f64| d - d.round();
    let start = (0..ni)
        .min_by(|&a, &b| {
            wrap(ifrac[a] - ofrac[0])
                .abs()
                .partial_cmp(&wrap(ifrac[b] - ofrac[0]).abs())
                .unwrap()
        })
        .unwrap();
    let o = |k: usize| ov[k % no];
    let i = |k: usize| iv[(start + k) % ni];
    let (mut a, mut b) = (0, 0);
    while a < no || b < ni {
        let advance_outer = if a == no {
            false
        } else if b == ni {
            true
        } else {
            vertices[o(a + 1)].distance(vertices[i(b)]) <= vertices[o(a)].distance(vertices[i(b + 1)])
        };
        if advance_outer {
            out.push([o(a), o(a + 1), i(b)]);
            a += 1;
        } else {
            out.push([i(b), o(a), i(b + 1)]);
            b += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn disk_sixteen() {
        let disk = CurvedDomain::unit_disk();
        let m = PolygonalMesh::generate(&disk, 16).unwrap();
        assert_eq!(m.boundary_edges.len(), 16);
        for e in &m.boundary_edges {
            let [a, b] = e.vertices;
            assert_abs_diff_eq!(m.vertices[a].norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(
                m.vertices[a].distance(m.vertices[b]),
                2.0 * (PI / 16.0).sin(),
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(m.delta_h, 1.0 - (PI / 16.0).cos(), epsilon = 1e-10);
        assert_abs_diff_eq!(m.delta_h, 0.019215, epsilon = 1e-6);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.min_angle().1 >= MIN_ANGLE_DEG);
    }

    #[test]
    fn refinement_quadruples_and_projects() {
        let disk = CurvedDomain::unit_disk();
        let m0 = PolygonalMesh::generate(&disk, 16).unwrap();
        let m1 = m0.refine(&disk).unwrap();
        assert_eq!(m1.triangles.len(), 4 * m0.triangles.len());
        assert_eq!(m1.boundary_edges.len(), 32);
        for v in m1.boundary_vertices() {
            assert_abs_diff_eq!(m1.vertices[v].norm(), 1.0, epsilon = 1e-10);
        }
        let hr = m1.h / m0.h;
        assert!((0.45..=0.55).contains(&hr), "h ratio {hr}");
        let dr = m1.delta_h / m0.delta_h;
        assert!((0.2..=0.3).contains(&dr), "delta ratio {dr}");
        assert_eq!(m1.level, 1);
    }

    #[test]
    fn too_few_boundary_vertices() {
        assert!(PolygonalMesh::generate(&CurvedDomain::unit_disk(), 7).is_err());
    }

    #[test]
    fn from_parts_rejects_off_curve_vertices() {
        let disk = CurvedDomain::unit_disk();
        let m = PolygonalMesh::generate(&disk, 8).unwrap();
        let mut boundary: Vec<_> = m.boundary_edges.iter().map(|e| (e.vertices, e.params)).collect();
        assert!(PolygonalMesh::from_parts(m.vertices.clone(), m.triangles.clone(), &boundary, &disk, 0).is_ok());
        boundary[0].1[0] += 1e-3;
        assert_eq!(
            PolygonalMesh::from_parts(m.vertices.clone(), m.triangles.clone(), &boundary, &disk, 0),
            Err(Error::InvalidMesh("boundary vertex is not on the curve"))
        );
    }
}
