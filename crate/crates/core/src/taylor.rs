//! Truncated Taylor operators and the boundary-extension rate checks.
//!
//! Smooth fields are expanded pointwise about a facet point `xi` and
//! evaluated at its projection `eta(xi)`. For finite element functions the
//! expansion of the owner polynomial is the polynomial itself, so the band
//! operator reduces to `v_E(eta) - v_E(xi)`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::analysis::fit_slope;
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::field::{seminorm_w_inf, SmoothField};
use crate::geometry::CurvedDomain;
use crate::mesh::PolygonalMesh;
use crate::point::Vec2;
use crate::quadrature::{make_quadrature, QuadratureKind};

/// Discrepancies at or below this are round-off, not resolution of the remainder.
pub const DISCREPANCY_FLOOR: f64 = 1e-14;
/// Rows at or below this count as exact reproduction.
pub const EXACT_THRESHOLD: f64 = 1e-12;
pub const MIN_USABLE_ROWS: usize = 4;
pub const RATE_TOLERANCE: f64 = 0.25;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `sum_{lo <= |alpha| <= hi} D^alpha v(center) d^alpha / alpha!` with `d = target - center`.
pub fn taylor_band(v: &dyn SmoothField, center: Vec2, target: Vec2, lo: usize, hi: usize) -> f64 {
    let d = target - center;
    let mut sum = 0.0;
    for order in lo..=hi {
        for a in 0..=order {
            let b = order - a;
            sum += v.derivative(center, a, b) * d.x.powi(a as i32) * d.y.powi(b as i32) / (factorial(a) * factorial(b));
        }
    }
    sum
}

/// Degree-`k` Taylor polynomial of `v` about `center`, evaluated at `target`.
pub fn taylor_eval(v: &dyn SmoothField, center: Vec2, target: Vec2, k: usize) -> f64 {
    taylor_band(v, center, target, 0, k)
}

struct Shifted<'a> {
    v: &'a dyn SmoothField,
    a: usize,
    b: usize,
}

impl SmoothField for Shifted<'_> {
    fn derivative(&self, p: Vec2, a: usize, b: usize) -> f64 {
        self.v.derivative(p, a + self.a, b + self.b)
    }
}

/// Degree-`k` Taylor expansion of the gradient of `v`, component by component.
pub fn taylor_gradient(v: &dyn SmoothField, center: Vec2, target: Vec2, k: usize) -> Vec2 {
    Vec2::new(
        taylor_eval(&Shifted { v, a: 1, b: 0 }, center, target, k),
        taylor_eval(&Shifted { v, a: 0, b: 1 }, center, target, k),
    )
}

/// A facet quadrature point paired with its projection onto the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub element: usize,
    pub xi: Vec2,
    pub eta: Vec2,
}

/// Facet quadrature points of exactness `degree` with their closest points.
pub fn projected_points(mesh: &PolygonalMesh, domain: &CurvedDomain, degree: usize) -> Result<Vec<ProjectedPoint>> {
    let rule = make_quadrature(QuadratureKind::Segment, degree)?;
    let mut out = Vec::with_capacity(mesh.boundary_edges.len() * rule.len());
    for e in &mesh.boundary_edges {
        let (a, b) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        for s in &rule.points {
            let xi = a.lerp(b, s.x);
            out.push(ProjectedPoint {
                element: e.triangle,
                xi,
                eta: domain.closest_point(xi)?.projected,
            });
        }
    }
    Ok(out)
}

/// Largest Taylor-extension discrepancy on one mesh: with `m = 0` the value
/// `|T^k v(xi -> eta) - v(eta)|`, with `m = 1` the gradient discrepancy of the
/// order-`k - 1` expansion of `grad v`.
pub fn lemma2_discrepancy(v: &dyn SmoothField, points: &[ProjectedPoint], k: usize, m: usize) -> Result<f64> {
    if m > 1 || m > k {
        return Err(Error::InvalidInput("derivative order must be 0 or 1 and at most k"));
    }
    let mut worst = 0.0_f64;
    for p in points {
        let d = if m == 0 {
            (taylor_eval(v, p.xi, p.eta, k) - v.value(p.eta)).abs()
        } else {
            (taylor_gradient(v, p.xi, p.eta, k - 1) - v.gradient(p.eta)).max_abs()
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

/// One mesh of a lemma sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaRow {
    pub level: usize,
    pub h: f64,
    pub delta_h: f64,
    pub discrepancy: f64,
    /// False when the row sits on the round-off floor.
    pub usable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateStatus {
    Fitted(f64),
    /// Every row reproduced exactly.
    Exact,
    /// Fewer than four usable rows.
    Insufficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCheck {
    pub k: usize,
    pub m: usize,
    pub expected: f64,
    pub rows: Vec<LemmaRow>,
    pub status: RateStatus,
}

impl RateCheck {
    pub fn fitted_order(&self) -> Option<f64> {
        match self.status {
            RateStatus::Fitted(s) => Some(s),
            _ => None,
        }
    }

    pub fn passed(&self) -> bool {
        match self.status {
            RateStatus::Fitted(s) => (s - self.expected).abs() <= RATE_TOLERANCE,
            RateStatus::Exact => true,
            RateStatus::Insufficient => false,
        }
    }
}

/// Least-squares order of `discrepancy` against `delta_h` over the last four
/// usable rows.
pub fn fit_rows(rows: &[LemmaRow]) -> RateStatus {
    if rows.iter().all(|r| r.discrepancy <= EXACT_THRESHOLD) {
        return RateStatus::Exact;
    }
    let usable: Vec<&LemmaRow> = rows.iter().filter(|r| r.usable).collect();
    if usable.len() < MIN_USABLE_ROWS {
        return RateStatus::Insufficient;
    }
    let tail = &usable[usable.len() - MIN_USABLE_ROWS..];
    let x: Vec<f64> = tail.iter().map(|r| r.delta_h).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.discrepancy).collect();
    RateStatus::Fitted(fit_slope(&x, &y))
}

/// Measures the Taylor-extension discrepancy on each mesh and fits its order
/// in `delta_h`; the expected order is `k + 1 - m`.
pub fn lemma2_rate_check(
    v: &dyn SmoothField,
    domain: &CurvedDomain,
    meshes: &[PolygonalMesh],
    k: usize,
    m: usize,
) -> Result<RateCheck> {
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let points = projected_points(mesh, domain, 2 * k + 2)?;
        let discrepancy = lemma2_discrepancy(v, &points, k, m)?;
        rows.push(LemmaRow {
            level: mesh.level,
            h: mesh.h,
            delta_h: mesh.delta_h,
            discrepancy,
            usable: discrepancy > DISCREPANCY_FLOOR,
        });
    }
    let status = fit_rows(&rows);
    Ok(RateCheck {
        k,
        m,
        expected: (k + 1 - m) as f64,
        rows,
        status,
    })
}

/// Boundary facet samples per edge in [`sup_on_mesh`].
pub const FACET_SAMPLES: usize = 32;

/// Sample of `sup |v|` over the polygonal domain: vertices, edge midpoints and
/// centroids of every triangle, plus a dense walk along each boundary facet
/// (where the maxima of the catalog fields sit).
pub fn sup_on_mesh(mesh: &PolygonalMesh, v: impl Fn(usize, Vec2) -> f64) -> f64 {
    let mut s = 0.0_f64;
    for t in 0..mesh.triangles.len() {
        let p = mesh.triangle_points(t);
        let c = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
        for x in [
            p[0],
            p[1],
            p[2],
            p[0].lerp(p[1], 0.5),
            p[1].lerp(p[2], 0.5),
            p[2].lerp(p[0], 0.5),
            c,
        ] {
            s = s.max(v(t, x).abs());
        }
    }
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        for i in 1..FACET_SAMPLES {
            let x = mesh.vertices[a].lerp(mesh.vertices[b], i as f64 / FACET_SAMPLES as f64);
            s = s.max(v(e.triangle, x).abs());
        }
    }
    s
}

/// Stability sweep for one mesh: the relative excess
/// `max(0, max |T^k v(xi -> eta)| - sup |v|) / sup |v|`.
pub fn lemma1_excess(v: &dyn SmoothField, mesh: &PolygonalMesh, points: &[ProjectedPoint], k: usize) -> f64 {
    let sup = sup_on_mesh(mesh, |_, x| v.value(x));
    let ext = points
        .iter()
        .map(|p| taylor_eval(v, p.xi, p.eta, k).abs())
        .fold(0.0, f64::max);
    (ext - sup).max(0.0) / sup
}

/// Inverse-scaling sweep for one mesh: `max |T^{1,k} v_h(xi -> eta)|` for the
/// interpolant `v_h` of `v`, together with the constant
/// `C = value / ((delta_h / h) sup |v_h|)`.
pub fn lemma3_band(space: &FeSpace<'_>, v: &dyn SmoothField, points: &[ProjectedPoint]) -> (f64, f64) {
    let coeffs = space.interpolate(|x| v.value(x));
    let mesh = space.mesh;
    let sup = sup_on_mesh(mesh, |t, x| space.evaluate(&coeffs, t, x).0);
    let band = points
        .iter()
        .map(|p| (space.evaluate(&coeffs, p.element, p.eta).0 - space.evaluate(&coeffs, p.element, p.xi).0).abs())
        .fold(0.0, f64::max);
    (band, band / ((mesh.delta_h / mesh.h) * sup))
}

/// Outcome of a stability sweep (lemma 1 or lemma 3 analogue).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySweep {
    pub k: usize,
    pub rows: Vec<LemmaRow>,
    /// Per-row constant: excess over `delta_h` (lemma 1) or the inverse-scaling constant (lemma 3).
    pub constants: Vec<f64>,
    /// Per-row admissible excess (lemma 1); empty for lemma 3.
    pub bounds: Vec<f64>,
    /// Least-squares order of the row quantity against `delta_h` (lemma 1) or `h` (lemma 3).
    pub fitted_order: Option<f64>,
    pub passed: bool,
}

/// Grid resolution for the gradient bound of [`lemma1_sweep`].
const GRADIENT_GRID: usize = 201;

/// Lemma 1 analogue. Each row's excess must stay below
/// `(|grad v|_inf delta_h + |T^k v - v|_inf) / sup |v|`: the polygon misses the
/// curve by at most `delta_h`, and the expansion differs from `v(eta)` by the
/// Taylor remainder. The bound is uniform in the sense that its constant does
/// not depend on the level.
pub fn lemma1_sweep(
    v: &dyn SmoothField,
    domain: &CurvedDomain,
    meshes: &[PolygonalMesh],
    k: usize,
) -> Result<StabilitySweep> {
    let r = domain.circumradius() * 1.05;
    let c = domain.centroid();
    let g = core::f64::consts::SQRT_2 * seminorm_w_inf(v, 1, c - Vec2::new(r, r), c + Vec2::new(r, r), GRADIENT_GRID);
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    let mut bounds = Vec::new();
    for mesh in meshes {
        let points = projected_points(mesh, domain, 2 * k + 2)?;
        let excess = lemma1_excess(v, mesh, &points, k);
        let remainder = lemma2_discrepancy(v, &points, k, 0)?;
        let sup = sup_on_mesh(mesh, |_, x| v.value(x));
        rows.push(LemmaRow {
            level: mesh.level,
            h: mesh.h,
            delta_h: mesh.delta_h,
            discrepancy: excess,
            usable: excess > DISCREPANCY_FLOOR,
        });
        constants.push(excess / mesh.delta_h);
        bounds.push((g * mesh.delta_h + remainder) / sup);
    }
    let fitted_order = match fit_rows(&rows) {
        RateStatus::Fitted(s) => Some(s),
        _ => None,
    };
    let passed = rows.iter().zip(&bounds).all(|(row, b)| row.discrepancy <= *b);
    Ok(StabilitySweep {
        k,
        rows,
        constants,
        bounds,
        fitted_order,
        passed,
    })
}

/// Lemma 3 analogue: the band of the interpolant's owner polynomial decays at
/// least like `h`, and its constant does not grow under refinement.
pub fn lemma3_sweep(
    v: &dyn SmoothField,
    domain: &CurvedDomain,
    meshes: &[PolygonalMesh],
    k: usize,
) -> Result<StabilitySweep> {
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    for mesh in meshes {
        let space = FeSpace::new(mesh, k)?;
        let points = projected_points(mesh, domain, 2 * k + 2)?;
        let (band, c) = lemma3_band(&space, v, &points);
        rows.push(LemmaRow {
            level: mesh.level,
            h: mesh.h,
            delta_h: mesh.delta_h,
            discrepancy: band,
            usable: band > DISCREPANCY_FLOOR,
        });
        constants.push(c);
    }
    let usable: Vec<&LemmaRow> = rows.iter().filter(|r| r.usable).collect();
    let fitted_order = (usable.len() >= 2).then(|| {
        let tail = &usable[usable.len().saturating_sub(MIN_USABLE_ROWS)..];
        let h: Vec<f64> = tail.iter().map(|r| r.h).collect();
        let d: Vec<f64> = tail.iter().map(|r| r.discrepancy).collect();
        fit_slope(&h, &d)
    });
    let first = constants.first().copied().unwrap_or(0.0);
    let bounded = constants.iter().all(|&c| c <= 1.1 * first);
    let passed = bounded && fitted_order.is_some_and(|s| s >= 1.0 - RATE_TOLERANCE);
    Ok(StabilitySweep {
        k,
        rows,
        constants,
        bounds: Vec::new(),
        fitted_order,
        passed,
    })
}
