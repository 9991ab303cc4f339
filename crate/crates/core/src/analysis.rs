//! Error norms over the polygonal domain and estimated orders of convergence.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::field::SmoothField;
use crate::point::Vec2;
use crate::quadrature::{make_quadrature, QuadratureKind};

/// Errors below this are treated as exact reproduction; rates are not computed.
pub const DEGENERATE_ERROR: f64 = 1e-13;

/// Number of trailing levels used by the least-squares slope.
pub const FIT_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// H1 seminorm.
    pub h1: f64,
    /// Sampled `max(|e|, |d_x e|, |d_y e|)`.
    pub w1inf: f64,
}

/// Quadrature exactness used for error integration: `2k + 4`.
pub fn error_degree(k: usize) -> usize {
    2 * k + 4
}

/// Errors of `coefficients` against `exact` on every triangle of the mesh.
pub fn error_norms(space: &FeSpace<'_>, coefficients: &[f64], exact: &dyn SmoothField) -> Result<ErrorNorms> {
    error_norms_with(
        space,
        coefficients,
        exact,
        error_degree(space.degree()),
        error_degree(space.degree()),
    )
}

/// As [`error_norms`] with explicit exactness for the integrals and for the
/// quadrature points that join the Lagrange nodes as W1inf samples.
pub fn error_norms_with(
    space: &FeSpace<'_>,
    coefficients: &[f64],
    exact: &dyn SmoothField,
    integration_degree: usize,
    sample_degree: usize,
) -> Result<ErrorNorms> {
    let rule = make_quadrature(QuadratureKind::Triangle, integration_degree)?;
    let samples = make_quadrature(QuadratureKind::Triangle, sample_degree)?;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut w = 0.0_f64;
    let pointwise = |t: usize, x: Vec2| {
        let (u, du) = space.evaluate(coefficients, t, x);
        (exact.value(x) - u, exact.gradient(x) - du)
    };
    for t in 0..space.n_elements() {
        let g = *space.geometry(t);
        let jac = g.det.abs();
        for (xref, wq) in rule.iter() {
            let (e, de) = pointwise(t, g.map(xref));
            l2 += wq * jac * e * e;
            h1 += wq * jac * de.norm_squared();
        }
        let nodes = (0..space.local_size()).map(|i| {
            let l = space.basis.node(i);
            Vec2::new(l[1], l[2])
        });
        for xref in samples.points.iter().copied().chain(nodes) {
            let (e, de) = pointwise(t, g.map(xref));
            w = w.max(e.abs()).max(de.max_abs());
        }
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
        w1inf: w,
    })
}

/// Pointwise value error and gradient error magnitude at every mesh vertex,
/// taking the largest over the triangles sharing the vertex.
pub fn vertex_errors(space: &FeSpace<'_>, coefficients: &[f64], exact: &dyn SmoothField) -> (Vec<f64>, Vec<f64>) {
    let nv = space.mesh.vertices.len();
    let mut value = alloc::vec![0.0_f64; nv];
    let mut gradient = alloc::vec![0.0_f64; nv];
    for (t, tri) in space.mesh.triangles.iter().enumerate() {
        for &v in tri {
            let x = space.mesh.vertices[v];
            let (u, du) = space.evaluate(coefficients, t, x);
            value[v] = (exact.value(x) - u).abs();
            gradient[v] = gradient[v].max((exact.gradient(x) - du).max_abs());
        }
    }
    (value, gradient)
}

/// Pairwise rates `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn pairwise_rates(h: &[f64], e: &[f64]) -> Vec<f64> {
    h.windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Per-pair rates and the least-squares slope over the last [`FIT_LEVELS`] levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub pairwise: Vec<f64>,
    pub fitted: f64,
}

/// Orders for one norm. Fails on fewer than two levels, on `h` not strictly
/// decreasing, and with [`Error::DegenerateErrors`] when any error is at the
/// round-off floor.
pub fn eoc(h: &[f64], e: &[f64]) -> Result<Rates> {
    if h.len() < 2 || h.len() != e.len() {
        return Err(Error::InvalidInput("at least two levels are required"));
    }
    if h.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("mesh sizes must strictly decrease"));
    }
    if e.iter().any(|&v| !(v > DEGENERATE_ERROR)) {
        return Err(Error::DegenerateErrors);
    }
    let start = h.len().saturating_sub(FIT_LEVELS);
    Ok(Rates {
        pairwise: pairwise_rates(h, e),
        fitted: fit_slope(&h[start..], &e[start..]),
    })
}

/// One level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub delta_h: f64,
    pub dofs: usize,
    pub errors: ErrorNorms,
    /// Rates against the previous record (`[L2, H1, W1inf]`), absent on the first level.
    pub eoc: Option<[f64; 3]>,
}

/// Fills in the per-pair rates of a record sequence.
pub fn attach_rates(records: &mut [ConvergenceRecord]) {
    for i in 1..records.len() {
        let (a, b) = (records[i - 1].errors, records[i].errors);
        let lh = (records[i - 1].h / records[i].h).ln();
        let rate = |x: f64, y: f64| {
            if x > DEGENERATE_ERROR && y > DEGENERATE_ERROR {
                (x / y).ln() / lh
            } else {
                f64::NAN
            }
        };
        records[i].eoc = Some([rate(a.l2, b.l2), rate(a.h1, b.h1), rate(a.w1inf, b.w1inf)]);
    }
}
