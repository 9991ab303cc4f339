//! Mesh sequences and convergence studies.

use alloc::vec::Vec;

use crate::analysis::{attach_rates, eoc, error_norms, ConvergenceRecord, ErrorNorms};
use crate::assembly::{assemble_system, Method};
use crate::error::{Error, Result};
use crate::fespace::FeSpace;
use crate::geometry::CurvedDomain;
use crate::mesh::PolygonalMesh;
use crate::problem::ProblemData;
use crate::solver::{solve, SolveReport, SolverKind};

/// Rate tolerance for the L2 and H1 slopes.
pub const L2_H1_TOLERANCE: f64 = 0.25;
/// Rate tolerance for the W1inf slope.
pub const W1INF_TOLERANCE: f64 = 0.3;
/// Errors at or below this on every level mark a study as exact.
pub const EXACT_ERROR: f64 = 1e-9;

/// Boundary vertex count of the coarsest mesh for each catalog domain.
pub fn default_boundary_count(domain: &CurvedDomain) -> usize {
    match domain {
        CurvedDomain::Disk { .. } => 8,
        CurvedDomain::Ellipse { .. } => 16,
        CurvedDomain::Star { .. } => 48,
    }
}

/// Levels `0..=finest` of the refinement sequence starting from `n_boundary` boundary vertices.
pub fn mesh_sequence(domain: &CurvedDomain, n_boundary: usize, finest: usize) -> Result<Vec<PolygonalMesh>> {
    let mut meshes = Vec::with_capacity(finest + 1);
    meshes.push(PolygonalMesh::generate(domain, n_boundary)?);
    for _ in 0..finest {
        let next = meshes.last().unwrap().refine(domain)?;
        meshes.push(next);
    }
    Ok(meshes)
}

/// Everything measured on one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub delta_h: f64,
    pub dofs: usize,
    pub errors: Option<ErrorNorms>,
    pub solve: SolveReport,
    /// `|boundary part|_inf / |volume part|_inf` of the assembled operator.
    pub perturbation_ratio: f64,
}

/// Assembles, solves and (for manufactured data) measures errors on one mesh.
pub fn run_level(
    mesh: &PolygonalMesh,
    domain: &CurvedDomain,
    data: &ProblemData,
    k: usize,
    method: Method,
    solver: SolverKind,
) -> Result<LevelResult> {
    let space = FeSpace::new(mesh, k)?;
    let system = assemble_system(&space, domain, data, method)?;
    let report = solve(&system.operator, &system.load, solver)?;
    let errors = match &data.exact {
        Some(u) => Some(error_norms(&space, &report.solution, &**u)?),
        None => None,
    };
    Ok(LevelResult {
        level: mesh.level,
        h: mesh.h,
        delta_h: mesh.delta_h,
        dofs: space.n_dofs(),
        errors,
        perturbation_ratio: system.boundary.norm_inf() / system.volume.norm_inf(),
        solve: report,
    })
}

/// Expected orders for a study of degree `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedOrders {
    /// `[k + s_min, k + 1]`: `s = 1` on convex domains, `s` in `(1/2, 1]` otherwise.
    pub l2: (f64, f64),
    pub h1: f64,
    pub w1inf: f64,
}

impl ExpectedOrders {
    pub fn new(k: usize, convex: bool) -> Self {
        let k = k as f64;
        Self {
            l2: (if convex { k + 1.0 } else { k + 0.5 }, k + 1.0),
            h1: k,
            w1inf: k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyStatus {
    Pass,
    Fail,
    /// Errors at round-off on every level; rates undefined.
    Exact,
}

impl StudyStatus {
    pub fn name(self) -> &'static str {
        match self {
            StudyStatus::Pass => "pass",
            StudyStatus::Fail => "fail",
            StudyStatus::Exact => "exact",
        }
    }
}

/// Fitted slopes `[L2, H1, W1inf]` with per-norm verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedOrders {
    pub slopes: [f64; 3],
    pub passed: [bool; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub method: Method,
    pub k: usize,
    pub expected: ExpectedOrders,
    pub records: Vec<ConvergenceRecord>,
    pub levels: Vec<LevelResult>,
    pub fitted: Option<FittedOrders>,
    pub status: StudyStatus,
}

/// Judges fitted slopes against the expected orders.
pub fn judge(slopes: [f64; 3], expected: &ExpectedOrders) -> [bool; 3] {
    let (lo, hi) = expected.l2;
    [
        slopes[0] >= lo - L2_H1_TOLERANCE && slopes[0] <= hi + L2_H1_TOLERANCE,
        (slopes[1] - expected.h1).abs() <= L2_H1_TOLERANCE,
        (slopes[2] - expected.w1inf).abs() <= W1INF_TOLERANCE,
    ]
}

/// Runs every mesh of `meshes` and fits the orders of the three error norms.
pub fn convergence_study(
    meshes: &[PolygonalMesh],
    domain: &CurvedDomain,
    data: &ProblemData,
    k: usize,
    method: Method,
    solver: SolverKind,
) -> Result<ConvergenceStudy> {
    if data.exact.is_none() {
        return Err(Error::MissingExact);
    }
    let mut levels = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        levels.push(run_level(mesh, domain, data, k, method, solver)?);
    }
    let mut records: Vec<ConvergenceRecord> = levels
        .iter()
        .map(|l| ConvergenceRecord {
            level: l.level,
            h: l.h,
            delta_h: l.delta_h,
            dofs: l.dofs,
            errors: l.errors.expect("manufactured data"),
            eoc: None,
        })
        .collect();
    attach_rates(&mut records);
    let expected = ExpectedOrders::new(k, domain.is_convex());
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let norms: [Vec<f64>; 3] = [
        records.iter().map(|r| r.errors.l2).collect(),
        records.iter().map(|r| r.errors.h1).collect(),
        records.iter().map(|r| r.errors.w1inf).collect(),
    ];
    let exact = norms.iter().all(|e| e.iter().all(|&v| v <= EXACT_ERROR));
    let mut fitted = None;
    let status = if exact {
        StudyStatus::Exact
    } else {
        let mut slopes = [f64::NAN; 3];
        let mut degenerate = false;
        for (s, e) in slopes.iter_mut().zip(&norms) {
            match eoc(&h, e) {
                Ok(r) => *s = r.fitted,
                Err(Error::DegenerateErrors) => degenerate = true,
                Err(other) => return Err(other),
            }
        }
        if degenerate {
            StudyStatus::Exact
        } else {
            let passed = judge(slopes, &expected);
            fitted = Some(FittedOrders { slopes, passed });
            if passed.iter().all(|&p| p) {
                StudyStatus::Pass
            } else {
                StudyStatus::Fail
            }
        }
    };
    Ok(ConvergenceStudy {
        method,
        k,
        expected,
        records,
        levels,
        fitted,
        status,
    })
}
