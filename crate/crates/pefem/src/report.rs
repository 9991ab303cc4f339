//! JSON reports and CSV tables.
//!
//! Wall-clock measurements only ever appear under keys named `timing`;
//! [`strip_timing`] removes them so that two runs can be compared.

use std::fs;
use std::path::Path;

use pefem_core::analysis::{ConvergenceRecord, ErrorNorms};
use pefem_core::geometry::CurvedDomain;
use pefem_core::study::{ConvergenceStudy, L2_H1_TOLERANCE, W1INF_TOLERANCE};
use pefem_core::taylor::{LemmaRow, RateCheck, RateStatus, StabilitySweep};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const TIMING_KEY: &str = "timing";

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub config_hash: String,
    pub config: RunConfig,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            version: crate::VERSION,
            config_hash: config.hash(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainInfo {
    pub name: &'static str,
    pub params: Vec<f64>,
    pub convex: bool,
}

impl From<&CurvedDomain> for DomainInfo {
    fn from(d: &CurvedDomain) -> Self {
        Self {
            name: d.name(),
            params: d.params(),
            convex: d.is_convex(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshLevel {
    pub level: usize,
    pub file: String,
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub h: f64,
    pub delta_h: f64,
    pub delta_over_h2: f64,
    /// Smallest interior angle in degrees.
    pub min_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub provenance: Provenance,
    pub domain: DomainInfo,
    pub n_boundary: usize,
    pub levels: Vec<MeshLevel>,
    pub timing: Timing,
}

/// Seconds spent per step, in run order.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub steps: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "W1inf")]
    pub w1inf: f64,
}

impl From<ErrorNorms> for Norms {
    fn from(e: ErrorNorms) -> Self {
        Self {
            l2: e.l2,
            h1: e.h1,
            w1inf: e.w1inf,
        }
    }
}

impl From<[f64; 3]> for Norms {
    fn from(v: [f64; 3]) -> Self {
        Self {
            l2: v[0],
            h1: v[1],
            w1inf: v[2],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Verdicts {
    #[serde(rename = "L2")]
    pub l2: bool,
    #[serde(rename = "H1")]
    pub h1: bool,
    #[serde(rename = "W1inf")]
    pub w1inf: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub kind: &'static str,
    pub relative_residual: f64,
    pub iterations: usize,
    pub refinement_steps: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub seed: u64,
    pub samples: usize,
    pub max_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveBlock {
    pub method: &'static str,
    pub level: usize,
    pub h: f64,
    pub delta_h: f64,
    pub dofs: usize,
    pub solver: SolverSummary,
    pub errors: Option<Norms>,
    /// Largest value of the exported pointwise error field.
    pub max_vertex_error: Option<f64>,
    pub spot_check: Option<SpotCheck>,
    pub files: Vec<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReportJson {
    pub provenance: Provenance,
    pub domain: DomainInfo,
    pub problem: String,
    pub degree: usize,
    pub solves: Vec<SolveBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub h: f64,
    pub delta_h: f64,
    pub delta_over_h2: f64,
    pub dofs: usize,
    pub errors: Norms,
    pub eoc: Option<Norms>,
    pub solver: SolverSummary,
    /// `|boundary operator|_inf / |volume operator|_inf`.
    pub perturbation_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Expected {
    #[serde(rename = "L2")]
    pub l2: (f64, f64),
    #[serde(rename = "H1")]
    pub h1: f64,
    #[serde(rename = "W1inf")]
    pub w1inf: f64,
    pub tolerance_l2_h1: f64,
    pub tolerance_w1inf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyBlock {
    pub method: &'static str,
    pub expected: Expected,
    pub records: Vec<LevelRecord>,
    pub fitted: Option<Norms>,
    pub passed: Option<Verdicts>,
    pub status: &'static str,
    pub csv: String,
    pub timing: Timing,
}

impl StudyBlock {
    pub fn new(study: &ConvergenceStudy, csv: String, timing: Timing) -> Self {
        let records = study
            .records
            .iter()
            .zip(&study.levels)
            .map(|(r, l)| LevelRecord {
                level: r.level,
                h: r.h,
                delta_h: r.delta_h,
                delta_over_h2: r.delta_h / (r.h * r.h),
                dofs: r.dofs,
                errors: r.errors.into(),
                eoc: r.eoc.map(Norms::from),
                solver: SolverSummary {
                    kind: l.solve.method.name(),
                    relative_residual: l.solve.relative_residual,
                    iterations: l.solve.iterations,
                    refinement_steps: l.solve.refinement_steps,
                },
                perturbation_ratio: l.perturbation_ratio,
            })
            .collect();
        Self {
            method: study.method.name(),
            expected: Expected {
                l2: study.expected.l2,
                h1: study.expected.h1,
                w1inf: study.expected.w1inf,
                tolerance_l2_h1: L2_H1_TOLERANCE,
                tolerance_w1inf: W1INF_TOLERANCE,
            },
            records,
            fitted: study.fitted.map(|f| f.slopes.into()),
            passed: study.fitted.map(|f| Verdicts {
                l2: f.passed[0],
                h1: f.passed[1],
                w1inf: f.passed[2],
            }),
            status: study.status.name(),
            csv,
            timing,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReportJson {
    pub provenance: Provenance,
    pub domain: DomainInfo,
    pub problem: String,
    pub degree: usize,
    pub studies: Vec<StudyBlock>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateCheckJson {
    pub k: usize,
    pub m: usize,
    pub expected: f64,
    pub status: &'static str,
    pub fitted_order: Option<f64>,
    pub usable_rows: usize,
    pub passed: bool,
}

impl From<&RateCheck> for RateCheckJson {
    fn from(c: &RateCheck) -> Self {
        Self {
            k: c.k,
            m: c.m,
            expected: c.expected,
            status: status_name(c.status),
            fitted_order: c.fitted_order(),
            usable_rows: c.rows.iter().filter(|r| r.usable).count(),
            passed: c.passed(),
        }
    }
}

pub fn status_name(s: RateStatus) -> &'static str {
    match s {
        RateStatus::Fitted(_) => "fitted",
        RateStatus::Exact => "exact",
        RateStatus::Insufficient => "insufficient_resolution",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepJson {
    pub k: usize,
    pub fitted_order: Option<f64>,
    pub constants: Vec<f64>,
    pub bounds: Vec<f64>,
    pub passed: bool,
}

impl From<&StabilitySweep> for SweepJson {
    fn from(s: &StabilitySweep) -> Self {
        Self {
            k: s.k,
            fitted_order: s.fitted_order,
            constants: s.constants.clone(),
            bounds: s.bounds.clone(),
            passed: s.passed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReportJson {
    pub provenance: Provenance,
    pub domain: DomainInfo,
    pub field: String,
    pub lemma1: SweepJson,
    pub lemma2: Vec<RateCheckJson>,
    pub lemma3: SweepJson,
    pub passed: bool,
    pub files: Vec<String>,
    pub timing: Timing,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Removes every `timing` member, at any depth.
pub fn strip_timing(value: &mut Value) {
    match value {
        Value::Object(map) => {
            map.remove(TIMING_KEY);
            map.values_mut().for_each(strip_timing);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

/// Shortest round-trip form; blank for non-finite values.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::usage(format!("{}: {other:?}", path.display())),
    }
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub const CONVERGENCE_COLUMNS: [&str; 10] = [
    "level",
    "h",
    "delta_h",
    "dofs",
    "err_L2",
    "err_H1",
    "err_W1inf",
    "eoc_L2",
    "eoc_H1",
    "eoc_W1inf",
];

pub fn write_convergence_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        let eoc = r.eoc.unwrap_or([f64::NAN; 3]);
        vec![
            r.level.to_string(),
            cell(r.h),
            cell(r.delta_h),
            r.dofs.to_string(),
            cell(r.errors.l2),
            cell(r.errors.h1),
            cell(r.errors.w1inf),
            cell(eoc[0]),
            cell(eoc[1]),
            cell(eoc[2]),
        ]
    });
    write_table(path, &CONVERGENCE_COLUMNS, rows)
}

pub const LEMMA_COLUMNS: [&str; 5] = ["level", "h", "delta_h", "discrepancy", "fitted_order"];

fn lemma_row(r: &LemmaRow, order: Option<f64>) -> Vec<String> {
    vec![
        r.level.to_string(),
        cell(r.h),
        cell(r.delta_h),
        cell(r.discrepancy),
        order.map(cell).unwrap_or_default(),
    ]
}

/// One row per level; `fitted_order` repeats the sweep's order.
pub fn write_sweep_csv(path: &Path, sweep: &StabilitySweep) -> Result<()> {
    write_table(
        path,
        &LEMMA_COLUMNS,
        sweep.rows.iter().map(|r| lemma_row(r, sweep.fitted_order)),
    )
}

/// The five `(k, m)` checks stacked, with `k` and `m` in front.
pub fn write_rate_checks_csv(path: &Path, checks: &[RateCheck]) -> Result<()> {
    let mut header = vec!["k", "m"];
    header.extend(LEMMA_COLUMNS);
    let rows = checks.iter().flat_map(|c| {
        c.rows.iter().map(move |r| {
            let mut row = vec![c.k.to_string(), c.m.to_string()];
            row.extend(lemma_row(r, c.fitted_order()));
            row
        })
    });
    write_table(path, &header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells() {
        assert_eq!(cell(0.25), "2.5e-1");
        assert_eq!(cell(f64::NAN), "");
        assert_eq!(cell(3.0), "3e0");
    }

    #[test]
    fn timing_is_stripped_at_every_depth() {
        let mut v: Value = serde_json::from_str(r#"{"a": 1, "timing": 2, "b": [{"timing": 3, "c": 4}]}"#).unwrap();
        strip_timing(&mut v);
        assert_eq!(v.to_string(), r#"{"a":1,"b":[{"c":4}]}"#);
    }
}
