//! The four subcommands. Each takes a validated configuration, writes its
//! files under `config.out` and returns the exit status it earned.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pefem_core::analysis::{error_norms, vertex_errors};
use pefem_core::assembly::assemble_system;
use pefem_core::fespace::FeSpace;
use pefem_core::field::SmoothField;
use pefem_core::geometry::CurvedDomain;
use pefem_core::mesh::PolygonalMesh;
use pefem_core::solver::solve;
use pefem_core::study::{convergence_study, mesh_sequence, StudyStatus};
use pefem_core::taylor::{lemma1_sweep, lemma2_rate_check, lemma3_sweep};
use pefem_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Purpose, RunConfig};
use crate::error::{CliError, ExitCode, Result};
use crate::report::*;
use crate::{meshio, mtx, vtk};

/// `(k, m)` pairs of the Taylor-extension rate check.
pub const LEMMA2_PAIRS: [(usize, usize); 5] = [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1)];
/// Random points of the pointwise spot check in `solve`.
pub const SPOT_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: ExitCode,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// The configured levels `start_level..=finest_level`.
pub fn configured_meshes(config: &RunConfig, domain: &CurvedDomain) -> Result<Vec<PolygonalMesh>> {
    let mut meshes = mesh_sequence(domain, config.n_boundary(domain), config.finest_level())?;
    Ok(meshes.split_off(config.start_level))
}

pub fn cmd_mesh(config: &RunConfig) -> Result<Outcome> {
    config.validate(Purpose::Mesh)?;
    let start = Instant::now();
    let domain = config.domain()?;
    prepare_output(&config.out)?;
    let meshes = configured_meshes(config, &domain)?;
    let mut files = Vec::new();
    let mut levels = Vec::new();
    for mesh in &meshes {
        let path = config.out.join(format!("mesh_level{}.txt", mesh.level));
        meshio::write(mesh, &path)?;
        levels.push(MeshLevel {
            level: mesh.level,
            file: file_name(&path),
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
            boundary_edges: mesh.boundary_edges.len(),
            h: mesh.h,
            delta_h: mesh.delta_h,
            delta_over_h2: mesh.delta_h / (mesh.h * mesh.h),
            min_angle: mesh.min_angle().1,
        });
        files.push(path);
    }
    let report = GeometryReport {
        provenance: Provenance::new(config),
        domain: (&domain).into(),
        n_boundary: config.n_boundary(&domain),
        levels,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            steps: Vec::new(),
        },
    };
    let path = config.out.join("geometry.json");
    write_json(&path, &report)?;
    files.push(path);
    let summary = report
        .levels
        .iter()
        .map(|l| {
            format!(
                "level {}: {} triangles, h {:.4e}, delta_h/h^2 {:.3}",
                l.level, l.triangles, l.h, l.delta_over_h2
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        code: ExitCode::Success,
        files,
        summary,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Also write the operator and load in Matrix Market format.
    pub export_matrix: bool,
}

fn vertex_values(space: &FeSpace<'_>, coefficients: &[f64]) -> Vec<f64> {
    let mesh = space.mesh;
    let mut out = vec![0.0; mesh.vertices.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            out[v] = space.evaluate(coefficients, t, mesh.vertices[v]).0;
        }
    }
    out
}

fn spot_check(space: &FeSpace<'_>, coefficients: &[f64], exact: &dyn SmoothField, seed: u64) -> SpotCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..SPOT_SAMPLES {
        let t = rng.random_range(0..space.n_elements());
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let s = r1.sqrt();
        let [a, b, c] = space.mesh.triangle_points(t);
        let x: Vec2 = a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2);
        worst = worst.max((space.evaluate(coefficients, t, x).0 - exact.value(x)).abs());
    }
    SpotCheck {
        seed,
        samples: SPOT_SAMPLES,
        max_error: worst,
    }
}

/// Solves on the finest configured level and exports the solution.
pub fn cmd_solve(config: &RunConfig, options: SolveOptions) -> Result<Outcome> {
    config.validate(Purpose::Solve)?;
    let domain = config.domain()?;
    let data = config.problem_data()?;
    let solver = config.solver_kind()?;
    prepare_output(&config.out)?;
    let mesh = configured_meshes(config, &domain)?.pop().expect("at least one level");
    let space = FeSpace::new(&mesh, config.degree)?;
    let mut blocks = Vec::new();
    let mut files = Vec::new();
    for method in config.method.methods() {
        let mut timing = Timing::default();
        let clock = Instant::now();
        let system = assemble_system(&space, &domain, &data, method)?;
        timing.steps.push(("assembly".into(), clock.elapsed().as_secs_f64()));
        let t = Instant::now();
        let report = solve(&system.operator, &system.load, solver)?;
        timing.steps.push(("solve".into(), t.elapsed().as_secs_f64()));
        let u_h = vertex_values(&space, &report.solution);
        let mut block_files = Vec::new();
        let (errors, max_vertex_error, spot) = match &data.exact {
            Some(u) => {
                let norms = error_norms(&space, &report.solution, &**u)?;
                let (pointwise, _) = vertex_errors(&space, &report.solution, &**u);
                let vtk_path = config.out.join(format!("solution_{}.vtk", method.name()));
                let title = format!(
                    "{} {} k={} level {} {}",
                    domain.name(),
                    data.name,
                    config.degree,
                    mesh.level,
                    method.name()
                );
                vtk::write(
                    &vtk_path,
                    &mesh,
                    &title,
                    &[
                        vtk::PointScalars {
                            name: "u_h",
                            values: &u_h,
                        },
                        vtk::PointScalars {
                            name: "error",
                            values: &pointwise,
                        },
                    ],
                )?;
                block_files.push(vtk_path);
                let max = pointwise.iter().copied().fold(0.0, f64::max);
                (
                    Some(norms.into()),
                    Some(max),
                    Some(spot_check(&space, &report.solution, &**u, config.seed)),
                )
            }
            None => {
                let vtk_path = config.out.join(format!("solution_{}.vtk", method.name()));
                vtk::write(
                    &vtk_path,
                    &mesh,
                    &data.name,
                    &[vtk::PointScalars {
                        name: "u_h",
                        values: &u_h,
                    }],
                )?;
                block_files.push(vtk_path);
                (None, None, None)
            }
        };
        if options.export_matrix {
            let a = config.out.join(format!("operator_{}.mtx", method.name()));
            let b = config.out.join(format!("load_{}.mtx", method.name()));
            mtx::write_matrix(&a, &system.operator)?;
            mtx::write_vector(&b, &system.load)?;
            block_files.extend([a, b]);
        }
        timing.total_seconds = clock.elapsed().as_secs_f64();
        blocks.push(SolveBlock {
            method: method.name(),
            level: mesh.level,
            h: mesh.h,
            delta_h: mesh.delta_h,
            dofs: space.n_dofs(),
            solver: SolverSummary {
                kind: report.method.name(),
                relative_residual: report.relative_residual,
                iterations: report.iterations,
                refinement_steps: report.refinement_steps,
            },
            errors,
            max_vertex_error,
            spot_check: spot,
            files: block_files.iter().map(|p| file_name(p)).collect(),
            timing,
        });
        files.extend(block_files);
    }
    let report = SolveReportJson {
        provenance: Provenance::new(config),
        domain: (&domain).into(),
        problem: data.name.clone(),
        degree: config.degree,
        solves: blocks,
    };
    let path = config.out.join("solve_report.json");
    write_json(&path, &report)?;
    files.push(path);
    let summary = report
        .solves
        .iter()
        .map(|b| match b.errors {
            Some(e) => format!(
                "{}: {} dofs, residual {:.2e}, L2 {:.4e}, H1 {:.4e}, W1inf {:.4e}",
                b.method, b.dofs, b.solver.relative_residual, e.l2, e.h1, e.w1inf
            ),
            None => format!(
                "{}: {} dofs, residual {:.2e}",
                b.method, b.dofs, b.solver.relative_residual
            ),
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        code: ExitCode::Success,
        files,
        summary,
    })
}

/// Convergence study over the configured levels, one block per method on shared meshes.
pub fn cmd_convergence(config: &RunConfig) -> Result<Outcome> {
    config.validate(Purpose::Study)?;
    let domain = config.domain()?;
    let data = config.problem_data()?;
    let solver = config.solver_kind()?;
    prepare_output(&config.out)?;
    let meshes = configured_meshes(config, &domain)?;
    let mut blocks = Vec::new();
    let mut files = Vec::new();
    let mut passed = true;
    let mut summary = Vec::new();
    for method in config.method.methods() {
        let clock = Instant::now();
        let study = convergence_study(&meshes, &domain, &data, config.degree, method, solver)?;
        let timing = Timing {
            total_seconds: clock.elapsed().as_secs_f64(),
            steps: Vec::new(),
        };
        let csv = config.out.join(format!("convergence_{}.csv", method.name()));
        write_convergence_csv(&csv, &study.records)?;
        passed &= matches!(study.status, StudyStatus::Pass | StudyStatus::Exact);
        summary.push(match study.fitted {
            Some(f) => format!(
                "{}: slopes L2 {:.3} H1 {:.3} W1inf {:.3} -> {}",
                method.name(),
                f.slopes[0],
                f.slopes[1],
                f.slopes[2],
                study.status.name()
            ),
            None => format!("{}: {}", method.name(), study.status.name()),
        });
        blocks.push(StudyBlock::new(&study, file_name(&csv), timing));
        files.push(csv);
    }
    let report = ConvergenceReportJson {
        provenance: Provenance::new(config),
        domain: (&domain).into(),
        problem: data.name.clone(),
        degree: config.degree,
        studies: blocks,
        passed,
    };
    let path = config.out.join("convergence.json");
    write_json(&path, &report)?;
    files.push(path);
    Ok(Outcome {
        code: if passed {
            ExitCode::Success
        } else {
            ExitCode::CheckFailed
        },
        files,
        summary: summary.join("\n"),
    })
}

/// Taylor-extension rate checks and the two stability sweeps, on the exact
/// solution of the configured problem.
pub fn cmd_lemma_check(config: &RunConfig) -> Result<Outcome> {
    config.validate(Purpose::Study)?;
    let clock = Instant::now();
    let domain = config.domain()?;
    let data = config.problem_data()?;
    let field = data.exact.clone().ok_or(pefem_core::Error::MissingExact)?;
    prepare_output(&config.out)?;
    let meshes = configured_meshes(config, &domain)?;
    let checks = LEMMA2_PAIRS
        .iter()
        .map(|&(k, m)| lemma2_rate_check(&*field, &domain, &meshes, k, m))
        .collect::<pefem_core::Result<Vec<_>>>()?;
    let one = lemma1_sweep(&*field, &domain, &meshes, config.degree)?;
    let three = lemma3_sweep(&*field, &domain, &meshes, config.degree)?;
    let paths = ["lemma1.csv", "lemma2.csv", "lemma3.csv"].map(|n| config.out.join(n));
    write_sweep_csv(&paths[0], &one)?;
    write_rate_checks_csv(&paths[1], &checks)?;
    write_sweep_csv(&paths[2], &three)?;
    let passed = checks.iter().all(|c| c.passed());
    let report = LemmaReportJson {
        provenance: Provenance::new(config),
        domain: (&domain).into(),
        field: data.name.clone(),
        lemma1: (&one).into(),
        lemma2: checks.iter().map(RateCheckJson::from).collect(),
        lemma3: (&three).into(),
        passed,
        files: paths.iter().map(|p| file_name(p)).collect(),
        timing: Timing {
            total_seconds: clock.elapsed().as_secs_f64(),
            steps: Vec::new(),
        },
    };
    let path = config.out.join("lemma_report.json");
    write_json(&path, &report)?;
    let mut summary: Vec<String> = report
        .lemma2
        .iter()
        .map(|c| match c.fitted_order {
            Some(o) => format!("(k,m)=({},{}): order {:.3}, expected {}", c.k, c.m, o, c.expected),
            None => format!("(k,m)=({},{}): {}", c.k, c.m, c.status),
        })
        .collect();
    summary.push(format!(
        "stability sweeps (k={}): lemma1 {}, lemma3 {}",
        config.degree, one.passed, three.passed
    ));
    let mut files = paths.to_vec();
    files.push(path);
    Ok(Outcome {
        code: if passed {
            ExitCode::Success
        } else {
            ExitCode::CheckFailed
        },
        files,
        summary: summary.join("\n"),
    })
}
