//! Legacy ASCII VTK output: POLYDATA triangles with per-vertex scalars.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pefem_core::mesh::PolygonalMesh;

use crate::error::{CliError, Result};
use crate::meshio::real;

/// A named per-vertex scalar field.
pub struct PointScalars<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
}

pub fn to_string(mesh: &PolygonalMesh, title: &str, scalars: &[PointScalars<'_>]) -> String {
    let nv = mesh.vertices.len();
    let nt = mesh.triangles.len();
    let mut s = String::new();
    writeln!(s, "# vtk DataFile Version 3.0").unwrap();
    // the title line is limited to 256 characters and may not contain newlines
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(s, "{title}").unwrap();
    writeln!(s, "ASCII").unwrap();
    writeln!(s, "DATASET POLYDATA").unwrap();
    writeln!(s, "POINTS {nv} double").unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {} 0", real(v.x), real(v.y)).unwrap();
    }
    writeln!(s, "POLYGONS {nt} {}", 4 * nt).unwrap();
    for [a, b, c] in &mesh.triangles {
        writeln!(s, "3 {a} {b} {c}").unwrap();
    }
    if !scalars.is_empty() {
        writeln!(s, "POINT_DATA {nv}").unwrap();
    }
    for field in scalars {
        assert_eq!(field.values.len(), nv, "field `{}` is not per vertex", field.name);
        writeln!(s, "SCALARS {} double 1", field.name).unwrap();
        writeln!(s, "LOOKUP_TABLE default").unwrap();
        for v in field.values {
            writeln!(s, "{}", real(*v)).unwrap();
        }
    }
    s
}

pub fn write(path: &Path, mesh: &PolygonalMesh, title: &str, scalars: &[PointScalars<'_>]) -> Result<()> {
    fs::write(path, to_string(mesh, title, scalars)).map_err(|e| CliError::io(path, e))
}

/// Reads back the values of the scalar field `name` from a file written by [`to_string`].
pub fn read_scalars(text: &str, name: &str) -> Option<Vec<f64>> {
    let mut lines = text.lines();
    let n: usize = lines
        .by_ref()
        .find_map(|l| l.strip_prefix("POINT_DATA "))?
        .trim()
        .parse()
        .ok()?;
    let header = format!("SCALARS {name} ");
    lines.by_ref().find(|l| l.starts_with(&header))?;
    lines.next()?;
    lines.take(n).map(|l| l.trim().parse().ok()).collect()
}
