//! Plain-text mesh files.
//!
//! ```text
//! pefem-mesh v1
//! vertices N
//! x y            (N lines)
//! triangles M
//! i j k          (M lines, counterclockwise)
//! boundary_edges B
//! i j t_i t_j    (B lines: endpoint vertices and their curve parameters)
//! ```
//!
//! Reals are written with 17 significant digits, so a write/read round trip
//! reproduces every coordinate exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::SplitWhitespace;

use pefem_core::geometry::CurvedDomain;
use pefem_core::mesh::PolygonalMesh;
use pefem_core::Vec2;

use crate::error::{CliError, Result};

pub const HEADER: &str = "pefem-mesh v1";

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_string(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "vertices {}", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{} {}", real(v.x), real(v.y)).unwrap();
    }
    writeln!(s, "triangles {}", mesh.triangles.len()).unwrap();
    for [a, b, c] in &mesh.triangles {
        writeln!(s, "{a} {b} {c}").unwrap();
    }
    writeln!(s, "boundary_edges {}", mesh.boundary_edges.len()).unwrap();
    for e in &mesh.boundary_edges {
        writeln!(
            s,
            "{} {} {} {}",
            e.vertices[0],
            e.vertices[1],
            real(e.params[0]),
            real(e.params[1])
        )
        .unwrap();
    }
    s
}

pub fn write(mesh: &PolygonalMesh, path: &Path) -> Result<()> {
    fs::write(path, to_string(mesh)).map_err(|e| CliError::io(path, e))
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn error(&self, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next_line(&mut self) -> Result<SplitWhitespace<'a>> {
        loop {
            let Some((i, text)) = self.inner.next() else {
                self.line += 1;
                return Err(self.error("unexpected end of file"));
            };
            self.line = i + 1;
            if !text.trim().is_empty() {
                return Ok(text.split_whitespace());
            }
        }
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let mut words = self.next_line()?;
        if words.next() != Some(name) {
            return Err(self.error(format!("expected `{name} <count>`")));
        }
        let n = self.field::<usize>(&mut words)?;
        self.finish(words)?;
        Ok(n)
    }

    fn field<T: std::str::FromStr>(&self, words: &mut SplitWhitespace<'_>) -> Result<T> {
        let w = words.next().ok_or_else(|| self.error("missing field"))?;
        w.parse().map_err(|_| self.error(format!("cannot parse `{w}`")))
    }

    fn finish(&self, mut words: SplitWhitespace<'_>) -> Result<()> {
        match words.next() {
            None => Ok(()),
            Some(w) => Err(self.error(format!("unexpected trailing field `{w}`"))),
        }
    }
}

/// Parses a mesh file and re-validates it against `domain`.
///
/// The format does not record the refinement level; the caller supplies it.
pub fn parse(text: &str, path: &Path, domain: &CurvedDomain, level: usize) -> Result<PolygonalMesh> {
    let mut lines = Lines {
        path,
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next_line()?.collect::<Vec<_>>().join(" ");
    if header != HEADER {
        return Err(lines.error(format!("expected header `{HEADER}`")));
    }
    let n = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w = lines.next_line()?;
        let x = lines.field(&mut w)?;
        let y = lines.field(&mut w)?;
        lines.finish(w)?;
        vertices.push(Vec2::new(x, y));
    }
    let m = lines.section("triangles")?;
    let mut triangles = Vec::with_capacity(m);
    for _ in 0..m {
        let mut w = lines.next_line()?;
        let t = [lines.field(&mut w)?, lines.field(&mut w)?, lines.field(&mut w)?];
        lines.finish(w)?;
        triangles.push(t);
    }
    let b = lines.section("boundary_edges")?;
    let mut boundary = Vec::with_capacity(b);
    for _ in 0..b {
        let mut w = lines.next_line()?;
        let ij = [lines.field(&mut w)?, lines.field(&mut w)?];
        let t = [lines.field(&mut w)?, lines.field(&mut w)?];
        lines.finish(w)?;
        boundary.push((ij, t));
    }
    if let Ok(mut w) = lines.next_line() {
        let extra = w.next().unwrap_or_default().to_string();
        return Err(lines.error(format!("unexpected content `{extra}` after the boundary edges")));
    }
    Ok(PolygonalMesh::from_parts(
        vertices, triangles, &boundary, domain, level,
    )?)
}

pub fn read(path: &Path, domain: &CurvedDomain, level: usize) -> Result<PolygonalMesh> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path, domain, level)
}
