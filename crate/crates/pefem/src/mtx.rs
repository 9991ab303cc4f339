//! Matrix Market export of assembled systems, for inspection in other tools.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use pefem_core::sparse::CsrMatrix;

use crate::error::{CliError, Result};
use crate::meshio::real;

/// `coordinate real general`, one-based indices, rows in order.
pub fn matrix_to_string(a: &CsrMatrix) -> String {
    let mut s = String::new();
    writeln!(s, "%%MatrixMarket matrix coordinate real general").unwrap();
    writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz()).unwrap();
    for (r, c, v) in a.iter() {
        writeln!(s, "{} {} {}", r + 1, c + 1, real(v)).unwrap();
    }
    s
}

/// `array real general` column vector.
pub fn vector_to_string(b: &[f64]) -> String {
    let mut s = String::new();
    writeln!(s, "%%MatrixMarket matrix array real general").unwrap();
    writeln!(s, "{} 1", b.len()).unwrap();
    for v in b {
        writeln!(s, "{}", real(*v)).unwrap();
    }
    s
}

pub fn write_matrix(path: &Path, a: &CsrMatrix) -> Result<()> {
    fs::write(path, matrix_to_string(a)).map_err(|e| CliError::io(path, e))
}

pub fn write_vector(path: &Path, b: &[f64]) -> Result<()> {
    fs::write(path, vector_to_string(b)).map_err(|e| CliError::io(path, e))
}
