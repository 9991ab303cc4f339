//! Compressed sparse row matrices.

use alloc::vec::Vec;

use num_traits::Float;

/// Coordinate-format accumulator. Duplicates are summed in insertion order
/// when the matrix is built, so assembly is reproducible bit for bit.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, capacity: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable: equal keys keep insertion order
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = alloc::vec![0usize; self.n_rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        TripletBuilder::new(n_rows, n_cols).build()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&alloc::vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut b = TripletBuilder::new(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|i| vals[i]).unwrap_or(0.0)
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            y[r] = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * x[r];
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Sum of `self` and `other` (same shape).
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut b = TripletBuilder::with_capacity(self.n_rows, self.n_cols, self.nnz() + other.nnz());
        for (r, c, v) in self.iter().chain(other.iter()) {
            b.push(r, c, v);
        }
        b.build()
    }

    /// Induced infinity norm (largest absolute row sum).
    /// `P A P^T` for the ordering `perm[new] = old`.
    pub fn permute_symmetric(&self, perm: &[usize]) -> CsrMatrix {
        let mut inverse = alloc::vec![0usize; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut b = TripletBuilder::with_capacity(self.n_rows, self.n_cols, self.nnz());
        for (r, c, v) in self.iter() {
            b.push(inverse[r], inverse[c], v);
        }
        b.build()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    /// True when the stored pattern is symmetric (values may differ).
    pub fn is_structurally_symmetric(&self) -> bool {
        self.n_rows == self.n_cols
            && self.iter().all(|(r, c, _)| {
                let (cols, _) = self.row(c);
                cols.binary_search(&r).is_ok()
            })
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    /// Quadratic form `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.iter().map(|(r, c, v)| y[r] * v * x[c]).sum()
    }

    pub fn to_faer(&self) -> faer::sparse::SparseColMat<usize, f64> {
        let triplets: Vec<faer::sparse::Triplet<usize, usize, f64>> = self
            .iter()
            .map(|(r, c, v)| faer::sparse::Triplet::new(r, c, v))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.n_rows, self.n_cols, &triplets)
            .expect("valid CSR indices")
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
