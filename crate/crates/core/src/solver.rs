//! Nonsymmetric sparse solvers: sparse LU and preconditioned restarted GMRES.

use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::Mat;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

/// Residual required of every accepted solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const GMRES_RESTART: usize = 50;
pub const GMRES_TOLERANCE: f64 = 1e-11;
pub const GMRES_MAX_ITERATIONS: usize = 10_000;
const MAX_REFINEMENT_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Direct,
    Iterative,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Direct => "direct",
            SolverKind::Iterative => "iterative",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "direct" | "lu" => Some(SolverKind::Direct),
            "iterative" | "gmres" => Some(SolverKind::Iterative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `|Ax - b| / |b|`
    pub relative_residual: f64,
    pub method: SolverKind,
    /// GMRES iterations (zero for the direct path).
    pub iterations: usize,
    /// Iterative-refinement sweeps after the LU solve; a proxy for pivot health.
    pub refinement_steps: usize,
    /// Filled in by callers that own a clock.
    pub wall_time: Option<core::time::Duration>,
}

/// `|Ax - b| / |b|` (or `|Ax|` when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = residual(a, x, b);
    let nb = norm2(b);
    if nb > 0.0 {
        norm2(&r) / nb
    } else {
        norm2(&r)
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mut r = alloc::vec![0.0; b.len()];
    a.mul_vec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

/// Sparse LU factorization of a square matrix.
pub struct LuFactors {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl LuFactors {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::InvalidInput("matrix must be square"));
        }
        let lu = a
            .to_faer()
            .sp_lu()
            .map_err(|_| Error::SingularSystem("sparse LU failed"))?;
        Ok(Self { lu, n: a.n_rows() })
    }

    fn apply(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = if transpose {
            self.lu.solve_transpose(&rhs)
        } else {
            self.lu.solve(&rhs)
        };
        let x: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::SingularSystem("zero pivot in LU factors"))
        }
    }

    /// `A^-1 b`
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.apply(b, false)
    }

    /// `A^-T b`
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.apply(b, true)
    }
}

/// Solves `a x = b` with the chosen method.
pub fn solve(a: &CsrMatrix, b: &[f64], kind: SolverKind) -> Result<SolveReport> {
    match kind {
        SolverKind::Direct => solve_direct(a, b),
        SolverKind::Iterative => solve_gmres(a, b),
    }
}

/// LU solve followed by iterative refinement until the residual stops improving.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<SolveReport> {
    let lu = LuFactors::new(a)?;
    let mut x = lu.solve(b)?;
    let mut res = relative_residual(a, &x, b);
    let mut steps = 0;
    while steps < MAX_REFINEMENT_STEPS && res > 1e-15 {
        let r = residual(a, &x, b);
        let dx = lu.solve(&r)?;
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(u, d)| u + d).collect();
        let cres = relative_residual(a, &candidate, b);
        if !(cres < res) {
            break;
        }
        x = candidate;
        res = cres;
        steps += 1;
    }
    if !(res <= RESIDUAL_TOLERANCE) {
        return Err(Error::SingularSystem("LU residual above tolerance"));
    }
    Ok(SolveReport {
        solution: x,
        relative_residual: res,
        method: SolverKind::Direct,
        iterations: 0,
        refinement_steps: steps,
        wall_time: None,
    })
}

/// Right preconditioner for GMRES.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    Jacobi,
    /// Incomplete LU with the sparsity pattern of the matrix.
    Ilu0,
}

impl Preconditioner {
    pub fn name(self) -> &'static str {
        match self {
            Preconditioner::Jacobi => "jacobi",
            Preconditioner::Ilu0 => "ilu0",
        }
    }
}

/// Preconditioner used by [`SolverKind::Iterative`].
pub const DEFAULT_PRECONDITIONER: Preconditioner = Preconditioner::Ilu0;

/// ILU(0) factors stored in the pattern of the source matrix: strict lower part
/// holds `L` (unit diagonal implied), the rest holds `U`.
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(a.nnz());
        let mut values = Vec::with_capacity(a.nnz());
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for r in 0..n {
            let (cols, vals) = a.row(r);
            let d = cols
                .binary_search(&r)
                .map_err(|_| Error::SingularSystem("zero diagonal entry"))?;
            diag.push(row_ptr[r] + d);
            col_idx.extend_from_slice(cols);
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
        let mut position = alloc::vec![usize::MAX; n];
        for i in 0..n {
            let row = row_ptr[i]..row_ptr[i + 1];
            for p in row.clone() {
                position[col_idx[p]] = p;
            }
            for p in row_ptr[i]..diag[i] {
                let k = col_idx[p];
                let pivot = values[diag[k]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return Err(Error::SingularSystem("zero pivot in incomplete LU"));
                }
                let lik = values[p] / pivot;
                values[p] = lik;
                for q in diag[k] + 1..row_ptr[k + 1] {
                    let slot = position[col_idx[q]];
                    if slot != usize::MAX {
                        values[slot] -= lik * values[q];
                    }
                }
            }
            for p in row {
                position[col_idx[p]] = usize::MAX;
            }
            let u = values[diag[i]];
            if u == 0.0 || !u.is_finite() {
                return Err(Error::SingularSystem("zero pivot in incomplete LU"));
            }
        }
        Ok(Self {
            row_ptr,
            col_idx,
            values,
            diag,
        })
    }

    /// `out = (LU)^-1 b`
    pub fn apply(&self, b: &[f64], out: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut s = b[i];
            for p in self.row_ptr[i]..self.diag[i] {
                s -= self.values[p] * out[self.col_idx[p]];
            }
            out[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = out[i];
            for p in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.values[p] * out[self.col_idx[p]];
            }
            out[i] = s / self.values[self.diag[i]];
        }
    }
}

enum Precond {
    Jacobi(Vec<f64>),
    Ilu0(Ilu0),
}

impl Precond {
    fn new(a: &CsrMatrix, kind: Preconditioner) -> Result<Self> {
        Ok(match kind {
            Preconditioner::Jacobi => {
                let diag = a.diagonal();
                if diag.iter().any(|d| *d == 0.0 || !d.is_finite()) {
                    return Err(Error::SingularSystem("zero diagonal entry"));
                }
                Precond::Jacobi(diag.iter().map(|d| 1.0 / d).collect())
            }
            Preconditioner::Ilu0 => Precond::Ilu0(Ilu0::new(a)?),
        })
    }

    fn apply(&self, b: &[f64], out: &mut [f64]) {
        match self {
            Precond::Jacobi(inv) => {
                for ((o, x), d) in out.iter_mut().zip(b).zip(inv) {
                    *o = x * d;
                }
            }
            Precond::Ilu0(f) => f.apply(b, out),
        }
    }
}

/// Restarted GMRES with the default right preconditioner.
pub fn solve_gmres(a: &CsrMatrix, b: &[f64]) -> Result<SolveReport> {
    solve_gmres_with(a, b, DEFAULT_PRECONDITIONER)
}

pub fn solve_gmres_with(a: &CsrMatrix, b: &[f64], preconditioner: Preconditioner) -> Result<SolveReport> {
    if a.n_rows() != a.n_cols() || a.n_rows() != b.len() {
        return Err(Error::InvalidInput("dimension mismatch"));
    }
    // incomplete factors are far better in a bandwidth-reducing order
    let perm = match preconditioner {
        Preconditioner::Ilu0 => Some(reverse_cuthill_mckee(a)),
        Preconditioner::Jacobi => None,
    };
    let permuted = perm
        .as_ref()
        .map(|p| (a.permute_symmetric(p), p.iter().map(|&i| b[i]).collect::<Vec<f64>>()));
    let (pa, pb) = match &permuted {
        Some((pa, pb)) => (pa, pb.as_slice()),
        None => (a, b),
    };
    let m = Precond::new(pa, preconditioner)?;
    let (y, iterations) = gmres(
        pa,
        pb,
        &|v, out| m.apply(v, out),
        GMRES_RESTART,
        GMRES_TOLERANCE,
        GMRES_MAX_ITERATIONS,
    )?;
    let x = match &perm {
        Some(p) => {
            let mut x = alloc::vec![0.0; y.len()];
            for (new, &old) in p.iter().enumerate() {
                x[old] = y[new];
            }
            x
        }
        None => y,
    };
    let res = relative_residual(a, &x, b);
    if !(res <= RESIDUAL_TOLERANCE) {
        return Err(Error::NoConvergence {
            iterations,
            residual: res,
        });
    }
    Ok(SolveReport {
        solution: x,
        relative_residual: res,
        method: SolverKind::Iterative,
        iterations,
        refinement_steps: 0,
        wall_time: None,
    })
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    for (r, c, _) in a.iter() {
        if r != c {
            adjacency[r].push(c);
            adjacency[c].push(r);
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree = |v: usize| adjacency[v].len();
    let mut visited = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = alloc::vec![0usize; n];
    // breadth-first sweep from `root`, neighbours by increasing degree; returns the sweep
    let sweep = |root: usize, visited: &mut [bool], level: &mut [usize]| -> Vec<usize> {
        let mut out = alloc::vec![root];
        visited[root] = true;
        level[root] = 0;
        let mut head = 0;
        let mut next = Vec::new();
        while head < out.len() {
            let v = out[head];
            head += 1;
            next.clear();
            next.extend(adjacency[v].iter().copied().filter(|&w| !visited[w]));
            next.sort_by_key(|&w| (adjacency[w].len(), w));
            for &w in &next {
                visited[w] = true;
                level[w] = level[v] + 1;
                out.push(w);
            }
        }
        out
    };
    for start in 0..n {
        if visited[start] {
            continue;
        }
        // pseudo-peripheral root: restart from the lowest-degree vertex of the last level
        let mut root = start;
        let mut depth = 0;
        for _ in 0..4 {
            let component = sweep(root, &mut visited, &mut level);
            let far = level[*component.last().unwrap()];
            let candidate = component
                .iter()
                .copied()
                .filter(|&v| level[v] == far)
                .min_by_key(|&v| (degree(v), v))
                .unwrap();
            for &v in &component {
                visited[v] = false;
            }
            if far <= depth && root != start {
                break;
            }
            depth = far;
            root = candidate;
        }
        order.extend(sweep(root, &mut visited, &mut level));
    }
    order.reverse();
    order
}

/// GMRES(`restart`) on `A M^-1 y = b`, `x = M^-1 y`, where `precondition(v, out)`
/// writes `M^-1 v`. Returns the iterate and the number of inner iterations.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    precondition: &dyn Fn(&[f64], &mut [f64]),
    restart: usize,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let nb = norm2(b);
    let mut x = alloc::vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let mut total = 0;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(restart + 1);
    let mut h = alloc::vec![alloc::vec![0.0; restart]; restart + 1];
    let mut cs = alloc::vec![0.0; restart];
    let mut sn = alloc::vec![0.0; restart];
    let mut g = alloc::vec![0.0; restart + 1];
    let mut z = alloc::vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    loop {
        let r = residual(a, &x, b);
        let beta = norm2(&r);
        let rel = beta / nb;
        if rel <= tol {
            return Ok((x, total));
        }
        if total >= max_iterations {
            return Err(Error::NoConvergence {
                iterations: total,
                residual: rel,
            });
        }
        // a restart cycle that gains less than a factor 0.9 three times in a row is stagnation
        if rel < 0.9 * best {
            best = rel;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 {
                return Err(Error::SingularSystem("GMRES stagnated"));
            }
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut m = 0;
        while m < restart && total < max_iterations {
            precondition(&basis[m], &mut z);
            let mut w = alloc::vec![0.0; n];
            a.mul_vec(&z, &mut w);
            // modified Gram-Schmidt
            for j in 0..=m {
                let hj = dot(&w, &basis[j]);
                h[j][m] = hj;
                for (wi, vi) in w.iter_mut().zip(&basis[j]) {
                    *wi -= hj * vi;
                }
            }
            let hn = norm2(&w);
            h[m + 1][m] = hn;
            for j in 0..m {
                let t = cs[j] * h[j][m] + sn[j] * h[j + 1][m];
                h[j + 1][m] = -sn[j] * h[j][m] + cs[j] * h[j + 1][m];
                h[j][m] = t;
            }
            let d = h[m][m].hypot(h[m + 1][m]);
            if d == 0.0 {
                return Err(Error::SingularSystem("GMRES breakdown"));
            }
            cs[m] = h[m][m] / d;
            sn[m] = h[m + 1][m] / d;
            h[m][m] = d;
            h[m + 1][m] = 0.0;
            g[m + 1] = -sn[m] * g[m];
            g[m] *= cs[m];
            total += 1;
            m += 1;
            if (g[m].abs() / nb) <= tol * 0.5 || hn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = alloc::vec![0.0; m];
        for i in (0..m).rev() {
            let s: f64 = (i + 1..m).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut update = alloc::vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, v) in update.iter_mut().zip(&basis[j]) {
                *u += yj * v;
            }
        }
        precondition(&update, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}

/// Estimated singular extremes and their ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub ratio: f64,
}

pub const PROBE_ITERATIONS: usize = 20;

/// Power iteration on `A^T A` for the largest singular value and inverse
/// iteration through the LU factors for the smallest.
pub fn conditioning_probe(a: &CsrMatrix) -> Result<ConditionEstimate> {
    let n = a.n_rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty system"));
    }
    let lu = LuFactors::new(a)?;
    let start: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 / 10.0).collect();
    let normalize = |v: &mut Vec<f64>| -> f64 {
        let s = norm2(v);
        v.iter_mut().for_each(|x| *x /= s);
        s
    };

    let mut v = start.clone();
    normalize(&mut v);
    let mut av = alloc::vec![0.0; n];
    let mut sigma_max = 0.0;
    for _ in 0..PROBE_ITERATIONS {
        a.mul_vec(&v, &mut av);
        sigma_max = norm2(&av);
        a.mul_vec_transpose(&av, &mut v);
        if normalize(&mut v) == 0.0 {
            return Err(Error::SingularSystem("zero operator"));
        }
    }

    let mut v = start;
    normalize(&mut v);
    let mut sigma_min = 0.0;
    for _ in 0..PROBE_ITERATIONS {
        let w = lu.solve_transpose(&v)?;
        sigma_min = 1.0 / norm2(&w);
        let mut z = lu.solve(&w)?;
        normalize(&mut z);
        v = z;
    }
    if !(sigma_min > 0.0) {
        return Err(Error::SingularSystem("smallest singular value is zero"));
    }
    Ok(ConditionEstimate {
        sigma_max,
        sigma_min,
        ratio: sigma_max / sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::TripletBuilder;

    fn convection_diffusion(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.5);
            if i > 0 {
                b.push(i, i - 1, -1.3);
            }
            if i + 1 < n {
                b.push(i, i + 1, -0.7);
            }
        }
        b.build()
    }

    #[test]
    fn identity_returns_rhs() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        for kind in [SolverKind::Direct, SolverKind::Iterative] {
            let r = solve(&a, &b, kind).unwrap();
            for (x, y) in r.solution.iter().zip(b) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn direct_and_gmres_agree_on_nonsymmetric_system() {
        let a = convection_diffusion(300);
        let b: Vec<f64> = (0..300).map(|i| (i as f64 * 0.37).sin()).collect();
        let d = solve(&a, &b, SolverKind::Direct).unwrap();
        let g = solve(&a, &b, SolverKind::Iterative).unwrap();
        assert!(d.relative_residual <= 1e-14);
        assert!(g.relative_residual <= RESIDUAL_TOLERANCE);
        assert!(g.iterations > 0);
        let diff = d
            .solution
            .iter()
            .zip(&g.solution)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff < 1e-9);
    }

    #[test]
    fn probe_on_known_spectra() {
        let c = conditioning_probe(&CsrMatrix::identity(4)).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-12);
        let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let c = conditioning_probe(&CsrMatrix::from_diagonal(&d)).unwrap();
        assert!((c.ratio - 10.0).abs() <= 0.5, "{c:?}");
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 1, 1.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, 1.0);
        let a = b.build();
        assert!(solve(&a, &[1.0, 0.0], SolverKind::Direct).is_err());
        assert!(solve(&a, &[1.0, 0.0], SolverKind::Iterative).is_err());
        assert!(solve_gmres_with(&a, &[1.0, 0.0], Preconditioner::Jacobi).is_err());
    }

    #[test]
    fn ilu0_is_exact_on_tridiagonal() {
        // no fill-in, so the incomplete factors are the full factors
        let a = convection_diffusion(40);
        let f = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| i as f64 - 3.0).collect();
        let mut x = alloc::vec![0.0; 40];
        f.apply(&b, &mut x);
        assert!(relative_residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn both_preconditioners_converge() {
        let a = convection_diffusion(200);
        let b: Vec<f64> = (0..200).map(|i| (i as f64).cos()).collect();
        for p in [Preconditioner::Jacobi, Preconditioner::Ilu0] {
            let r = solve_gmres_with(&a, &b, p).unwrap();
            assert!(r.relative_residual <= RESIDUAL_TOLERANCE, "{}", p.name());
        }
    }
}
