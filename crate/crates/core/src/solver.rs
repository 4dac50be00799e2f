//! Sparse direct solver: reverse Cuthill-McKee ordering followed by an
//! envelope (skyline) `L D L^T` factorization with iterative refinement.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::nitsche::AssembledSystem;
use crate::sparse::{dot, norm2, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Accepted relative residual `|Ax - b| / |b|`.
    pub residual_tol: f64,
    pub max_refinement: usize,
    /// Estimate the spectral condition number by power iteration.
    pub estimate_condition: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-9, max_refinement: 3, estimate_condition: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub relative_residual: f64,
    /// Smallest pivot of the `D` factor (signed).
    pub min_pivot: f64,
    pub refinement_steps: usize,
    pub condition_estimate: Option<f64>,
}

/// Reverse Cuthill-McKee permutation of the symmetric sparsity pattern of
/// `a`. Entry `p[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row(i).0 {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            out.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start: repeatedly jump to the last vertex of a BFS
        let mut start = seed;
        for _ in 0..3 {
            let mut tmp = visited.clone();
            let mut level = Vec::new();
            bfs(start, &mut tmp, &mut level);
            let last = *level.last().unwrap();
            if last == start {
                break;
            }
            start = last;
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Envelope `L D L^T` factorization of a permuted symmetric matrix.
#[derive(Debug, Clone)]
pub struct SkylineLdlt {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// Row envelopes of `L` (strictly lower part), row after row.
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl SkylineLdlt {
    /// Factorizes `a` (only the lower triangle is read) in the given ordering.
    pub fn factor(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &c in a.row(old).0 {
                let j = inv[c];
                if j < i {
                    first[i] = first[i].min(j);
                } else if i < j {
                    first[j] = first[j].min(i);
                }
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i]);
        }
        let mut lower = vec![0.0; start[n]];
        let mut diag = vec![0.0; n];
        for old in 0..n {
            let i = inv[old];
            let (cols, vals) = a.row(old);
            for (&c, &v) in cols.iter().zip(vals) {
                let j = inv[c];
                if j < i {
                    lower[start[i] + j - first[i]] = v;
                } else if j == i {
                    diag[i] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(start[i]);
            let row = &mut rest[..i - fi];
            // row holds g_ij = L_ij D_j after this loop
            for j in fi..i {
                let fj = first[j];
                let m0 = fi.max(fj);
                let lj = &done[start[j] + m0 - fj..start[j] + j - fj];
                let s = dot(&row[m0 - fi..j - fi], lj);
                row[j - fi] -= s;
            }
            let mut d = diag[i];
            for j in fi..i {
                let g = row[j - fi];
                let l = g / diag[j];
                d -= g * l;
                row[j - fi] = l;
            }
            if !(d.abs() > 1e-300 && d.is_finite()) {
                return Err(Error::Factorization { row: perm[i], pivot: d });
            }
            diag[i] = d;
        }
        Ok(Self { perm, first, start, lower, diag })
    }

    pub fn min_pivot(&self) -> f64 {
        self.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Stored envelope size.
    pub fn envelope(&self) -> usize {
        self.lower.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            y[i] -= dot(row, &y[fi..i]);
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let yi = y[i];
            for (k, l) in row.iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Solves `a x = b` with a checked residual.
pub fn solve_csr(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    let factor = SkylineLdlt::factor(a, rcm_ordering(a))?;
    let bnorm = norm2(b);
    let mut x = factor.solve(b);
    let residual = |x: &[f64]| -> Vec<f64> { a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect() };
    let mut r = residual(&x);
    let rel = |r: &[f64]| if bnorm == 0.0 { norm2(r) } else { norm2(r) / bnorm };
    let mut steps = 0;
    while rel(&r) > opts.residual_tol && steps < opts.max_refinement {
        let dx = factor.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        r = residual(&x);
        steps += 1;
    }
    let relative_residual = rel(&r);
    if !(relative_residual <= opts.residual_tol) {
        return Err(Error::Residual { residual: relative_residual });
    }
    let condition_estimate = opts.estimate_condition.then(|| condition_estimate(a, &factor));
    Ok(SolveReport { solution: x, relative_residual, min_pivot: factor.min_pivot(), refinement_steps: steps, condition_estimate })
}

/// Applies the Dirichlet constraints of `sys` and solves.
pub fn solve_direct(sys: &AssembledSystem, opts: &SolveOptions) -> Result<SolveReport> {
    let (a, b) = sys.constrained();
    solve_csr(&a, &b, opts)
}

fn condition_estimate(a: &CsrMatrix, factor: &SkylineLdlt) -> f64 {
    let n = a.dim();
    let power = |apply: &dyn Fn(&[f64]) -> Vec<f64>| {
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
        let mut lambda = 0.0;
        for _ in 0..200 {
            let nv = norm2(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let w = apply(&v);
            let next = dot(&v, &w).abs();
            v = w;
            if (next - lambda).abs() <= 1e-6 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    };
    let largest = power(&|v| a.mul_vec(v));
    let inv_largest = power(&|v| factor.solve(v));
    largest * inv_largest
}
