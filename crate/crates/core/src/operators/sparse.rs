//! Compressed sparse row matrices and a Jacobi-preconditioned conjugate gradient solver.

use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` over row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// `alpha·A + diag(d)` with the same sparsity pattern (diagonal entries must be present).
    pub fn scaled_plus_diagonal(&self, alpha: f64, d: &[f64]) -> Self {
        let mut out = self.clone();
        for r in 0..self.n {
            for k in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.values[k] *= alpha;
                if out.col_idx[k] == r {
                    out.values[k] += d[r];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    /// Coordinate text export, one `row col value` line per stored entry.
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let _ = writeln!(s, "{r} {c} {}", crate::format::num(v));
            }
        }
        s
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` for symmetric positive (semi-)definite `A`, starting from the given `x`.
///
/// Stops once `‖b - A x‖ ≤ rel_tol · ‖b‖`. For singular `A` the right-hand side must be
/// consistent; the kernel component of `x` is left untouched.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = a.dim();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let target = rel_tol * norm(b);
    let mut r = a.mul_vec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut res = norm(&r);
    if res <= target {
        return CgOutcome {
            iterations: 0,
            residual: res,
            converged: true,
        };
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome {
                iterations: it,
                residual: res,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r);
        if res <= target {
            return CgOutcome {
                iterations: it,
                residual: res,
                converged: true,
            };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: max_iter,
        residual: res,
        converged: false,
    }
}
