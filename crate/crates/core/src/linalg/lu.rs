//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Columns are visited in nested-dissection order. For every column the
//! sparse triangular solve `L x = A(:, q[k])` is restricted to the nonzero
//! pattern found by a depth-first reach through the columns of `L`, so the
//! work is proportional to the arithmetic actually performed.

use crate::error::{Error, Result};
use crate::linalg::ordering::nested_dissection;
use crate::linalg::{CsrMatrix, Scalar};

/// A candidate on the (reordered) diagonal is kept as pivot when its modulus
/// is at least this fraction of the largest candidate in the column.
const DIAGONAL_PREFERENCE: f64 = 0.1;

/// `P A Q = L U` for a square sparse matrix.
///
/// Immutable after construction; `solve` borrows it shared and keeps all
/// scratch space local, so concurrent solves are fine.
#[derive(Debug, Clone)]
pub struct LuFactorization<S> {
    n: usize,
    /// Column order: position `k` holds original column `q[k]`.
    q: Vec<usize>,
    /// Row `i` of `A` is row `pinv[i]` of `P A`.
    pinv: Vec<usize>,
    l: Csc<S>,
    u: Csc<S>,
}

#[derive(Debug, Clone)]
struct Csc<S> {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> LuFactorization<S> {
    pub fn new(a: &CsrMatrix<S>) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::Structural(format!(
                "cannot factorize a non-square {}x{} matrix",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let q = nested_dissection(a);
        // Columns of A are the rows of A^T.
        let at = a.transpose();

        let mut pinv = vec![usize::MAX; n];
        let mut l = Csc {
            col_ptr: Vec::with_capacity(n + 1),
            row_idx: Vec::with_capacity(4 * a.nnz()),
            values: Vec::with_capacity(4 * a.nnz()),
        };
        let mut u = Csc {
            col_ptr: Vec::with_capacity(n + 1),
            row_idx: Vec::with_capacity(4 * a.nnz()),
            values: Vec::with_capacity(4 * a.nnz()),
        };

        let mut x = vec![S::zero(); n];
        let mut xi = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];

        for k in 0..n {
            l.col_ptr.push(l.row_idx.len());
            u.col_ptr.push(u.row_idx.len());
            let col = q[k];
            let (b_rows, b_vals) = at.row(col);

            // Nonzero pattern of L \ b in topological order: xi[top..n].
            let mut top = n;
            for &i in b_rows {
                if mark[i] != k {
                    top = reach_dfs(i, k, &l, &pinv, &mut mark, &mut xi, &mut pstack, top);
                }
            }
            for &i in &xi[top..n] {
                x[i] = S::zero();
            }
            for (&i, &v) in b_rows.iter().zip(b_vals) {
                x[i] = v;
            }
            for p in top..n {
                let j = xi[p];
                let jcol = pinv[j];
                if jcol == usize::MAX {
                    continue;
                }
                // Unit diagonal stored first in each column of L.
                let xj = x[j];
                for t in l.col_ptr[jcol] + 1..l.col_ptr[jcol + 1] {
                    x[l.row_idx[t]] -= l.values[t] * xj;
                }
            }

            // Pivot search over rows not yet pivotal.
            let mut ipiv = usize::MAX;
            let mut best = -1.0f64;
            for &i in &xi[top..n] {
                if pinv[i] == usize::MAX {
                    let t = x[i].modulus();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    u.row_idx.push(pinv[i]);
                    u.values.push(x[i]);
                }
            }
            if ipiv == usize::MAX || best <= 0.0 {
                return Err(Error::Singular { column: col });
            }
            if pinv[col] == usize::MAX && mark[col] == k && x[col].modulus() >= best * DIAGONAL_PREFERENCE {
                ipiv = col;
            }

            let pivot = x[ipiv];
            u.row_idx.push(k);
            u.values.push(pivot);
            pinv[ipiv] = k;
            l.row_idx.push(ipiv);
            l.values.push(S::one());
            for &i in &xi[top..n] {
                if pinv[i] == usize::MAX {
                    l.row_idx.push(i);
                    l.values.push(x[i] / pivot);
                }
                x[i] = S::zero();
            }
        }
        l.col_ptr.push(l.row_idx.len());
        u.col_ptr.push(u.row_idx.len());
        for r in &mut l.row_idx {
            *r = pinv[*r];
        }

        Ok(Self { n, q, pinv, l, u })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` and `U` combined.
    pub fn factor_nnz(&self) -> usize {
        self.l.row_idx.len() + self.u.row_idx.len()
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [S]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: b.len(),
            });
        }
        let mut w = vec![S::zero(); self.n];
        for (i, &bi) in b.iter().enumerate() {
            w[self.pinv[i]] = bi;
        }
        // L w = P b, unit lower triangular.
        for j in 0..self.n {
            let wj = w[j];
            if wj == S::zero() {
                continue;
            }
            for t in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                w[self.l.row_idx[t]] -= self.l.values[t] * wj;
            }
        }
        // U z = w, diagonal stored last in each column.
        for j in (0..self.n).rev() {
            let end = self.u.col_ptr[j + 1] - 1;
            w[j] /= self.u.values[end];
            let wj = w[j];
            if wj == S::zero() {
                continue;
            }
            for t in self.u.col_ptr[j]..end {
                w[self.u.row_idx[t]] -= self.u.values[t] * wj;
            }
        }
        for (k, &wk) in w.iter().enumerate() {
            b[self.q[k]] = wk;
        }
        Ok(())
    }
}

/// Iterative depth-first search from row `start` through the graph of `L`
/// (edges row -> rows of the column where that row was pivotal). Finished
/// nodes are pushed onto `xi` from the top, yielding topological order.
#[allow(clippy::too_many_arguments)]
fn reach_dfs<S>(
    start: usize,
    stamp: usize,
    l: &Csc<S>,
    pinv: &[usize],
    mark: &mut [usize],
    xi: &mut [usize],
    pstack: &mut [usize],
    mut top: usize,
) -> usize {
    // The stack lives at the bottom of `xi`; results grow down from `top`.
    let mut head = 0usize;
    xi[0] = start;
    loop {
        let j = xi[head];
        let jcol = pinv[j];
        if mark[j] != stamp {
            mark[j] = stamp;
            pstack[head] = if jcol == usize::MAX { 0 } else { l.col_ptr[jcol] };
        }
        let end = if jcol == usize::MAX { 0 } else { l.col_ptr[jcol + 1] };
        let mut done = true;
        let mut p = pstack[head];
        while p < end {
            let i = l.row_idx[p];
            p += 1;
            if mark[i] == stamp {
                continue;
            }
            pstack[head] = p;
            head += 1;
            xi[head] = i;
            done = false;
            break;
        }
        if done {
            top -= 1;
            xi[top] = j;
            if head == 0 {
                break;
            }
            head -= 1;
        }
    }
    top
}
