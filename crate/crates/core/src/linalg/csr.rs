use crate::error::{Error, Result};
use crate::linalg::Scalar;

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row. Explicit zeros
/// produced by assembly are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<S> {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, S)]) -> Result<Self> {
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Structural(format!(
                    "triplet ({r}, {c}) out of range for {n_rows}x{n_cols} matrix"
                )));
            }
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }

        // Bucket by row, then sort each row by column and merge duplicates.
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![S::zero(); triplets.len()];
        for &(r, c, v) in triplets {
            let p = next[r];
            cols[p] = c;
            vals[p] = v;
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n_rows {
            let (lo, hi) = (counts[r], counts[r + 1]);
            order.clear();
            order.extend(lo..hi);
            order.sort_by_key(|&p| cols[p]);
            for &p in &order {
                if col_indices.len() > row_offsets[r] && *col_indices.last().unwrap() == cols[p] {
                    *values.last_mut().unwrap() += vals[p];
                } else {
                    col_indices.push(cols[p]);
                    values.push(vals[p]);
                }
            }
            row_offsets.push(col_indices.len());
        }

        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Validates raw CSR arrays.
    pub fn try_from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<S>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 || row_offsets[0] != 0 {
            return Err(Error::Structural("row_offsets must have n_rows + 1 entries starting at 0".into()));
        }
        if *row_offsets.last().unwrap() != col_indices.len() || col_indices.len() != values.len() {
            return Err(Error::Structural("row_offsets, col_indices and values disagree on nnz".into()));
        }
        for r in 0..n_rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::Structural(format!("row_offsets decrease at row {r}")));
            }
            let row = &col_indices[lo..hi];
            if row.iter().any(|&c| c >= n_cols) {
                return Err(Error::Structural(format!("column index out of range in row {r}")));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Structural(format!("columns not strictly increasing in row {r}")));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![S::one(); n],
        }
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

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[S]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored entry at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> S {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => S::zero(),
        }
    }

    /// Iterator over stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn spmv(&self, x: &[S]) -> Result<Vec<S>> {
        let mut y = vec![S::zero(); self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, traversing rows in order and columns ascending.
    pub fn spmv_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows,
                actual: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = S::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *yi = acc;
        }
        Ok(())
    }

    /// `A[rows, cols]`, i.e. `R_rows A R_cols^T` for binary restrictions.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        check_index_set(rows, self.n_rows, "rows")?;
        check_index_set(cols, self.n_cols, "cols")?;
        let mut local_of = vec![usize::MAX; self.n_cols];
        for (l, &c) in cols.iter().enumerate() {
            local_of[c] = l;
        }
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &r in rows {
            let (rc, rv) = self.row(r);
            // Global columns are ascending and `cols` is sorted, so local
            // columns come out ascending too.
            for (&c, &v) in rc.iter().zip(rv) {
                let l = local_of[c];
                if l != usize::MAX {
                    col_indices.push(l);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![S::zero(); self.nnz()];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                col_indices[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Entrywise map into another field (or the same one).
    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> CsrMatrix<T> {
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Dense row-major copy. Intended for small matrices and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<S>> {
        let mut d = vec![vec![S::zero(); self.n_cols]; self.n_rows];
        for (i, j, v) in self.triplets() {
            d[i][j] += v;
        }
        d
    }

    pub fn diagonal(&self) -> Vec<S> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Rows whose only stored nonzero is a unit diagonal entry.
    pub fn identity_rows(&self) -> Vec<usize> {
        (0..self.n_rows)
            .filter(|&i| {
                let (cols, vals) = self.row(i);
                let mut diag_one = false;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j == i {
                        diag_one = v == S::one();
                    } else if v != S::zero() {
                        return false;
                    }
                }
                diag_one
            })
            .collect()
    }
}

fn check_index_set(set: &[usize], bound: usize, what: &str) -> Result<()> {
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Structural(format!("{what} index set is not strictly increasing")));
    }
    if let Some(&last) = set.last() {
        if last >= bound {
            return Err(Error::Structural(format!("{what} index {last} out of range {bound}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let a = CsrMatrix::<f64>::from_triplets(2, 2, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.row_offsets(), &[0, 0, 0]);
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.values(), &[3.0]);
    }

    #[test]
    fn triplets_sorted_into_rows() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0), (1, 0, 3.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.row_offsets(), &[0, 2, 3]);
        assert_eq!(a.col_indices(), &[0, 1, 0]);
        assert_eq!(a.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn out_of_range_triplet_is_structural_error() {
        let err = CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn spmv_examples() {
        let i3 = CsrMatrix::<f64>::identity(3);
        assert_eq!(i3.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let z = CsrMatrix::<f64>::zeros(3, 3);
        assert_eq!(z.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(a.spmv(&[1.0, 1.0]).unwrap(), vec![3.0, 3.0]);
        assert!(matches!(a.spmv(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn submatrix_examples() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        assert_eq!(a.extract_submatrix(&[0, 1, 2], &[0, 1, 2]).unwrap(), a);
        let e = a.extract_submatrix(&[], &[]).unwrap();
        assert_eq!((e.n_rows(), e.n_cols(), e.nnz()), (0, 0, 0));
        let s = a.extract_submatrix(&[0, 2], &[0, 2]).unwrap();
        assert_eq!(s.to_dense(), vec![vec![1.0, 0.0], vec![0.0, 3.0]]);
        assert!(a.extract_submatrix(&[2, 0], &[0]).is_err());
        assert!(a.extract_submatrix(&[0, 3], &[0]).is_err());
    }

    #[test]
    fn raw_parts_are_validated() {
        assert!(CsrMatrix::<f64>::try_from_parts(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::<f64>::try_from_parts(1, 2, vec![0, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
    }

    fn random_triplets() -> impl Strategy<Value = (usize, usize, Vec<(usize, usize, f64)>)> {
        (1usize..20, 1usize..20).prop_flat_map(|(m, n)| {
            let entries = proptest::collection::vec((0..m, 0..n, -10.0f64..10.0), 0..80);
            (Just(m), Just(n), entries)
        })
    }

    proptest! {
        #[test]
        fn spmv_matches_dense((m, n, t) in random_triplets(), seed in 0u64..1000) {
            let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
            let x: Vec<f64> = (0..n).map(|j| ((j as u64 * 31 + seed) % 17) as f64 - 8.0).collect();
            let y = a.spmv(&x).unwrap();
            let d = a.to_dense();
            for i in 0..m {
                let e: f64 = (0..n).map(|j| d[i][j] * x[j]).sum();
                let scale = (0..n).map(|j| (d[i][j] * x[j]).abs()).sum::<f64>().max(1.0);
                prop_assert!((y[i] - e).abs() <= 1e-14 * scale);
            }
        }

        #[test]
        fn submatrix_equals_dense_triple_product((m, n, t) in random_triplets(), rmask in any::<u32>(), cmask in any::<u32>()) {
            let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
            let rows: Vec<usize> = (0..m).filter(|i| rmask >> i & 1 == 1).collect();
            let cols: Vec<usize> = (0..n).filter(|j| cmask >> j & 1 == 1).collect();
            let s = a.extract_submatrix(&rows, &cols).unwrap().to_dense();
            // R_rows A R_cols^T formed densely.
            let d = a.to_dense();
            for (k, &r) in rows.iter().enumerate() {
                for (l, &c) in cols.iter().enumerate() {
                    let mut e = 0.0;
                    for i in 0..m {
                        for j in 0..n {
                            let rij = if i == r { 1.0 } else { 0.0 };
                            let cjl = if j == c { 1.0 } else { 0.0 };
                            e += rij * d[i][j] * cjl;
                        }
                    }
                    prop_assert_eq!(s[k][l], e);
                }
            }
        }

        #[test]
        fn transpose_is_involution((m, n, t) in random_triplets()) {
            let a = CsrMatrix::from_triplets(m, n, &t).unwrap();
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
