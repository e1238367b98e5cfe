use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LuFactorization, Scalar};

/// Coarse space spanned by the indicators of the unique-owner sets.
///
/// `Phi` is never stored: column `p` is 1 exactly on the dofs owned by `p`,
/// so `Phi^T r` sums by owner and `Phi y` broadcasts back.
#[derive(Debug)]
pub struct CoarseLevel<S: Scalar> {
    owner: Vec<usize>,
    a0: CsrMatrix<S>,
    factor: LuFactorization<S>,
}

impl<S: Scalar> CoarseLevel<S> {
    pub fn new(a: &CsrMatrix<S>, owner: &[usize], n_coarse: usize) -> Result<Self> {
        if owner.len() != a.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: a.n_rows(),
                actual: owner.len(),
            });
        }
        // A_0[p, q] = sum of A[i, j] with owner(i) = p, owner(j) = q.
        let triplets: Vec<(usize, usize, S)> = a.triplets().map(|(i, j, v)| (owner[i], owner[j], v)).collect();
        let a0 = CsrMatrix::from_triplets(n_coarse, n_coarse, &triplets)?;
        let factor = LuFactorization::new(&a0).map_err(|e| e.at_stage("coarse factorization"))?;
        Ok(Self {
            owner: owner.to_vec(),
            a0,
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.a0.n_rows()
    }

    /// `A_0 = Phi^T A Phi`.
    pub fn matrix(&self) -> &CsrMatrix<S> {
        &self.a0
    }

    pub fn matrix_nnz(&self) -> usize {
        self.a0.nnz()
    }

    pub fn factor_nnz(&self) -> usize {
        self.factor.factor_nnz()
    }

    /// Dense `Phi` (`n x n_c`), for inspection and tests.
    pub fn basis(&self) -> CsrMatrix<f64> {
        let t: Vec<(usize, usize, f64)> = self.owner.iter().enumerate().map(|(i, &p)| (i, p, 1.0)).collect();
        CsrMatrix::from_triplets(self.owner.len(), self.dim(), &t).expect("owners are in range")
    }

    /// `z += Phi A_0^{-1} Phi^T r`.
    pub fn add_correction(&self, r: &[S], z: &mut [S]) -> Result<()> {
        let mut rc = vec![S::zero(); self.dim()];
        for (&p, &x) in self.owner.iter().zip(r) {
            rc[p] += x;
        }
        self.factor.solve_in_place(&mut rc)?;
        for (&p, zi) in self.owner.iter().zip(z.iter_mut()) {
            *zi += rc[p];
        }
        Ok(())
    }
}
