use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Scalar};

/// A linear map `y = Op x` over one scalar field.
pub trait LinearOperator<S: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `Op x` into `y`; both have length `dim()`.
    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()>;

    fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        let mut y = vec![S::zero(); self.dim()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }
}

impl<S: Scalar> LinearOperator<S> for CsrMatrix<S> {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

/// The identity map of a fixed dimension.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl<S: Scalar> LinearOperator<S> for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        check_dims(self.0, x, y)?;
        y.copy_from_slice(x);
        Ok(())
    }
}

impl<S: Scalar, T: LinearOperator<S> + ?Sized> LinearOperator<S> for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        (**self).apply_into(x, y)
    }
}

impl<S: Scalar, T: LinearOperator<S> + ?Sized> LinearOperator<S> for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        (**self).apply_into(x, y)
    }
}

pub(crate) fn check_dims<S>(n: usize, x: &[S], y: &[S]) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    Ok(())
}

/// Dense column-major matrix of an operator, built by applying it to unit
/// vectors. Returned as rows for convenience. Only sensible for small `n`.
pub fn operator_to_dense<S: Scalar>(op: &dyn LinearOperator<S>) -> Result<Vec<Vec<S>>> {
    let n = op.dim();
    let mut dense = vec![vec![S::zero(); n]; n];
    let mut e = vec![S::zero(); n];
    let mut col = vec![S::zero(); n];
    for j in 0..n {
        e[j] = S::one();
        op.apply_into(&e, &mut col)?;
        for i in 0..n {
            dense[i][j] = col[i];
        }
        e[j] = S::zero();
    }
    Ok(dense)
}
