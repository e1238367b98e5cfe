//! Field-generic sparse linear algebra: CSR storage, sparse LU, operators.

mod csr;
mod lu;
pub mod matrix_market;
mod operator;
pub mod ordering;
mod scalar;

pub use csr::CsrMatrix;
pub use lu::LuFactorization;
pub use operator::{operator_to_dense, Identity, LinearOperator};
pub(crate) use operator::check_dims;
pub use scalar::{axpy, dot, norm2, norm_inf, Scalar};

pub use num_complex::Complex64;

/// Factorizes `a` with the sparse direct solver.
pub fn factorize<S: Scalar>(a: &CsrMatrix<S>) -> crate::Result<LuFactorization<S>> {
    LuFactorization::new(a)
}

/// Solves with an existing factorization.
pub fn solve_factored<S: Scalar>(f: &LuFactorization<S>, b: &[S]) -> crate::Result<Vec<S>> {
    f.solve(b)
}
