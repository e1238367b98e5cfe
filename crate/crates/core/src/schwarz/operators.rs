use crate::error::{Error, Result};
use crate::linalg::{check_dims, LinearOperator, Scalar};

/// `Q = M^{-1} A`.
pub struct SchwarzOperator<M, A> {
    m: M,
    a: A,
}

pub fn schwarz_operator<S: Scalar, M: LinearOperator<S>, A: LinearOperator<S>>(m: M, a: A) -> Result<SchwarzOperator<M, A>> {
    if m.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: m.dim(),
        });
    }
    Ok(SchwarzOperator { m, a })
}

impl<S: Scalar, M: LinearOperator<S>, A: LinearOperator<S>> LinearOperator<S> for SchwarzOperator<M, A> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        let ax = self.a.apply(x)?;
        self.m.apply_into(&ax, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    /// `sum Q_i`
    Additive,
    /// `I - prod (I - Q_i)`, with `Q_1` applied first.
    Multiplicative,
}

pub struct CombinedOperator<'a, S: Scalar> {
    ops: Vec<&'a dyn LinearOperator<S>>,
    mode: CombineMode,
    n: usize,
}

pub fn combine<'a, S: Scalar>(ops: Vec<&'a dyn LinearOperator<S>>, mode: CombineMode) -> Result<CombinedOperator<'a, S>> {
    let n = ops.first().ok_or_else(|| Error::Config("combine needs at least one operator".into()))?.dim();
    if let Some(bad) = ops.iter().find(|o| o.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: bad.dim(),
        });
    }
    Ok(CombinedOperator { ops, mode, n })
}

impl<S: Scalar> LinearOperator<S> for CombinedOperator<'_, S> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[S], y: &mut [S]) -> Result<()> {
        check_dims(self.n, x, y)?;
        match self.mode {
            CombineMode::Additive => {
                y.fill(S::zero());
                let mut t = vec![S::zero(); self.n];
                for op in &self.ops {
                    op.apply_into(x, &mut t)?;
                    for (a, b) in y.iter_mut().zip(&t) {
                        *a += *b;
                    }
                }
            }
            CombineMode::Multiplicative => {
                // e <- (I - Q_i) e for i = 1..M, then y = x - e.
                let mut e = x.to_vec();
                let mut t = vec![S::zero(); self.n];
                for op in &self.ops {
                    op.apply_into(&e, &mut t)?;
                    for (a, b) in e.iter_mut().zip(&t) {
                        *a -= *b;
                    }
                }
                for ((yi, &xi), &ei) in y.iter_mut().zip(x).zip(&e) {
                    *yi = xi - ei;
                }
            }
        }
        Ok(())
    }
}
