//! Right-preconditioned GMRES and preconditioned CG with Lanczos
//! condition-number estimates.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, LinearOperator, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Relative residual target `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    pub maxit: usize,
    /// GMRES restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            maxit: 1000,
            restart: None,
        }
    }
}

impl KrylovOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.restart == Some(0) {
            return Err(Error::Config("restart length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Relative residual norms, starting with iteration 0.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Lanczos tridiagonal from CG coefficients (empty for GMRES).
    pub lanczos_diag: Vec<f64>,
    pub lanczos_offdiag: Vec<f64>,
}

impl SolveStats {
    /// CSV `iteration,relative_residual`.
    pub fn write_residual_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("iteration,relative_residual\n");
        for (i, r) in self.residual_history.iter().enumerate() {
            writeln!(s, "{i},{r:e}").unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

fn check_rhs<S: Scalar>(a: &dyn LinearOperator<S>, b: &[S], m: Option<&dyn LinearOperator<S>>) -> Result<()> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.len(),
        });
    }
    if let Some(m) = m {
        if m.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                actual: m.dim(),
            });
        }
    }
    Ok(())
}

fn precondition<S: Scalar>(m: Option<&dyn LinearOperator<S>>, v: &[S]) -> Result<Vec<S>> {
    match m {
        Some(m) => m.apply(v),
        None => Ok(v.to_vec()),
    }
}

/// `(c, s)` with `[c s; -conj(s) c] [a; b] = [r; 0]`, `c` real.
fn givens<S: Scalar>(a: S, b: S) -> (f64, S) {
    let (ma, mb) = (a.modulus(), b.modulus());
    if mb == 0.0 {
        return (1.0, S::zero());
    }
    if ma == 0.0 {
        return (0.0, b.conj().scale(1.0 / mb));
    }
    let nu = ma.hypot(mb);
    (ma / nu, a.scale(1.0 / ma) * b.conj().scale(1.0 / nu))
}

/// Right-preconditioned GMRES: iterates on `A M^{-1} y = b`, `x = M^{-1} y`,
/// so the monitored residual is the true residual of `A x = b`.
pub fn gmres<S: Scalar>(
    a: &dyn LinearOperator<S>,
    b: &[S],
    m: Option<&dyn LinearOperator<S>>,
    opts: &KrylovOptions,
) -> Result<(Vec<S>, SolveStats)> {
    opts.validate()?;
    check_rhs(a, b, m)?;
    let start = Instant::now();
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![S::zero(); n];
    let mut stats = SolveStats::default();
    if bnorm == 0.0 {
        stats.residual_history.push(0.0);
        stats.converged = true;
        stats.wall_time = start.elapsed().as_secs_f64();
        return Ok((x, stats));
    }
    stats.residual_history.push(1.0);
    let target = opts.tol * bnorm;
    let mut r = b.to_vec();
    let mut beta = bnorm;

    loop {
        let cycle = opts.restart.unwrap_or(usize::MAX).min(opts.maxit - stats.iterations.min(opts.maxit));
        if cycle == 0 {
            break;
        }
        let mut basis: Vec<Vec<S>> = vec![r.iter().map(|v| v.scale(1.0 / beta)).collect()];
        let mut h: Vec<Vec<S>> = Vec::new();
        let mut rot: Vec<(f64, S)> = Vec::new();
        let mut g = vec![S::from_real(beta)];

        for j in 0..cycle {
            let mut w = a.apply(&precondition(m, &basis[j])?)?;
            stats.iterations += 1;
            let before = norm2(&w);
            let mut col = vec![S::zero(); j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                col[i] = hij;
                axpy(-hij, v, &mut w);
            }
            let mut after = norm2(&w);
            if after < 1e-3 * before {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot(v, &w);
                    col[i] += hij;
                    axpy(-hij, v, &mut w);
                }
                after = norm2(&w);
            }
            col[j + 1] = S::from_real(after);

            for (i, &(c, s)) in rot.iter().enumerate() {
                let (u, v) = (col[i], col[i + 1]);
                col[i] = u.scale(c) + s * v;
                col[i + 1] = -(s.conj() * u) + v.scale(c);
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = col[j].scale(c) + s * col[j + 1];
            col[j + 1] = S::zero();
            let gj = g[j];
            g[j] = gj.scale(c);
            g.push(-(s.conj() * gj));
            rot.push((c, s));
            h.push(col);

            let resid = g[j + 1].modulus();
            stats.residual_history.push(resid / bnorm);
            if after == 0.0 || resid <= target || stats.iterations >= opts.maxit {
                break;
            }
            basis.push(w.iter().map(|v| v.scale(1.0 / after)).collect());
        }

        // Back substitution on the rotated Hessenberg system.
        let k = h.len();
        let mut y = vec![S::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= h[l][i] * y[l];
            }
            y[i] = acc / h[i][i];
        }
        let mut u = vec![S::zero(); n];
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut u);
        }
        let dx = precondition(m, &u)?;
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += *d;
        }

        let ax = a.apply(&x)?;
        r = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
        beta = norm2(&r);
        if beta <= target {
            stats.converged = true;
            break;
        }
        if stats.iterations >= opts.maxit || beta == 0.0 {
            break;
        }
    }
    stats.wall_time = start.elapsed().as_secs_f64();
    Ok((x, stats))
}

/// Preconditioned conjugate gradients for Hermitian positive definite `A`
/// and `M^{-1}`; records the Lanczos tridiagonal of the preconditioned
/// operator.
pub fn pcg<S: Scalar>(
    a: &dyn LinearOperator<S>,
    b: &[S],
    m: Option<&dyn LinearOperator<S>>,
    opts: &KrylovOptions,
) -> Result<(Vec<S>, SolveStats)> {
    opts.validate()?;
    check_rhs(a, b, m)?;
    let start = Instant::now();
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = vec![S::zero(); n];
    let mut stats = SolveStats::default();
    if bnorm == 0.0 {
        stats.residual_history.push(0.0);
        stats.converged = true;
        return Ok((x, stats));
    }
    stats.residual_history.push(1.0);
    let mut r = b.to_vec();
    let mut z = precondition(m, &r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z).real();
    let mut prev: Option<(f64, f64)> = None; // (alpha, beta) of the last step

    while stats.iterations < opts.maxit {
        let q = a.apply(&p)?;
        let curvature = dot(&p, &q).real();
        if !(curvature > 0.0) || !(rz > 0.0) {
            return Err(Error::NonPositiveCurvature {
                iteration: stats.iterations,
                curvature: if rz > 0.0 { curvature } else { rz },
            });
        }
        let alpha = rz / curvature;
        stats.iterations += 1;
        axpy(S::from_real(alpha), &p, &mut x);
        axpy(S::from_real(-alpha), &q, &mut r);
        let rel = norm2(&r) / bnorm;
        stats.residual_history.push(rel);
        stats.lanczos_diag.push(1.0 / alpha + prev.map_or(0.0, |(a, b)| b / a));
        if rel <= opts.tol {
            stats.converged = true;
            break;
        }
        z = precondition(m, &r)?;
        let rz_new = dot(&r, &z).real();
        let beta = rz_new / rz;
        rz = rz_new;
        if stats.iterations < opts.maxit {
            stats.lanczos_offdiag.push(beta.abs().sqrt() / alpha);
        }
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + pi.scale(beta);
        }
        prev = Some((alpha, beta));
    }
    stats.lanczos_offdiag.truncate(stats.lanczos_diag.len().saturating_sub(1));
    stats.wall_time = start.elapsed().as_secs_f64();
    Ok((x, stats))
}

/// Eigenvalues of the Lanczos tridiagonal, ascending.
pub fn lanczos_ritz_values(stats: &SolveStats) -> Result<Vec<f64>> {
    let k = stats.lanczos_diag.len();
    if k == 0 || stats.lanczos_offdiag.len() + 1 != k {
        return Err(Error::Structural(format!(
            "Lanczos data has {} diagonal and {} off-diagonal entries",
            k,
            stats.lanczos_offdiag.len()
        )));
    }
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            stats.lanczos_diag[i]
        } else if i + 1 == j {
            stats.lanczos_offdiag[i]
        } else if j + 1 == i {
            stats.lanczos_offdiag[j]
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `lambda_max / lambda_min` of the Lanczos tridiagonal.
pub fn estimate_condition(stats: &SolveStats) -> Result<f64> {
    let ev = lanczos_ritz_values(stats)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if !(lo > 0.0) {
        return Err(Error::Structural(format!("Lanczos matrix is not positive definite (lambda_min = {lo:e})")));
    }
    Ok(hi / lo)
}

#[cfg(test)]
mod tests;
