//! C ABI for `schwarz-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` / `*_build`
//! / `*_load` functions and released with the matching `*_free`. Every
//! fallible call returns a [`SchwarzStatus`]; on failure the message is
//! available from [`schwarz_last_error`] on the same thread. Complex vectors
//! are interleaved `(re, im)` pairs of doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use schwarz_core::experiment::{run_solve, ExperimentConfig, ExperimentRow};
use schwarz_core::krylov::{gmres, KrylovOptions, SolveStats};
use schwarz_core::linalg::{CsrMatrix, LinearOperator, Scalar};
use schwarz_core::mesh::node_graph;
use schwarz_core::partition::{extend_overlap_nodes, partition_graph_greedy, PartitionKind};
use schwarz_core::schwarz::{build_one_level, build_two_level, LocalSource, Variant};
use schwarz_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwarzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Singular = 4,
    Config = 5,
    Parse = 6,
    Io = 7,
    /// Breakdown inside a Krylov method, e.g. a non-SPD operator in CG.
    Numerical = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchwarzVariant {
    As = 0,
    Ras = 1,
    Sas = 2,
    Oas = 3,
    Oras = 4,
}

impl From<SchwarzVariant> for Variant {
    fn from(v: SchwarzVariant) -> Self {
        match v {
            SchwarzVariant::As => Variant::As,
            SchwarzVariant::Ras => Variant::Ras,
            SchwarzVariant::Sas => Variant::Sas,
            SchwarzVariant::Oas => Variant::Oas,
            SchwarzVariant::Oras => Variant::Oras,
        }
    }
}

impl From<Variant> for SchwarzVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::As => SchwarzVariant::As,
            Variant::Ras => SchwarzVariant::Ras,
            Variant::Sas => SchwarzVariant::Sas,
            Variant::Oas => SchwarzVariant::Oas,
            Variant::Oras => SchwarzVariant::Oras,
        }
    }
}

/// Outcome of an iterative solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SchwarzSolveInfo {
    pub iterations: usize,
    pub converged: bool,
    /// Last relative residual `||b - A x|| / ||b||`.
    pub relative_residual: f64,
    pub wall_time: f64,
}

impl From<&SolveStats> for SchwarzSolveInfo {
    fn from(s: &SolveStats) -> Self {
        Self {
            iterations: s.iterations,
            converged: s.converged,
            relative_residual: s.residual_history.last().copied().unwrap_or(0.0),
            wall_time: s.wall_time,
        }
    }
}

/// One experiment result; missing values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzRow {
    pub ranks: usize,
    pub dofs: usize,
    pub k: usize,
    pub delta_over_h_pct: f64,
    pub variant: SchwarzVariant,
    pub levels: usize,
    pub iterations: usize,
    pub converged: bool,
    pub kappa: f64,
    pub wall_time: f64,
}

impl From<&ExperimentRow> for SchwarzRow {
    fn from(r: &ExperimentRow) -> Self {
        Self {
            ranks: r.ranks,
            dofs: r.dofs,
            k: r.k,
            delta_over_h_pct: r.delta_over_h_pct.unwrap_or(f64::NAN),
            variant: r.variant.into(),
            levels: r.levels,
            iterations: r.iterations,
            converged: r.converged,
            kappa: r.kappa.unwrap_or(f64::NAN),
            wall_time: r.wall_time,
        }
    }
}

/// Real sparse matrix.
pub struct SchwarzMatrix(CsrMatrix<f64>);
/// Complex sparse matrix.
pub struct SchwarzComplexMatrix(CsrMatrix<Complex64>);
/// Real Schwarz preconditioner.
pub struct SchwarzPreconditioner(schwarz_core::schwarz::SchwarzPreconditioner<f64>);
/// Complex Schwarz preconditioner.
pub struct SchwarzComplexPreconditioner(schwarz_core::schwarz::SchwarzPreconditioner<Complex64>);
/// Parsed experiment configuration.
pub struct SchwarzExperiment(ExperimentConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SchwarzStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> SchwarzStatus {
    match e {
        Error::Structural(_) => SchwarzStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => SchwarzStatus::DimensionMismatch,
        Error::Singular { .. } | Error::SubdomainFactorization { .. } => SchwarzStatus::Singular,
        Error::Mesh(_) | Error::Partition(_) | Error::Config(_) | Error::Field(_) => SchwarzStatus::Config,
        Error::NonPositiveCurvature { .. } => SchwarzStatus::Numerical,
        Error::Stage { source, .. } | Error::Run { source, .. } => status_of(source),
        Error::Parse { .. } => SchwarzStatus::Parse,
        Error::Io(_) => SchwarzStatus::Io,
    }
}

fn null() -> Failure {
    Failure(SchwarzStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SchwarzStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SchwarzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SchwarzStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SchwarzStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize) -> Result<&'a mut [T], Failure> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn schwarz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn schwarz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn csr_parts<S: Copy>(
    n: usize,
    row_offsets: *const usize,
    col_indices: *const usize,
    values: *const S,
) -> Result<CsrMatrix<S>, Failure>
where
    S: Scalar,
{
    let rows = slice(row_offsets, n + 1)?;
    let nnz = rows[n];
    let cols = slice(col_indices, nnz)?;
    let vals = slice(values, nnz)?;
    Ok(CsrMatrix::try_from_parts(n, n, rows.to_vec(), cols.to_vec(), vals.to_vec())?)
}

/// Copies an `n x n` CSR matrix (`row_offsets` has `n + 1` entries, columns
/// strictly increasing within a row).
///
/// # Safety
/// The arrays must hold `n + 1` and `row_offsets[n]` readable elements.
#[no_mangle]
pub unsafe extern "C" fn schwarz_matrix_new(
    n: usize,
    row_offsets: *const usize,
    col_indices: *const usize,
    values: *const f64,
    out: *mut *mut SchwarzMatrix,
) -> SchwarzStatus {
    guard(|| out_ptr(out, SchwarzMatrix(csr_parts(n, row_offsets, col_indices, values)?)))
}

/// Complex version of [`schwarz_matrix_new`]; `values` holds `2 nnz`
/// doubles.
///
/// # Safety
/// As for [`schwarz_matrix_new`].
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_matrix_new(
    n: usize,
    row_offsets: *const usize,
    col_indices: *const usize,
    values: *const f64,
    out: *mut *mut SchwarzComplexMatrix,
) -> SchwarzStatus {
    guard(|| {
        let m = csr_parts(n, row_offsets, col_indices, values.cast::<Complex64>())?;
        out_ptr(out, SchwarzComplexMatrix(m))
    })
}

/// # Safety
/// `m` must come from [`schwarz_matrix_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_matrix_free(m: *mut SchwarzMatrix) {
    free(m)
}

/// # Safety
/// `m` must come from [`schwarz_complex_matrix_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_matrix_free(m: *mut SchwarzComplexMatrix) {
    free(m)
}

/// # Safety
/// `m` must be a live handle; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn schwarz_matrix_dim(m: *const SchwarzMatrix, dim: *mut usize) -> SchwarzStatus {
    guard(|| {
        let m = handle(m)?;
        *dim.as_mut().ok_or_else(null)? = m.0.n_rows();
        Ok(())
    })
}

fn algebraic<S: Scalar>(
    a: &CsrMatrix<S>,
    n_parts: usize,
    overlap: usize,
    variant: SchwarzVariant,
    levels: usize,
    seed: i64,
) -> Result<schwarz_core::schwarz::SchwarzPreconditioner<S>, Failure> {
    let variant = Variant::from(variant);
    if variant.is_optimized() {
        return Err(invalid("OAS and ORAS need mesh-assembled Robin matrices; use an experiment instead"));
    }
    if !(1..=2).contains(&levels) {
        return Err(invalid(format!("levels must be 1 or 2, got {levels}")));
    }
    let graph = node_graph(a);
    let seed = u64::try_from(seed).ok();
    let p = partition_graph_greedy(&graph, n_parts, seed, PartitionKind::Nodes)?;
    let d = extend_overlap_nodes(&p, &graph, overlap)?;
    let m1 = build_one_level(a, &d, variant, LocalSource::Extract)?;
    Ok(if levels == 2 { build_two_level(m1, a)? } else { m1 })
}

/// Fully algebraic AS/RAS/SAS preconditioner: greedy partition of the
/// matrix graph into `n_parts`, `overlap` layers of graph neighbours, and a
/// coarse level when `levels == 2`. A negative `seed` grows parts from the
/// lowest-numbered free row.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn schwarz_preconditioner_build(
    a: *const SchwarzMatrix,
    n_parts: usize,
    overlap: usize,
    variant: SchwarzVariant,
    levels: usize,
    seed: i64,
    out: *mut *mut SchwarzPreconditioner,
) -> SchwarzStatus {
    guard(|| {
        let pc = algebraic(&handle(a)?.0, n_parts, overlap, variant, levels, seed)?;
        out_ptr(out, SchwarzPreconditioner(pc))
    })
}

/// Complex version of [`schwarz_preconditioner_build`].
///
/// # Safety
/// As for [`schwarz_preconditioner_build`].
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_preconditioner_build(
    a: *const SchwarzComplexMatrix,
    n_parts: usize,
    overlap: usize,
    variant: SchwarzVariant,
    levels: usize,
    seed: i64,
    out: *mut *mut SchwarzComplexPreconditioner,
) -> SchwarzStatus {
    guard(|| {
        let pc = algebraic(&handle(a)?.0, n_parts, overlap, variant, levels, seed)?;
        out_ptr(out, SchwarzComplexPreconditioner(pc))
    })
}

/// # Safety
/// `p` must come from [`schwarz_preconditioner_build`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_preconditioner_free(p: *mut SchwarzPreconditioner) {
    free(p)
}

/// # Safety
/// `p` must come from [`schwarz_complex_preconditioner_build`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_preconditioner_free(p: *mut SchwarzComplexPreconditioner) {
    free(p)
}

/// `z = M^{-1} r` for vectors of length `n`.
///
/// # Safety
/// `r` and `z` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn schwarz_preconditioner_apply(
    p: *const SchwarzPreconditioner,
    n: usize,
    r: *const f64,
    z: *mut f64,
) -> SchwarzStatus {
    guard(|| Ok(handle(p)?.0.apply_into(slice(r, n)?, slice_mut(z, n)?)?))
}

/// Complex `z = M^{-1} r`; `r` and `z` hold `2 n` doubles.
///
/// # Safety
/// As for [`schwarz_preconditioner_apply`].
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_preconditioner_apply(
    p: *const SchwarzComplexPreconditioner,
    n: usize,
    r: *const f64,
    z: *mut f64,
) -> SchwarzStatus {
    guard(|| {
        let r = slice(r.cast::<Complex64>(), n)?;
        let z = slice_mut(z.cast::<Complex64>(), n)?;
        Ok(handle(p)?.0.apply_into(r, z)?)
    })
}

fn options(tol: f64, maxit: usize, restart: usize) -> KrylovOptions {
    KrylovOptions {
        tol,
        maxit,
        restart: (restart > 0).then_some(restart),
    }
}

fn solve<S: Scalar>(
    a: &CsrMatrix<S>,
    m: Option<&dyn LinearOperator<S>>,
    b: &[S],
    x: &mut [S],
    opts: KrylovOptions,
    info: *mut SchwarzSolveInfo,
) -> Result<(), Failure> {
    let (sol, stats) = gmres(a, b, m, &opts)?;
    x.copy_from_slice(&sol);
    if let Some(info) = unsafe { info.as_mut() } {
        *info = (&stats).into();
    }
    Ok(())
}

/// Right-preconditioned GMRES from a zero initial guess. `m` may be NULL
/// for no preconditioner; `restart == 0` runs full GMRES. Hitting `maxit`
/// is not an error: check `info->converged`.
///
/// # Safety
/// `b` and `x` must hold `n` doubles; `info` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_gmres(
    a: *const SchwarzMatrix,
    m: *const SchwarzPreconditioner,
    n: usize,
    b: *const f64,
    x: *mut f64,
    tol: f64,
    maxit: usize,
    restart: usize,
    info: *mut SchwarzSolveInfo,
) -> SchwarzStatus {
    guard(|| {
        let a = &handle(a)?.0;
        let m = m.as_ref().map(|p| &p.0 as &dyn LinearOperator<f64>);
        solve(a, m, slice(b, n)?, slice_mut(x, n)?, options(tol, maxit, restart), info)
    })
}

/// Complex version of [`schwarz_gmres`]; `b` and `x` hold `2 n` doubles.
///
/// # Safety
/// As for [`schwarz_gmres`].
#[no_mangle]
pub unsafe extern "C" fn schwarz_complex_gmres(
    a: *const SchwarzComplexMatrix,
    m: *const SchwarzComplexPreconditioner,
    n: usize,
    b: *const f64,
    x: *mut f64,
    tol: f64,
    maxit: usize,
    restart: usize,
    info: *mut SchwarzSolveInfo,
) -> SchwarzStatus {
    guard(|| {
        let a = &handle(a)?.0;
        let m = m.as_ref().map(|p| &p.0 as &dyn LinearOperator<Complex64>);
        let b = slice(b.cast::<Complex64>(), n)?;
        let x = slice_mut(x.cast::<Complex64>(), n)?;
        solve(a, m, b, x, options(tol, maxit, restart), info)
    })
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid("string is not UTF-8"))
}

/// Parses an experiment configuration from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn schwarz_experiment_from_toml(toml: *const c_char, out: *mut *mut SchwarzExperiment) -> SchwarzStatus {
    guard(|| out_ptr(out, SchwarzExperiment(ExperimentConfig::from_toml(c_str(toml)?)?)))
}

/// Reads an experiment configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn schwarz_experiment_load(path: *const c_char, out: *mut *mut SchwarzExperiment) -> SchwarzStatus {
    guard(|| out_ptr(out, SchwarzExperiment(ExperimentConfig::load(Path::new(c_str(path)?))?)))
}

/// # Safety
/// `e` must come from an experiment constructor or be NULL.
#[no_mangle]
pub unsafe extern "C" fn schwarz_experiment_free(e: *mut SchwarzExperiment) {
    free(e)
}

/// Runs the experiment's single solve. With a non-NULL `artifacts_dir`, the
/// solution, residual history, setup report, decomposition and mesh are
/// written there.
///
/// # Safety
/// `e` must be a live handle, `row` writable, `artifacts_dir` NULL or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn schwarz_experiment_solve(
    e: *const SchwarzExperiment,
    artifacts_dir: *const c_char,
    row: *mut SchwarzRow,
) -> SchwarzStatus {
    guard(|| {
        let cfg = &handle(e)?.0;
        let row = row.as_mut().ok_or_else(null)?;
        let dir = if artifacts_dir.is_null() {
            None
        } else {
            Some(Path::new(c_str(artifacts_dir)?))
        };
        *row = (&run_solve(cfg, dir)?).into();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping_follows_the_source_chain() {
        let e = Error::Run {
            context: "x".into(),
            source: Box::new(Error::Singular { column: 3 }),
        };
        assert_eq!(status_of(&e), SchwarzStatus::Singular);
        assert_eq!(status_of(&Error::Config("c".into())), SchwarzStatus::Config);
    }

    #[test]
    fn panics_become_status_codes() {
        assert_eq!(guard(|| panic!("boom")), SchwarzStatus::Panic);
        let msg = unsafe { CStr::from_ptr(schwarz_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
        assert_eq!(guard(|| Ok(())), SchwarzStatus::Ok);
        assert!(schwarz_last_error().is_null());
    }
}
