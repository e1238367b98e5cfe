//! One- and two-level overlapping Schwarz preconditioners.

mod coarse;
mod operators;

use std::fmt;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

pub use coarse::CoarseLevel;
pub use operators::{combine, schwarz_operator, CombineMode, CombinedOperator, SchwarzOperator};

use crate::assembly::{assemble_local_robin, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{check_dims, CsrMatrix, LinearOperator, LuFactorization, Scalar};
use crate::mesh::{build_local_mesh, Mesh};
use crate::partition::{OverlapMode, OverlappingDecomposition, ScalingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `sum P_i A_i^{-1} R_i`
    As,
    /// `sum P^_i A_i^{-1} R_i`
    Ras,
    /// `sum P_i D_i A_i^{-1} R_i`, inverse-multiplicity `D_i`
    Sas,
    /// `sum P_i B_i^{-1} R_i`
    Oas,
    /// `sum P_i D_i B_i^{-1} R_i`
    Oras,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::As, Variant::Ras, Variant::Sas, Variant::Oas, Variant::Oras];

    /// Uses separately assembled Robin matrices `B_i`.
    pub fn is_optimized(self) -> bool {
        matches!(self, Variant::Oas | Variant::Oras)
    }

    /// Scaling applied after the local solve; `None` means `D_i = I`.
    pub fn default_scaling(self) -> Option<ScalingMode> {
        match self {
            Variant::As | Variant::Oas => None,
            Variant::Ras | Variant::Oras => Some(ScalingMode::Restricted),
            Variant::Sas => Some(ScalingMode::Multiplicity),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::As => "AS",
            Variant::Ras => "RAS",
            Variant::Sas => "SAS",
            Variant::Oas => "OAS",
            Variant::Oras => "ORAS",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}' (expected AS, RAS, SAS, OAS or ORAS)")))
    }
}

/// Where the local matrices come from.
pub enum LocalSource<S: Scalar> {
    /// Principal submatrices of `A` on the interior dofs (AS, RAS, SAS).
    Extract,
    /// One matrix per subdomain on the full `V_i`, in ascending global order
    /// (OAS, ORAS).
    Assembled(Vec<CsrMatrix<S>>),
}

/// One local solve `P_i D_i (local)^{-1} R~_i`.
#[derive(Debug)]
pub struct LocalSolver<S: Scalar> {
    /// Global dof of each local unknown, ascending.
    pub dofs: Vec<usize>,
    /// Local positions whose residual entries are zeroed before the solve.
    pub zeroed: Vec<usize>,
    /// Diagonal of `D_i`; `None` for the identity.
    pub weights: Option<Vec<f64>>,
    pub factor: LuFactorization<S>,
    pub matrix_nnz: usize,
}

impl<S: Scalar> LocalSolver<S> {
    /// `(local)^{-1} R~_i r`, before scaling.
    fn solve(&self, r: &[S]) -> Result<Vec<S>> {
        let mut v: Vec<S> = self.dofs.iter().map(|&d| r[d]).collect();
        for &z in &self.zeroed {
            v[z] = S::zero();
        }
        self.factor.solve_in_place(&mut v)?;
        if let Some(w) = &self.weights {
            for (x, &wi) in v.iter_mut().zip(w) {
                *x = x.scale(wi);
            }
        }
        Ok(v)
    }
}

/// Per-subdomain sizes for setup reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdomainReport {
    pub subdomain: usize,
    pub dofs: usize,
    pub local_unknowns: usize,
    pub interior: usize,
    pub interface: usize,
    pub owned: usize,
    pub matrix_nnz: usize,
    pub factor_nnz: usize,
}

#[derive(Debug)]
pub struct SchwarzPreconditioner<S: Scalar> {
    variant: Variant,
    n: usize,
    locals: Vec<LocalSolver<S>>,
    owner: Vec<usize>,
    n_subdomains: usize,
    coarse: Option<CoarseLevel<S>>,
    report: Vec<SubdomainReport>,
}

impl<S: Scalar> SchwarzPreconditioner<S> {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n_subdomains(&self) -> usize {
        self.n_subdomains
    }

    pub fn levels(&self) -> usize {
        if self.coarse.is_some() {
            2
        } else {
            1
        }
    }

    pub fn locals(&self) -> &[LocalSolver<S>] {
        &self.locals
    }

    pub fn coarse(&self) -> Option<&CoarseLevel<S>> {
        self.coarse.as_ref()
    }

    pub fn report(&self) -> &[SubdomainReport] {
        &self.report
    }

    /// CSV setup report, one row per subdomain plus the coarse level.
    pub fn write_setup_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("subdomain,dofs,local_unknowns,interior,interface,owned,matrix_nnz,factor_nnz\n");
        for r in &self.report {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.subdomain, r.dofs, r.local_unknowns, r.interior, r.interface, r.owned, r.matrix_nnz, r.factor_nnz
            )
            .unwrap();
        }
        if let Some(c) = &self.coarse {
            let n = c.dim();
            writeln!(s, "coarse,{n},{n},{n},0,{n},{},{}", c.matrix_nnz(), c.factor_nnz()).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

impl<S: Scalar> LinearOperator<S> for SchwarzPreconditioner<S> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, r: &[S], z: &mut [S]) -> Result<()> {
        check_dims(self.n, r, z)?;
        // Solve privately in parallel, then accumulate in subdomain order.
        let parts: Vec<Vec<S>> = self.locals.par_iter().map(|l| l.solve(r)).collect::<Result<_>>()?;
        z.fill(S::zero());
        for (l, v) in self.locals.iter().zip(&parts) {
            for (&d, &x) in l.dofs.iter().zip(v) {
                z[d] += x;
            }
        }
        if let Some(c) = &self.coarse {
            c.add_correction(r, z)?;
        }
        Ok(())
    }
}

/// `A_i` on the interior dofs of every subdomain.
pub fn local_dirichlet_matrices<S: Scalar>(a: &CsrMatrix<S>, decomp: &OverlappingDecomposition) -> Result<Vec<CsrMatrix<S>>> {
    check_global(a, decomp)?;
    decomp
        .subdomains()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.interior.is_empty() {
                return Err(empty_interior(i));
            }
            a.extract_submatrix(&s.interior, &s.interior)
        })
        .collect()
}

fn empty_interior(i: usize) -> Error {
    Error::Config(format!(
        "subdomain {i} has no interior dofs; use fewer subdomains or fewer overlap layers"
    ))
}

fn check_global<S: Scalar>(a: &CsrMatrix<S>, decomp: &OverlappingDecomposition) -> Result<()> {
    if a.n_rows() != a.n_cols() || a.n_rows() != decomp.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: decomp.n_dofs(),
            actual: a.n_rows(),
        });
    }
    Ok(())
}

/// Robin matrices `B_i` assembled on the local meshes of an element-based
/// decomposition.
pub fn assemble_robin_matrices<S: Scalar>(
    mesh: &Mesh,
    decomp: &OverlappingDecomposition,
    spec: &ProblemSpec,
    alpha: Complex64,
) -> Result<Vec<CsrMatrix<S>>> {
    if decomp.mode() != OverlapMode::Elements {
        return Err(Error::Config("Robin matrices need an element-based decomposition".into()));
    }
    decomp
        .subdomains()
        .par_iter()
        .map(|s| {
            let local = build_local_mesh(mesh, &s.elements)?;
            assemble_local_robin(&local, spec, alpha)
        })
        .collect()
}

/// Builds the one-level preconditioner with the variant's default scaling.
pub fn build_one_level<S: Scalar>(
    a: &CsrMatrix<S>,
    decomp: &OverlappingDecomposition,
    variant: Variant,
    source: LocalSource<S>,
) -> Result<SchwarzPreconditioner<S>> {
    build_one_level_scaled(a, decomp, variant, source, variant.default_scaling())
}

/// Like [`build_one_level`] with an explicit scaling (`None` for `D_i = I`).
pub fn build_one_level_scaled<S: Scalar>(
    a: &CsrMatrix<S>,
    decomp: &OverlappingDecomposition,
    variant: Variant,
    source: LocalSource<S>,
    scaling: Option<ScalingMode>,
) -> Result<SchwarzPreconditioner<S>> {
    check_global(a, decomp)?;
    let subs = decomp.subdomains();
    let matrices = match (variant.is_optimized(), source) {
        (false, LocalSource::Extract) => {
            check_dirichlet_coverage(decomp, variant)?;
            local_dirichlet_matrices(a, decomp)?
        }
        (true, LocalSource::Assembled(b)) => {
            if b.len() != subs.len() {
                return Err(Error::DimensionMismatch {
                    expected: subs.len(),
                    actual: b.len(),
                });
            }
            for (s, m) in subs.iter().zip(&b) {
                if m.n_rows() != s.dofs.len() || m.n_cols() != s.dofs.len() {
                    return Err(Error::DimensionMismatch {
                        expected: s.dofs.len(),
                        actual: m.n_rows(),
                    });
                }
            }
            b
        }
        (false, LocalSource::Assembled(_)) => {
            return Err(Error::Config(format!("{variant} extracts its local matrices from A")));
        }
        (true, LocalSource::Extract) => {
            return Err(Error::Config(format!("{variant} needs separately assembled Robin matrices")));
        }
    };

    let owner = decomp.owner();
    let mult = decomp.multiplicity();
    let factors: Vec<LuFactorization<S>> = matrices
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            LuFactorization::new(m).map_err(|e| Error::SubdomainFactorization {
                subdomain: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut locals = Vec::with_capacity(subs.len());
    let mut report = Vec::with_capacity(subs.len());
    for (i, ((s, m), factor)) in subs.iter().zip(&matrices).zip(factors).enumerate() {
        let dofs = if variant.is_optimized() { s.dofs.clone() } else { s.interior.clone() };
        let zeroed = if variant.is_optimized() {
            s.interface.iter().map(|d| s.dofs.binary_search(d).expect("interface dof in V_i")).collect()
        } else {
            Vec::new()
        };
        let weights = scaling.map(|mode| {
            dofs.iter()
                .map(|&d| match mode {
                    ScalingMode::Restricted => f64::from(u8::from(owner[d] == i)),
                    ScalingMode::Multiplicity => 1.0 / mult[d] as f64,
                })
                .collect()
        });
        report.push(SubdomainReport {
            subdomain: i,
            dofs: s.dofs.len(),
            local_unknowns: dofs.len(),
            interior: s.interior.len(),
            interface: s.interface.len(),
            owned: s.owned.len(),
            matrix_nnz: m.nnz(),
            factor_nnz: factor.factor_nnz(),
        });
        locals.push(LocalSolver {
            dofs,
            zeroed,
            weights,
            factor,
            matrix_nnz: m.nnz(),
        });
    }

    Ok(SchwarzPreconditioner {
        variant,
        n: decomp.n_dofs(),
        locals,
        owner: owner.to_vec(),
        n_subdomains: subs.len(),
        coarse: None,
        report,
    })
}

/// Dirichlet local problems must jointly cover every dof, and restricted
/// prolongation needs each owned dof inside its owner's interior.
fn check_dirichlet_coverage(decomp: &OverlappingDecomposition, variant: Variant) -> Result<()> {
    if let Some(i) = decomp.subdomains().iter().position(|s| s.interior.is_empty()) {
        return Err(empty_interior(i));
    }
    let uncovered = decomp.uncovered_dofs();
    if !uncovered.is_empty() {
        return Err(Error::Config(format!(
            "{} dofs (first: {}) lie on the interface of every subdomain containing them; \
             increase the overlap or grow it through shared vertices",
            uncovered.len(),
            uncovered[0]
        )));
    }
    if variant == Variant::Ras {
        for (i, s) in decomp.subdomains().iter().enumerate() {
            if let Some(d) = s.owned.iter().find(|d| s.interior.binary_search(d).is_err()) {
                return Err(Error::Config(format!(
                    "RAS: dof {d} owned by subdomain {i} is on its interface; RAS needs overlap k >= 1"
                )));
            }
        }
    }
    Ok(())
}

/// Adds the partition-of-unity coarse level (one constant per subdomain)
/// additively.
pub fn build_two_level<S: Scalar>(m1: SchwarzPreconditioner<S>, a: &CsrMatrix<S>) -> Result<SchwarzPreconditioner<S>> {
    if m1.coarse.is_some() {
        return Err(Error::Config("preconditioner already has a coarse level".into()));
    }
    if a.n_rows() != m1.n {
        return Err(Error::DimensionMismatch {
            expected: m1.n,
            actual: a.n_rows(),
        });
    }
    let coarse = CoarseLevel::new(a, &m1.owner, m1.n_subdomains)?;
    Ok(SchwarzPreconditioner {
        coarse: Some(coarse),
        ..m1
    })
}

#[cfg(test)]
mod tests;
