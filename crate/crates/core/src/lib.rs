//! One- and two-level overlapping Schwarz preconditioners (AS, RAS, SAS, OAS,
//! ORAS) for Q1 finite element discretizations of Poisson and Helmholtz
//! problems on rectangles, together with the Krylov solvers and experiment
//! harness used to study their iteration counts.

pub mod error;
pub mod linalg;
pub mod mesh;
pub mod partition;
pub mod assembly;
pub mod schwarz;
pub mod krylov;
pub mod experiment;

pub use error::{Error, Result};
