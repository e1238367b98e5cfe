//! Config-driven experiments: single solves, weak-scaling sweeps, overlap
//! sweeps and preconditioner comparisons, reported as CSV and text tables.

mod config;
mod pipeline;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub use config::{
    Adjacency, BcConfig, DecompositionConfig, ExperimentConfig, Format, Kind, MeshConfig, Method, OutputConfig, OverlapKind,
    PreconditionerChoice, PreconditionerConfig, ProblemConfig, SolverConfig, SolverMethod,
};
pub use pipeline::{run_point, run_row, write_artifacts, RunOutcome, RunPoint};

use crate::error::Result;
use crate::schwarz::Variant;

pub const CSV_HEADER: &str = "ranks,dofs,k,delta_over_H_pct,variant,levels,iterations,converged,kappa,walltime_s";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub ranks: usize,
    pub dofs: usize,
    pub k: usize,
    /// `max_i k h / H_i` in percent.
    pub delta_over_h_pct: Option<f64>,
    pub variant: Variant,
    pub levels: usize,
    pub iterations: usize,
    pub converged: bool,
    /// PCG runs only.
    pub kappa: Option<f64>,
    /// Partition through solve, seconds.
    pub wall_time: f64,
}

impl ExperimentRow {
    fn fields(&self, timing: bool) -> [String; 10] {
        [
            self.ranks.to_string(),
            self.dofs.to_string(),
            self.k.to_string(),
            self.delta_over_h_pct.map(|p| format!("{p:.1}")).unwrap_or_default(),
            self.variant.to_string(),
            self.levels.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.kappa.map(|k| format!("{k:.4}")).unwrap_or_default(),
            if timing { format!("{:.6}", self.wall_time) } else { String::new() },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Solve,
    Scaling,
    Overlap,
    Compare,
}

impl Study {
    /// Sweep points in output order: preconditioner, then refinement, then
    /// overlap.
    pub fn points(self, cfg: &ExperimentConfig) -> Result<Vec<RunPoint>> {
        let choices = cfg.choices()?;
        let overlaps = &cfg.decomposition.overlap;
        let (choices, refinements, overlaps): (&[PreconditionerChoice], usize, &[usize]) = match self {
            Study::Solve => (&choices[..1], 0, &overlaps[..1]),
            Study::Scaling => (&choices, cfg.mesh.refinements, overlaps),
            Study::Overlap => (&choices, 0, overlaps),
            Study::Compare => (&choices, 0, &overlaps[..1]),
        };
        let mut points = Vec::new();
        for &choice in choices {
            for refinement in 0..=refinements {
                for &k in overlaps {
                    points.push(RunPoint { refinement, k, choice });
                }
            }
        }
        Ok(points)
    }
}

/// Runs every point of the study in sweep order.
pub fn run_study(cfg: &ExperimentConfig, study: Study) -> Result<Vec<ExperimentRow>> {
    study.points(cfg)?.into_iter().map(|p| run_row(cfg, p)).collect()
}

pub fn run_scaling_study(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_study(cfg, Study::Scaling)
}

pub fn run_overlap_study(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_study(cfg, Study::Overlap)
}

pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_study(cfg, Study::Compare)
}

/// Single solve at the first overlap value with the first preconditioner.
/// With `artifacts`, also writes the solution and setup files there.
pub fn run_solve(cfg: &ExperimentConfig, artifacts: Option<&Path>) -> Result<ExperimentRow> {
    let point = Study::Solve.points(cfg)?[0];
    match cfg.problem.kind {
        Kind::Poisson => finish(run_point::<f64>(cfg, point)?, artifacts),
        Kind::Helmholtz => finish(run_point::<num_complex::Complex64>(cfg, point)?, artifacts),
    }
}

fn finish<S: crate::linalg::Scalar>(outcome: RunOutcome<S>, artifacts: Option<&Path>) -> Result<ExperimentRow> {
    if let Some(dir) = artifacts {
        write_artifacts(&outcome, dir)?;
    }
    Ok(outcome.row)
}

/// CSV with [`CSV_HEADER`]; empty fields mark missing values, and with
/// `timing == false` the wall time is left empty so output is reproducible.
pub fn rows_to_csv(rows: &[ExperimentRow], timing: bool) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        writeln!(s, "{}", r.fields(timing).join(",")).unwrap();
    }
    s
}

/// Aligned text table; unconverged runs show `>maxit`.
pub fn rows_to_table(rows: &[ExperimentRow], timing: bool, maxit: usize) -> String {
    let header = ["ranks", "dofs", "k", "delta/H %", "variant", "levels", "iterations", "converged", "kappa", "walltime s"];
    let body: Vec<[String; 10]> = rows
        .iter()
        .map(|r| {
            let mut f = r.fields(timing);
            if !r.converged {
                f[6] = format!(">{maxit}");
            }
            for x in &mut f {
                if x.is_empty() {
                    *x = "-".into();
                }
            }
            f
        })
        .collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for f in &body {
        for (w, x) in width.iter_mut().zip(f) {
            *w = (*w).max(x.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells.zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        writeln!(s, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&mut s, &mut header.iter().copied());
    writeln!(s, "{}", "-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1))).unwrap();
    for f in &body {
        line(&mut s, &mut f.iter().map(String::as_str));
    }
    s
}

/// Iterations laid out with one line per `(variant, levels, ranks)` and one
/// column per overlap value, headed by `k` and `delta/H`.
pub fn overlap_table(rows: &[ExperimentRow], maxit: usize) -> String {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut keys: Vec<(Variant, usize, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.variant, r.levels, r.ranks, r.dofs);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut header = vec!["variant".to_string(), "levels".into(), "ranks".into(), "dofs".into()];
    for &k in &ks {
        let pct = rows
            .iter()
            .find(|r| r.k == k)
            .and_then(|r| r.delta_over_h_pct)
            .map(|p| format!(" ({p:.1}%)"))
            .unwrap_or_default();
        header.push(format!("k={k}{pct}"));
    }
    let mut body = Vec::new();
    for &(v, l, n, d) in &keys {
        let mut line = vec![v.to_string(), l.to_string(), n.to_string(), d.to_string()];
        for &k in &ks {
            let cell = rows
                .iter()
                .find(|r| (r.variant, r.levels, r.ranks, r.dofs, r.k) == (v, l, n, d, k))
                .map(|r| if r.converged { r.iterations.to_string() } else { format!(">{maxit}") })
                .unwrap_or_else(|| "-".into());
            line.push(cell);
        }
        body.push(line);
    }
    let mut width: Vec<usize> = header.iter().map(String::len).collect();
    for line in &body {
        for (w, x) in width.iter_mut().zip(line) {
            *w = (*w).max(x.len());
        }
    }
    let mut s = String::new();
    for line in std::iter::once(&header).chain(&body) {
        let parts: Vec<String> = line.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        writeln!(s, "{}", parts.join("  ")).unwrap();
    }
    s
}

/// Writes `results.csv` and `results.txt` into `dir`.
pub fn write_results(dir: &Path, rows: &[ExperimentRow], timing: bool, maxit: usize, study: Study) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), rows_to_csv(rows, timing))?;
    let mut text = rows_to_table(rows, timing, maxit);
    if matches!(study, Study::Scaling | Study::Overlap) {
        text.push('\n');
        text.push_str(&overlap_table(rows, maxit));
    }
    fs::write(dir.join("results.txt"), text)?;
    Ok(())
}
