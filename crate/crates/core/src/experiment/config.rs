use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use crate::assembly::{BoundaryCondition, Coefficient, ProblemKind, ProblemSpec, Trace};
use crate::error::{Error, Result};
use crate::krylov::KrylovOptions;
use crate::mesh::{MarkScheme, Side};
use crate::partition::ScalingMode;
use crate::schwarz::Variant;

/// Experiment description, read from a TOML file with the sections
/// `problem`, `mesh`, `bc`, `decomposition`, `preconditioner`, `solver`
/// and `output`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default)]
    pub preconditioner: PreconditionerConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Poisson,
    Helmholtz,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Kind,
    /// Constant volume source.
    #[serde(default)]
    pub source: f64,
    /// Wavenumber; `wavelength` sets `omega = 2 pi / wavelength` instead.
    pub omega: Option<f64>,
    pub wavelength: Option<f64>,
    /// Multiplier of the `omega^2` term outside the strip.
    #[serde(default = "one")]
    pub coefficient: f64,
    /// `[x0, x1]` of a vertical strip carrying `strip_coefficient`.
    pub strip: Option<[f64; 2]>,
    pub strip_coefficient: Option<f64>,
    /// Gaussian incident trace `amplitude exp(-decay (x - center)^2)`;
    /// without `incident_decay` the trace is the constant `amplitude`.
    pub incident_center: Option<f64>,
    pub incident_decay: Option<f64>,
    #[serde(default = "one")]
    pub incident_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
    /// Uniform refinements used by the scaling study.
    #[serde(default)]
    pub refinements: usize,
}

/// Condition on each side: `dirichlet`, `neumann`, `absorbing` or `incident`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default = "dirichlet")]
    pub bottom: String,
    #[serde(default = "dirichlet")]
    pub right: String,
    #[serde(default = "dirichlet")]
    pub top: String,
    #[serde(default = "dirichlet")]
    pub left: String,
    #[serde(default)]
    pub dirichlet_value: f64,
}

impl Default for BcConfig {
    fn default() -> Self {
        Self {
            bottom: dirichlet(),
            right: dirichlet(),
            top: dirichlet(),
            left: dirichlet(),
            dirichlet_value: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Geometric,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapKind {
    Element,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    /// Cells sharing a vertex.
    Vertex,
    /// Cells sharing an edge (dual graph).
    Edge,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionConfig {
    #[serde(default = "geometric")]
    pub method: Method,
    #[serde(default = "one_usize")]
    pub px: usize,
    #[serde(default = "one_usize")]
    pub py: usize,
    /// Part count for `method = "graph"`.
    pub parts: Option<usize>,
    /// Random seeds for graph partitioning; lowest-index seeds without it.
    pub seed: Option<u64>,
    #[serde(default = "default_overlap")]
    pub overlap: Vec<usize>,
    #[serde(default = "element")]
    pub overlap_mode: OverlapKind,
    #[serde(default = "vertex")]
    pub overlap_adjacency: Adjacency,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            method: Method::Geometric,
            px: 1,
            py: 1,
            parts: None,
            seed: None,
            overlap: default_overlap(),
            overlap_mode: OverlapKind::Element,
            overlap_adjacency: Adjacency::Vertex,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreconditionerConfig {
    #[serde(default = "ras")]
    pub variant: String,
    #[serde(default = "one_usize")]
    pub levels: usize,
    /// Robin parameter `alpha + i alpha_im` for OAS/ORAS.
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default)]
    pub alpha_im: f64,
    /// `restricted` or `multiplicity`; the variant default when absent.
    pub scaling: Option<String>,
    /// Preconditioners run by the studies, as `variant` or `variant:levels`.
    /// Defaults to the single `variant` / `levels` pair.
    #[serde(default)]
    pub variants: Vec<String>,
}

impl Default for PreconditionerConfig {
    fn default() -> Self {
        Self {
            variant: ras(),
            levels: 1,
            alpha: 1.0,
            alpha_im: 0.0,
            scaling: None,
            variants: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Gmres,
    Pcg,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "gmres")]
    pub method: SolverMethod,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    pub restart: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Gmres,
            tol: default_tol(),
            maxit: default_maxit(),
            restart: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// What goes to stdout; both files are always written.
    #[serde(default = "table")]
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            format: Format::Table,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn dirichlet() -> String {
    "dirichlet".into()
}
fn geometric() -> Method {
    Method::Geometric
}
fn element() -> OverlapKind {
    OverlapKind::Element
}
fn vertex() -> Adjacency {
    Adjacency::Vertex
}
fn default_overlap() -> Vec<usize> {
    vec![1]
}
fn ras() -> String {
    "ras".into()
}
fn gmres() -> SolverMethod {
    SolverMethod::Gmres
}
fn default_tol() -> f64 {
    1e-8
}
fn default_maxit() -> usize {
    1000
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn table() -> Format {
    Format::Table
}

/// One preconditioner of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreconditionerChoice {
    pub variant: Variant,
    pub levels: usize,
}

impl PreconditionerChoice {
    fn parse(s: &str, default_levels: usize) -> Result<Self> {
        let (v, l) = match s.split_once(':') {
            Some((v, l)) => (
                v,
                l.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad level count in '{s}'")))?,
            ),
            None => (s, default_levels),
        };
        let choice = Self {
            variant: v.trim().parse()?,
            levels: l,
        };
        if !(1..=2).contains(&choice.levels) {
            return Err(Error::Config(format!("levels must be 1 or 2, got {}", choice.levels)));
        }
        Ok(choice)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<inline>"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.decomposition.overlap.is_empty() {
            return Err(Error::Config("decomposition.overlap must list at least one layer count".into()));
        }
        if self.decomposition.method == Method::Graph && self.decomposition.parts.is_none() {
            return Err(Error::Config("graph partitioning needs decomposition.parts".into()));
        }
        self.choices()?;
        self.scaling()?;
        self.problem_spec()?;
        self.krylov_options().validate()?;
        Ok(())
    }

    pub fn choices(&self) -> Result<Vec<PreconditionerChoice>> {
        let p = &self.preconditioner;
        if p.variants.is_empty() {
            return Ok(vec![PreconditionerChoice::parse(&p.variant, p.levels)?]);
        }
        p.variants.iter().map(|s| PreconditionerChoice::parse(s, 1)).collect()
    }

    pub fn scaling(&self) -> Result<Option<ScalingMode>> {
        match self.preconditioner.scaling.as_deref() {
            None => Ok(None),
            Some("restricted") => Ok(Some(ScalingMode::Restricted)),
            Some("multiplicity") => Ok(Some(ScalingMode::Multiplicity)),
            Some(other) => Err(Error::Config(format!("unknown scaling '{other}'"))),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.preconditioner.alpha, self.preconditioner.alpha_im)
    }

    pub fn omega(&self) -> Result<f64> {
        match (self.problem.omega, self.problem.wavelength) {
            (Some(_), Some(_)) => Err(Error::Config("give either omega or wavelength, not both".into())),
            (Some(w), None) => Ok(w),
            (None, Some(l)) if l > 0.0 => Ok(2.0 * PI / l),
            (None, Some(l)) => Err(Error::Config(format!("wavelength must be positive, got {l}"))),
            (None, None) => Ok(0.0),
        }
    }

    /// Each side is its own boundary mark, named after the side.
    pub fn mark_scheme(&self) -> MarkScheme {
        MarkScheme {
            bottom: "bottom".into(),
            right: "right".into(),
            top: "top".into(),
            left: "left".into(),
        }
    }

    fn side_condition(&self, side: Side) -> &str {
        match side {
            Side::Bottom => &self.bc.bottom,
            Side::Right => &self.bc.right,
            Side::Top => &self.bc.top,
            Side::Left => &self.bc.left,
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec> {
        let p = &self.problem;
        let omega = self.omega()?;
        let mut spec = match p.kind {
            Kind::Poisson => {
                if omega != 0.0 {
                    return Err(Error::Config("poisson problems take no omega or wavelength".into()));
                }
                ProblemSpec::poisson(p.source)
            }
            Kind::Helmholtz => {
                let mut s = ProblemSpec::helmholtz(omega);
                s.source = p.source;
                s
            }
        };
        spec.coefficient = match (p.strip, p.strip_coefficient) {
            (None, None) => Coefficient::Uniform(p.coefficient),
            (Some([x0, x1]), Some(inside)) => Coefficient::Strip {
                x0,
                x1,
                inside,
                outside: p.coefficient,
            },
            _ => return Err(Error::Config("strip and strip_coefficient go together".into())),
        };
        let trace = match p.incident_decay {
            Some(decay) => Trace::Gaussian {
                center: p.incident_center.unwrap_or(self.mesh.lx / 2.0),
                decay,
                amplitude: p.incident_amplitude,
            },
            None => Trace::Constant(p.incident_amplitude),
        };
        let marks = self.mark_scheme();
        for side in Side::ALL {
            let bc = match self.side_condition(side) {
                "dirichlet" => BoundaryCondition::Dirichlet(self.bc.dirichlet_value),
                "neumann" => BoundaryCondition::Neumann,
                "absorbing" => BoundaryCondition::Absorbing,
                "incident" => BoundaryCondition::Incident(trace.clone()),
                other => return Err(Error::Config(format!("unknown boundary condition '{other}'"))),
            };
            if spec.kind == ProblemKind::Poisson && matches!(bc, BoundaryCondition::Absorbing | BoundaryCondition::Incident(_)) {
                return Err(Error::Config("absorbing sides need a helmholtz problem".into()));
            }
            spec.bc.insert(marks.name(side).to_string(), bc);
        }
        Ok(spec)
    }

    pub fn krylov_options(&self) -> KrylovOptions {
        KrylovOptions {
            tol: self.solver.tol,
            maxit: self.solver.maxit,
            restart: self.solver.restart,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nkind = \"poisson\"\nsource = 1.0\n[mesh]\nnx = 4\nny = 4\n";

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.decomposition.overlap, vec![1]);
        assert_eq!(c.solver.tol, 1e-8);
        assert_eq!(c.solver.maxit, 1000);
        assert_eq!(c.solver.restart, None);
        assert_eq!(
            c.choices().unwrap(),
            vec![PreconditionerChoice {
                variant: Variant::Ras,
                levels: 1
            }]
        );
        let spec = c.problem_spec().unwrap();
        assert_eq!(spec.bc.len(), 4);
        assert!(spec.bc.values().all(|b| *b == BoundaryCondition::Dirichlet(0.0)));
    }

    #[test]
    fn variants_list() {
        let text = format!("{MINIMAL}[preconditioner]\nvariants = [\"ras\", \"RAS:2\", \"oras:1\"]\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let ch = c.choices().unwrap();
        assert_eq!(ch.len(), 3);
        assert_eq!((ch[1].variant, ch[1].levels), (Variant::Ras, 2));
        assert_eq!(ch[2].variant, Variant::Oras);
    }

    #[test]
    fn wavelength_sets_omega() {
        let text = "[problem]\nkind = \"helmholtz\"\nwavelength = 0.5\n[mesh]\nnx = 2\nny = 2\n";
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert!((c.omega().unwrap() - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            format!("{MINIMAL}[decomposition]\noverlap = []\n"),
            format!("{MINIMAL}[preconditioner]\nvariant = \"xyz\"\n"),
            format!("{MINIMAL}[preconditioner]\nlevels = 3\n"),
            format!("{MINIMAL}[bc]\nleft = \"absorbing\"\n"),
            format!("{MINIMAL}[bc]\nleft = \"robin\"\n"),
            format!("{MINIMAL}[solver]\ntol = 0.0\n"),
            format!("{MINIMAL}[decomposition]\nmethod = \"graph\"\n"),
            format!("{MINIMAL}[mesh]\nnx = 4\n"),
            format!("{MINIMAL}typo = 1\n"),
            "[problem]\nkind = \"poisson\"\nomega = 1.0\n[mesh]\nnx = 2\nny = 2\n".to_string(),
        ] {
            assert!(ExperimentConfig::from_toml(&bad).is_err(), "accepted:\n{bad}");
        }
    }

    #[test]
    fn parse_errors_name_the_file() {
        let err = ExperimentConfig::from_toml("[problem\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
