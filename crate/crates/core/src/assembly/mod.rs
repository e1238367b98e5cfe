//! Q1 assembly of global Poisson / Helmholtz systems and of local subdomain
//! matrices with Robin interface closure.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Scalar};
use crate::mesh::{DofMap, EdgeKind, LocalMesh, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `-div grad u = f`
    Poisson,
    /// `-div grad u - omega^2 c u = f`
    Helmholtz,
}

/// Per-cell multiplier `c` of the `omega^2` term, evaluated at the centroid.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Uniform(f64),
    /// `inside` for centroids with `x0 <= x <= x1`, `outside` elsewhere.
    Strip { x0: f64, x1: f64, inside: f64, outside: f64 },
    /// One value per global cell.
    PerCell(Vec<f64>),
}

impl Coefficient {
    fn value(&self, cell: usize, centroid: Point) -> f64 {
        match self {
            Coefficient::Uniform(c) => *c,
            Coefficient::Strip { x0, x1, inside, outside } => {
                if (*x0..=*x1).contains(&centroid[0]) {
                    *inside
                } else {
                    *outside
                }
            }
            Coefficient::PerCell(v) => v[cell],
        }
    }
}

/// Boundary data along one side, as a function of the tangential coordinate
/// (`x` on horizontal sides, `y` on vertical ones).
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Constant(f64),
    /// `amplitude * exp(-decay * (t - center)^2)`
    Gaussian { center: f64, decay: f64, amplitude: f64 },
}

impl Trace {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Trace::Constant(v) => v,
            Trace::Gaussian { center, decay, amplitude } => amplitude * (-decay * (t - center).powi(2)).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    /// Homogeneous natural condition.
    Neumann,
    /// First-order absorbing condition `du/dn + i omega u = 0`.
    Absorbing,
    /// Absorbing condition driven by an incoming trace:
    /// `du/dn + i omega u = g`.
    Incident(Trace),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub omega: f64,
    pub coefficient: Coefficient,
    /// Constant volume source `f`.
    pub source: f64,
    /// Condition per boundary mark name; unlisted marks are natural.
    pub bc: BTreeMap<String, BoundaryCondition>,
}

impl ProblemSpec {
    pub fn poisson(source: f64) -> Self {
        Self {
            kind: ProblemKind::Poisson,
            omega: 0.0,
            coefficient: Coefficient::Uniform(1.0),
            source,
            bc: BTreeMap::new(),
        }
    }

    pub fn helmholtz(omega: f64) -> Self {
        Self {
            kind: ProblemKind::Helmholtz,
            omega,
            coefficient: Coefficient::Uniform(1.0),
            source: 0.0,
            bc: BTreeMap::new(),
        }
    }

    /// Scalar optical waveguide on `(0,2) x (0,6)` (micrometres): silica core
    /// strip of width 0.8 centred at `x = 1`, wavelength 0.6328, Gaussian
    /// beam entering through `y = 0`. Pair with [`crate::mesh::MarkScheme::waveguide`].
    pub fn waveguide() -> Self {
        let wavelength = 0.6328;
        let mut spec = Self::helmholtz(2.0 * PI / wavelength);
        spec.coefficient = Coefficient::Strip {
            x0: 0.6,
            x1: 1.4,
            inside: 1.457f64.powi(2),
            outside: 1.0,
        };
        spec.bc.insert("absorbing".into(), BoundaryCondition::Absorbing);
        spec.bc.insert(
            "incident".into(),
            BoundaryCondition::Incident(Trace::Gaussian {
                center: 1.0,
                decay: 100.0,
                amplitude: 1.0,
            }),
        );
        spec
    }

    pub fn with_bc(mut self, mark: &str, bc: BoundaryCondition) -> Self {
        self.bc.insert(mark.into(), bc);
        self
    }

    fn validate(&self, mark_names: &[String]) -> Result<()> {
        if self.kind == ProblemKind::Poisson && self.omega != 0.0 {
            return Err(Error::Config("poisson problems take no wavenumber".into()));
        }
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::Config(format!("invalid wavenumber {}", self.omega)));
        }
        if let Some(m) = self.bc.keys().find(|m| !mark_names.contains(m)) {
            return Err(Error::Config(format!("boundary condition for unknown mark '{m}'")));
        }
        Ok(())
    }

    fn condition(&self, mark: &str) -> &BoundaryCondition {
        self.bc.get(mark).unwrap_or(&BoundaryCondition::Neumann)
    }

    fn dirichlet_mask(&self, mark_names: &[String]) -> (u32, Vec<Option<f64>>) {
        let mut mask = 0;
        let mut values = vec![None; mark_names.len()];
        for (id, name) in mark_names.iter().enumerate() {
            if let BoundaryCondition::Dirichlet(v) = self.condition(name) {
                mask |= 1 << id;
                values[id] = Some(*v);
            }
        }
        (mask, values)
    }
}

/// Global system `A x = b`.
#[derive(Debug, Clone)]
pub struct AssembledSystem<S: Scalar> {
    pub a: CsrMatrix<S>,
    pub b: Vec<S>,
    pub dirichlet_dofs: Vec<usize>,
}

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Q1 shape functions and their reference gradients at `(s, t)` in `[0,1]^2`,
/// vertices counterclockwise from the origin.
fn shape(s: f64, t: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    (
        [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t],
        [[-(1.0 - t), -(1.0 - s)], [1.0 - t, -s], [t, s], [-t, 1.0 - s]],
    )
}

/// Element stiffness, mass and unit-source load on an `hx x hy` rectangle.
fn element_matrices(hx: f64, hy: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4], [f64; 4]) {
    let mut k = [[0.0; 4]; 4];
    let mut m = [[0.0; 4]; 4];
    let mut f = [0.0; 4];
    let w = 0.25 * hx * hy;
    for s in GAUSS {
        for t in GAUSS {
            let (phi, grad) = shape(s, t);
            for a in 0..4 {
                f[a] += w * phi[a];
                for b in 0..4 {
                    k[a][b] += w * (grad[a][0] * grad[b][0] / (hx * hx) + grad[a][1] * grad[b][1] / (hy * hy));
                    m[a][b] += w * phi[a] * phi[b];
                }
            }
        }
    }
    (k, m, f)
}

/// Edge mass matrix and load `int g v` on the segment `p -> q`, with `g`
/// evaluated in the coordinate along the edge.
fn edge_terms(p: Point, q: Point, g: Option<&Trace>) -> ([[f64; 2]; 2], [f64; 2]) {
    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    let axis = usize::from((q[0] - p[0]).abs() < (q[1] - p[1]).abs());
    let mut m = [[0.0; 2]; 2];
    let mut load = [0.0; 2];
    for s in GAUSS {
        let phi = [1.0 - s, s];
        let gv = g.map_or(0.0, |g| g.eval(p[axis] + s * (q[axis] - p[axis])));
        for a in 0..2 {
            load[a] += 0.5 * len * gv * phi[a];
            for b in 0..2 {
                m[a][b] += 0.5 * len * phi[a] * phi[b];
            }
        }
    }
    (m, load)
}

/// Boundary edge as seen by the assembler.
struct EdgeInput<'a> {
    dofs: [usize; 2],
    coords: [Point; 2],
    /// `None` on subdomain interfaces.
    condition: Option<&'a BoundaryCondition>,
}

/// Complex triplets and load for `K - omega^2 M_c + i omega S_abs + alpha S_int`.
fn assemble_terms<'a>(
    n: usize,
    hx: f64,
    hy: f64,
    cells: impl Iterator<Item = ([usize; 4], f64)>,
    edges: impl Iterator<Item = EdgeInput<'a>>,
    spec: &ProblemSpec,
    alpha: Complex64,
) -> (Vec<(usize, usize, Complex64)>, Vec<Complex64>) {
    let (ke, me, fe) = element_matrices(hx, hy);
    let mut triplets = Vec::new();
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    let w2 = spec.omega * spec.omega;
    for (dofs, c) in cells {
        for a in 0..4 {
            b[dofs[a]] += spec.source * fe[a];
            for bb in 0..4 {
                let v = ke[a][bb] - w2 * c * me[a][bb];
                triplets.push((dofs[a], dofs[bb], Complex64::new(v, 0.0)));
            }
        }
    }
    let iw = Complex64::new(0.0, spec.omega);
    for e in edges {
        let (coef, g) = match e.condition {
            None => (alpha, None),
            Some(BoundaryCondition::Absorbing) => (iw, None),
            Some(BoundaryCondition::Incident(g)) => (iw, Some(g)),
            Some(_) => continue,
        };
        let (m, load) = edge_terms(e.coords[0], e.coords[1], g);
        for a in 0..2 {
            b[e.dofs[a]] += load[a];
            if coef != Complex64::new(0.0, 0.0) {
                for bb in 0..2 {
                    triplets.push((e.dofs[a], e.dofs[bb], coef * m[a][bb]));
                }
            }
        }
    }
    (triplets, b)
}

/// Row-and-column elimination with unit diagonal.
fn eliminate(
    triplets: Vec<(usize, usize, Complex64)>,
    b: &mut [Complex64],
    fixed: &[Option<f64>],
) -> Vec<(usize, usize, Complex64)> {
    let mut kept: Vec<_> = triplets
        .into_iter()
        .filter(|&(i, j, v)| match (fixed[i], fixed[j]) {
            (None, None) => true,
            (None, Some(g)) => {
                b[i] -= v * g;
                false
            }
            _ => false,
        })
        .collect();
    for (d, f) in fixed.iter().enumerate() {
        if let Some(g) = f {
            kept.push((d, d, Complex64::new(1.0, 0.0)));
            b[d] = Complex64::new(*g, 0.0);
        }
    }
    kept
}

fn convert<S: Scalar>(n: usize, triplets: &[(usize, usize, Complex64)]) -> Result<CsrMatrix<S>> {
    let summed = CsrMatrix::from_triplets(n, n, triplets)?;
    let mut values = Vec::with_capacity(summed.nnz());
    for &v in summed.values() {
        values.push(S::from_complex(v).ok_or_else(complex_field_error)?);
    }
    CsrMatrix::try_from_parts(n, n, summed.row_offsets().to_vec(), summed.col_indices().to_vec(), values)
}

fn convert_vec<S: Scalar>(v: &[Complex64]) -> Result<Vec<S>> {
    v.iter().map(|&z| S::from_complex(z).ok_or_else(complex_field_error)).collect()
}

fn complex_field_error() -> Error {
    Error::Field("problem has complex terms; assemble over the complex field".into())
}

fn fixed_values(mark_bits: &[u32], mask: u32, values: &[Option<f64>]) -> Vec<Option<f64>> {
    mark_bits
        .iter()
        .map(|&bits| {
            let hit = bits & mask;
            (hit != 0).then(|| values[hit.trailing_zeros() as usize].unwrap())
        })
        .collect()
}

/// Global `A = K - omega^2 M_c + i omega S_abs` and load vector, with
/// Dirichlet sides eliminated.
pub fn assemble_global<S: Scalar>(mesh: &Mesh, dofmap: &DofMap, spec: &ProblemSpec) -> Result<AssembledSystem<S>> {
    spec.validate(mesh.mark_names())?;
    let n = dofmap.n_dofs;
    let cells = (0..mesh.n_cells()).map(|c| (dofmap.cell_dofs[c], spec.coefficient.value(c, mesh.centroid(c))));
    let edges = mesh.boundary_edges().iter().map(|e| EdgeInput {
        dofs: e.vertices,
        coords: [dofmap.dof_coords[e.vertices[0]], dofmap.dof_coords[e.vertices[1]]],
        condition: Some(spec.condition(mesh.mark_name(e.mark))),
    });
    let (triplets, mut b) = assemble_terms(n, mesh.hx(), mesh.hy(), cells, edges, spec, Complex64::new(0.0, 0.0));
    let (mask, values) = spec.dirichlet_mask(mesh.mark_names());
    let fixed = fixed_values(&mesh.vertex_marks(), mask, &values);
    let triplets = eliminate(triplets, &mut b, &fixed);
    Ok(AssembledSystem {
        a: convert(n, &triplets)?,
        b: convert_vec(&b)?,
        dirichlet_dofs: (0..n).filter(|&d| fixed[d].is_some()).collect(),
    })
}

/// Boundary load `int_incident g v` alone.
pub fn assemble_incident_rhs<S: Scalar>(mesh: &Mesh, dofmap: &DofMap, spec: &ProblemSpec) -> Result<Vec<S>> {
    spec.validate(mesh.mark_names())?;
    let mut b = vec![Complex64::new(0.0, 0.0); dofmap.n_dofs];
    for e in mesh.boundary_edges() {
        if let BoundaryCondition::Incident(g) = spec.condition(mesh.mark_name(e.mark)) {
            let (_, load) = edge_terms(dofmap.dof_coords[e.vertices[0]], dofmap.dof_coords[e.vertices[1]], Some(g));
            for a in 0..2 {
                b[e.vertices[a]] += load[a];
            }
        }
    }
    convert_vec(&b)
}

/// Local `B_i = K - omega^2 M_c + i omega S_abs + alpha S_int` on a
/// subdomain, in the local (ascending global) dof order. Global Dirichlet dofs
/// are eliminated as in [`assemble_global`].
pub fn assemble_local_robin<S: Scalar>(local: &LocalMesh, spec: &ProblemSpec, alpha: Complex64) -> Result<CsrMatrix<S>> {
    spec.validate(&local.mark_names)?;
    let n = local.n_dofs();
    let cells = local.cells.iter().zip(&local.global_cell_ids).map(|(c, &g)| {
        let p = local.vertices[c[0]];
        let centroid = [p[0] + 0.5 * local.hx, p[1] + 0.5 * local.hy];
        (*c, spec.coefficient.value(g, centroid))
    });
    let edges = local.boundary_edges.iter().map(|e| EdgeInput {
        dofs: e.vertices,
        coords: [local.vertices[e.vertices[0]], local.vertices[e.vertices[1]]],
        condition: match e.kind {
            EdgeKind::Global(m) => Some(spec.condition(&local.mark_names[m.0 as usize])),
            EdgeKind::Interface => None,
        },
    });
    let (triplets, mut b) = assemble_terms(n, local.hx, local.hy, cells, edges, spec, alpha);
    let (mask, values) = spec.dirichlet_mask(&local.mark_names);
    let fixed = fixed_values(&local.vertex_marks, mask, &values);
    let triplets = eliminate(triplets, &mut b, &fixed);
    convert(n, &triplets)
}
