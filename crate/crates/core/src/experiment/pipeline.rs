use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use crate::assembly::{assemble_global, AssembledSystem};
use crate::error::{Error, Result};
use crate::krylov::{estimate_condition, gmres, pcg, SolveStats};
use crate::linalg::{LinearOperator, Scalar};
use crate::mesh::{cell_vertex_graph, dual_graph, node_graph, q1_dof_map, DofMap, Graph, Mesh};
use crate::partition::{
    extend_overlap_elements, extend_overlap_nodes, partition_geometric, partition_graph_greedy, OverlappingDecomposition,
    Partition, PartitionKind,
};
use crate::schwarz::{assemble_robin_matrices, build_one_level_scaled, build_two_level, LocalSource, SchwarzPreconditioner};

use super::config::{Adjacency, ExperimentConfig, Kind, Method, OverlapKind, PreconditionerChoice, SolverMethod};
use super::ExperimentRow;

/// One point of a sweep: refinement level, overlap layers and preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunPoint {
    pub refinement: usize,
    pub k: usize,
    pub choice: PreconditionerChoice,
}

/// Everything a single solve produced.
#[derive(Debug)]
pub struct RunOutcome<S: Scalar> {
    pub row: ExperimentRow,
    pub mesh: Mesh,
    pub system: AssembledSystem<S>,
    pub decomposition: OverlappingDecomposition,
    pub preconditioner: SchwarzPreconditioner<S>,
    pub solution: Vec<S>,
    pub stats: SolveStats,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

/// Refinement `r` doubles the mesh in each direction and quadruples the
/// subdomain count, so `H / h` and `delta / H` stay fixed.
fn partition_for(cfg: &ExperimentConfig, mesh: &Mesh, node: &Graph, r: usize) -> Result<Partition> {
    let d = &cfg.decomposition;
    let node_mode = d.overlap_mode == OverlapKind::Node;
    match d.method {
        Method::Geometric => {
            let cells = partition_geometric(mesh, d.px << r, d.py << r)?;
            if !node_mode {
                return Ok(cells);
            }
            // A vertex goes to the lowest block among the cells around it.
            let mut owner = vec![usize::MAX; mesh.n_vertices()];
            for (c, &p) in cells.owner().iter().enumerate() {
                for &v in &mesh.cells()[c] {
                    owner[v] = owner[v].min(p);
                }
            }
            Partition::new(PartitionKind::Nodes, cells.n_parts(), owner)
        }
        Method::Graph => {
            let parts = d.parts.expect("validated") << (2 * r);
            if node_mode {
                partition_graph_greedy(node, parts, d.seed, PartitionKind::Nodes)
            } else {
                partition_graph_greedy(&dual_graph(mesh), parts, d.seed, PartitionKind::Elements)
            }
        }
    }
}

fn decompose(cfg: &ExperimentConfig, mesh: &Mesh, dofmap: &DofMap, partition: &Partition, node: &Graph, k: usize) -> Result<OverlappingDecomposition> {
    match cfg.decomposition.overlap_mode {
        OverlapKind::Element => {
            let growth = match cfg.decomposition.overlap_adjacency {
                Adjacency::Vertex => cell_vertex_graph(mesh),
                Adjacency::Edge => dual_graph(mesh),
            };
            extend_overlap_elements(partition, &growth, k, dofmap, mesh)
        }
        OverlapKind::Node => Ok(extend_overlap_nodes(partition, node, k)?.with_geometry(&dofmap.dof_coords, mesh.h())),
    }
}

/// Mesh, assembly, partition, overlap, preconditioner and solve for one
/// sweep point.
pub fn run_point<S: Scalar>(cfg: &ExperimentConfig, point: RunPoint) -> Result<RunOutcome<S>> {
    run_point_inner(cfg, point).map_err(|e| Error::Run {
        context: format!(
            "{} level {} with k={} at refinement {}",
            point.choice.variant, point.choice.levels, point.k, point.refinement
        ),
        source: Box::new(e),
    })
}

fn run_point_inner<S: Scalar>(cfg: &ExperimentConfig, point: RunPoint) -> Result<RunOutcome<S>> {
    let r = point.refinement;
    let m = &cfg.mesh;
    let mesh = stage("mesh", Mesh::structured(m.nx << r, m.ny << r, m.lx, m.ly, &cfg.mark_scheme()))?;
    let dofmap = q1_dof_map(&mesh);
    let spec = stage("assembly", cfg.problem_spec())?;
    let system = stage("assembly", assemble_global::<S>(&mesh, &dofmap, &spec))?;

    let start = Instant::now();
    let node = node_graph(&system.a);
    let partition = stage("partition", partition_for(cfg, &mesh, &node, r))?;
    let decomposition = stage("overlap", decompose(cfg, &mesh, &dofmap, &partition, &node, point.k))?;

    let variant = point.choice.variant;
    let scaling = cfg.scaling()?.or(variant.default_scaling());
    let preconditioner = stage("preconditioner", {
        let source = if variant.is_optimized() {
            LocalSource::Assembled(assemble_robin_matrices(&mesh, &decomposition, &spec, cfg.alpha())?)
        } else {
            LocalSource::Extract
        };
        build_one_level_scaled(&system.a, &decomposition, variant, source, scaling)
            .and_then(|m1| if point.choice.levels == 2 { build_two_level(m1, &system.a) } else { Ok(m1) })
    })?;

    let opts = cfg.krylov_options();
    let m: &dyn LinearOperator<S> = &preconditioner;
    let (solution, stats) = stage(
        "solver",
        match cfg.solver.method {
            SolverMethod::Gmres => gmres(&system.a, &system.b, Some(m), &opts),
            SolverMethod::Pcg => pcg(&system.a, &system.b, Some(m), &opts),
        },
    )?;
    let wall_time = start.elapsed().as_secs_f64();
    let kappa = match cfg.solver.method {
        SolverMethod::Pcg if !stats.lanczos_diag.is_empty() => Some(stage("solver", estimate_condition(&stats))?),
        _ => None,
    };

    let row = ExperimentRow {
        ranks: decomposition.n_subdomains(),
        dofs: system.a.n_rows(),
        k: point.k,
        delta_over_h_pct: decomposition.max_delta_over_h().map(|v| 100.0 * v),
        variant,
        levels: point.choice.levels,
        iterations: stats.iterations,
        converged: stats.converged,
        kappa,
        wall_time,
    };
    Ok(RunOutcome {
        row,
        mesh,
        system,
        decomposition,
        preconditioner,
        solution,
        stats,
    })
}

/// Runs a point in the field the problem needs: real for Poisson, complex
/// for Helmholtz.
pub fn run_row(cfg: &ExperimentConfig, point: RunPoint) -> Result<ExperimentRow> {
    Ok(match cfg.problem.kind {
        Kind::Poisson => run_point::<f64>(cfg, point)?.row,
        Kind::Helmholtz => run_point::<num_complex::Complex64>(cfg, point)?.row,
    })
}

/// Writes `solution.txt` (one value per line, `re im` when complex),
/// `residuals.csv`, `setup.csv`, `decomposition.csv` and `mesh.txt`.
pub fn write_artifacts<S: Scalar>(outcome: &RunOutcome<S>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut s = String::new();
    for v in &outcome.solution {
        if S::IS_COMPLEX {
            let z = v.to_complex();
            writeln!(s, "{:e} {:e}", z.re, z.im).unwrap();
        } else {
            writeln!(s, "{:e}", v.real()).unwrap();
        }
    }
    fs::write(dir.join("solution.txt"), s)?;
    outcome.stats.write_residual_csv(fs::File::create(dir.join("residuals.csv"))?)?;
    outcome.preconditioner.write_setup_csv(fs::File::create(dir.join("setup.csv"))?)?;
    outcome.decomposition.write_csv(fs::File::create(dir.join("decomposition.csv"))?)?;
    outcome.mesh.write_ascii(fs::File::create(dir.join("mesh.txt"))?)?;
    Ok(())
}
