use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::{DofMap, Graph, Mesh, Point};
use crate::partition::{Partition, PartitionKind};

/// How the overlap was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMode {
    /// Layers of elements around element-based subdomains.
    Elements,
    /// Layers of matrix-graph neighbours around dof-based subdomains.
    Nodes,
}

/// One overlapping subdomain `Omega_i'`. All index lists are sorted global
/// indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdomain {
    /// Non-overlapping elements `E_i` (element mode only).
    pub core_elements: Vec<usize>,
    /// Overlapping elements `E_i'` (element mode only).
    pub elements: Vec<usize>,
    /// `V_i`.
    pub dofs: Vec<usize>,
    /// Dofs on the interface `boundary(Omega_i') \ boundary(Omega)`.
    pub interface: Vec<usize>,
    /// Dofs kept by Dirichlet local problems: `V_i` minus every dof on the
    /// closure of the interface.
    pub interior: Vec<usize>,
    /// Dofs uniquely owned by this subdomain.
    pub owned: Vec<usize>,
    /// Largest bounding-box side of the non-overlapping subdomain.
    pub diameter: Option<f64>,
}

/// Overlapping decomposition of the dofs into `Omega_1', ..., Omega_N'`.
#[derive(Debug, Clone)]
pub struct OverlappingDecomposition {
    mode: OverlapMode,
    n_dofs: usize,
    layers: usize,
    h: Option<f64>,
    subdomains: Vec<Subdomain>,
    multiplicity: Vec<usize>,
    owner: Vec<usize>,
}

impl OverlappingDecomposition {
    pub fn mode(&self) -> OverlapMode {
        self.mode
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn subdomain(&self, i: usize) -> &Subdomain {
        &self.subdomains[i]
    }

    /// Overlap layers `k`.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Number of subdomains containing each dof.
    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    /// Unique owner of each dof.
    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// Overlap width `delta = k h`, when the mesh size is known.
    pub fn delta(&self) -> Option<f64> {
        self.h.map(|h| self.layers as f64 * h)
    }

    /// `max_i delta / H_i`, when geometry is known.
    pub fn max_delta_over_h(&self) -> Option<f64> {
        let delta = self.delta()?;
        self.subdomains
            .iter()
            .map(|s| s.diameter.map(|d| delta / d))
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))
    }

    /// Attaches geometry to a node-mode decomposition: `H_i` from the bounding
    /// box of owned dofs and the mesh size `h`.
    pub fn with_geometry(mut self, dof_coords: &[Point], h: f64) -> Self {
        self.h = Some(h);
        for s in &mut self.subdomains {
            if s.diameter.is_none() {
                s.diameter = bounding_box_side(s.owned.iter().map(|&d| dof_coords[d]));
            }
        }
        self
    }

    /// Dofs that no Dirichlet local problem covers.
    pub fn uncovered_dofs(&self) -> Vec<usize> {
        let mut covered = vec![false; self.n_dofs];
        for s in &self.subdomains {
            for &d in &s.interior {
                covered[d] = true;
            }
        }
        (0..self.n_dofs).filter(|&d| !covered[d]).collect()
    }

    /// CSV dump `dof,owner,multiplicity`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("dof,owner,multiplicity\n");
        for d in 0..self.n_dofs {
            writeln!(s, "{d},{},{}", self.owner[d], self.multiplicity[d]).unwrap();
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// All nodes within graph distance `k` of `seeds`, sorted.
fn bfs_closure(graph: &Graph, seeds: &[usize], k: usize, dist: &mut [usize]) -> Vec<usize> {
    let mut reached = seeds.to_vec();
    let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
    for &s in seeds {
        dist[s] = 0;
    }
    while let Some(v) = queue.pop_front() {
        if dist[v] == k {
            continue;
        }
        for &w in graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                reached.push(w);
                queue.push_back(w);
            }
        }
    }
    for &v in &reached {
        dist[v] = usize::MAX;
    }
    reached.sort_unstable();
    reached
}

fn bounding_box_side(points: impl Iterator<Item = Point>) -> Option<f64> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut any = false;
    for p in points {
        any = true;
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    any.then(|| (hi[0] - lo[0]).max(hi[1] - lo[1]))
}

/// Grows each element subdomain by `k` BFS steps in `growth` (the dual graph
/// or the vertex-sharing cell graph) and derives dof sets, interface and
/// interior sets, multiplicities and unique owners.
pub fn extend_overlap_elements(
    partition: &Partition,
    growth: &Graph,
    k: usize,
    dofmap: &DofMap,
    mesh: &Mesh,
) -> Result<OverlappingDecomposition> {
    if partition.kind() != PartitionKind::Elements {
        return Err(Error::Partition("element overlap needs an element partition".into()));
    }
    if growth.n_nodes() != mesh.n_cells() || partition.owner().len() != mesh.n_cells() {
        return Err(Error::Partition("partition, graph and mesh disagree on the cell count".into()));
    }
    let n_dofs = dofmap.n_dofs;
    let cores = partition.parts();

    // Owner: lowest subdomain whose core touches the dof.
    let mut owner = vec![usize::MAX; n_dofs];
    for (c, &p) in partition.owner().iter().enumerate() {
        for &d in &dofmap.cell_dofs[c] {
            owner[d] = owner[d].min(p);
        }
    }

    let mut dist = vec![usize::MAX; mesh.n_cells()];
    let mut in_set = vec![false; mesh.n_cells()];
    let mut multiplicity = vec![0usize; n_dofs];
    let mut subdomains = Vec::with_capacity(cores.len());
    for (i, core) in cores.into_iter().enumerate() {
        let elements = bfs_closure(growth, &core, k, &mut dist);
        for &c in &elements {
            in_set[c] = true;
        }
        let mut dofs: Vec<usize> = elements.iter().flat_map(|&c| dofmap.cell_dofs[c]).collect();
        dofs.sort_unstable();
        dofs.dedup();

        let mut closure = Vec::new();
        for &c in &elements {
            for e in 0..4 {
                if matches!(mesh.cell_neighbor(c, e), Some(d) if !in_set[d]) {
                    closure.extend(mesh.cell_edge_vertices(c, e));
                }
            }
        }
        closure.sort_unstable();
        closure.dedup();
        let interface: Vec<usize> = closure.iter().copied().filter(|&v| !mesh.vertex_on_boundary(v)).collect();
        let interior: Vec<usize> = dofs.iter().copied().filter(|d| closure.binary_search(d).is_err()).collect();
        for &c in &elements {
            in_set[c] = false;
        }
        for &d in &dofs {
            multiplicity[d] += 1;
        }
        let owned = dofs.iter().copied().filter(|&d| owner[d] == i).collect();
        let diameter = bounding_box_side(core.iter().flat_map(|&c| {
            let (cx, cy) = mesh.cell_position(c);
            [
                [cx as f64 * mesh.hx(), cy as f64 * mesh.hy()],
                [(cx + 1) as f64 * mesh.hx(), (cy + 1) as f64 * mesh.hy()],
            ]
        }));
        subdomains.push(Subdomain {
            core_elements: core,
            elements,
            dofs,
            interface,
            interior,
            owned,
            diameter,
        });
    }

    Ok(OverlappingDecomposition {
        mode: OverlapMode::Elements,
        n_dofs,
        layers: k,
        h: Some(mesh.h()),
        subdomains,
        multiplicity,
        owner,
    })
}

/// Fully algebraic overlap: each dof-based subdomain grows by `k` BFS steps
/// in the node graph of the matrix. Interface dofs are those with a graph
/// neighbour outside `V_i`.
pub fn extend_overlap_nodes(partition: &Partition, nodes: &Graph, k: usize) -> Result<OverlappingDecomposition> {
    if partition.kind() != PartitionKind::Nodes {
        return Err(Error::Partition("node overlap needs a node partition".into()));
    }
    let n_dofs = nodes.n_nodes();
    if partition.owner().len() != n_dofs {
        return Err(Error::Partition("partition and node graph disagree on the dof count".into()));
    }
    let mut dist = vec![usize::MAX; n_dofs];
    let mut member = vec![false; n_dofs];
    let mut multiplicity = vec![0usize; n_dofs];
    let mut subdomains = Vec::new();
    for owned in partition.parts() {
        let dofs = bfs_closure(nodes, &owned, k, &mut dist);
        for &d in &dofs {
            member[d] = true;
            multiplicity[d] += 1;
        }
        let interface: Vec<usize> = dofs
            .iter()
            .copied()
            .filter(|&d| nodes.neighbors(d).iter().any(|&w| !member[w]))
            .collect();
        for &d in &dofs {
            member[d] = false;
        }
        let interior = dofs.iter().copied().filter(|d| interface.binary_search(d).is_err()).collect();
        subdomains.push(Subdomain {
            core_elements: Vec::new(),
            elements: Vec::new(),
            dofs,
            interface,
            interior,
            owned,
            diameter: None,
        });
    }
    Ok(OverlappingDecomposition {
        mode: OverlapMode::Nodes,
        n_dofs,
        layers: k,
        h: None,
        subdomains,
        multiplicity,
        owner: partition.owner().to_vec(),
    })
}
