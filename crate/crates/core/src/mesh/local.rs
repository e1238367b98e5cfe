use crate::error::{Error, Result};
use crate::mesh::{MarkId, Mesh, Point};

/// What a boundary edge of a local mesh touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Part of the global boundary, with its mark.
    Global(MarkId),
    /// On the subdomain boundary but interior to the global domain.
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEdge {
    /// Local vertex ids, counterclockwise with respect to the owning cell.
    pub vertices: [usize; 2],
    /// Local cell owning the edge.
    pub cell: usize,
    pub kind: EdgeKind,
}

/// Triangulation of one overlapping subdomain with compact numbering.
///
/// Local vertices (and Q1 dofs) are numbered in ascending global order, so
/// local matrices line up with the sorted global dof list of the subdomain.
#[derive(Debug, Clone)]
pub struct LocalMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 4]>,
    pub global_cell_ids: Vec<usize>,
    pub global_dof_of_local_dof: Vec<usize>,
    pub boundary_edges: Vec<LocalEdge>,
    /// Bitmask of global boundary marks touching each local vertex, taken
    /// from the global mesh (a vertex may touch the global boundary only
    /// through cells outside the subdomain).
    pub vertex_marks: Vec<u32>,
    pub mark_names: Vec<String>,
    pub hx: f64,
    pub hy: f64,
}

impl LocalMesh {
    pub fn n_dofs(&self) -> usize {
        self.global_dof_of_local_dof.len()
    }

    pub fn local_dof_of_global(&self, g: usize) -> Option<usize> {
        self.global_dof_of_local_dof.binary_search(&g).ok()
    }

    pub fn interface_edges(&self) -> impl Iterator<Item = &LocalEdge> {
        self.boundary_edges.iter().filter(|e| e.kind == EdgeKind::Interface)
    }

    pub fn mark_id(&self, name: &str) -> Option<MarkId> {
        self.mark_names.iter().position(|m| m == name).map(|p| MarkId(p as u8))
    }
}

/// Builds the local triangulation of the cells in `element_set`.
pub fn build_local_mesh(mesh: &Mesh, element_set: &[usize]) -> Result<LocalMesh> {
    if element_set.is_empty() {
        return Err(Error::Mesh("local mesh needs a nonempty element set".into()));
    }
    let mut cells_sorted = element_set.to_vec();
    cells_sorted.sort_unstable();
    cells_sorted.dedup();
    if *cells_sorted.last().unwrap() >= mesh.n_cells() {
        return Err(Error::Mesh("element index out of range".into()));
    }
    let mut in_set = vec![false; mesh.n_cells()];
    for &c in &cells_sorted {
        in_set[c] = true;
    }

    let mut globals: Vec<usize> = cells_sorted.iter().flat_map(|&c| mesh.cells()[c]).collect();
    globals.sort_unstable();
    globals.dedup();
    let local_of = |g: usize| globals.binary_search(&g).expect("vertex of a local cell");

    let cells: Vec<[usize; 4]> = cells_sorted.iter().map(|&c| mesh.cells()[c].map(local_of)).collect();

    let mut boundary_edges = Vec::new();
    for (lc, &c) in cells_sorted.iter().enumerate() {
        for e in 0..4 {
            let kind = match mesh.cell_neighbor(c, e) {
                None => EdgeKind::Global(mesh.edge_mark(c, e).expect("edge on the global boundary")),
                Some(d) if !in_set[d] => EdgeKind::Interface,
                Some(_) => continue,
            };
            let [a, b] = mesh.cell_edge_vertices(c, e);
            boundary_edges.push(LocalEdge {
                vertices: [local_of(a), local_of(b)],
                cell: lc,
                kind,
            });
        }
    }

    let all_marks = mesh.vertex_marks();
    Ok(LocalMesh {
        vertices: globals.iter().map(|&g| mesh.vertices()[g]).collect(),
        cells,
        vertex_marks: globals.iter().map(|&g| all_marks[g]).collect(),
        global_cell_ids: cells_sorted,
        global_dof_of_local_dof: globals,
        boundary_edges,
        mark_names: mesh.mark_names().to_vec(),
        hx: mesh.hx(),
        hy: mesh.hy(),
    })
}
