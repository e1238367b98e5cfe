use crate::linalg::{CsrMatrix, Scalar};
use crate::mesh::Mesh;

/// Undirected graph in CSR adjacency form; symmetric, without self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl Graph {
    /// Builds a graph from undirected edges; duplicates and self-loops are
    /// dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                lists[a].push(b);
                lists[b].push(a);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            adjacency.extend(l);
            offsets.push(adjacency.len());
        }
        Self { offsets, adjacency }
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n_nodes()).all(|v| self.neighbors(v).iter().all(|&w| self.neighbors(w).binary_search(&v).is_ok()))
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n_nodes()).any(|v| self.neighbors(v).contains(&v))
    }
}

/// Cells are nodes; two cells are adjacent when they share an edge.
pub fn dual_graph(mesh: &Mesh) -> Graph {
    let edges = (0..mesh.n_cells()).flat_map(|c| {
        // Right and top neighbours cover every shared edge once.
        [1usize, 2].into_iter().filter_map(move |e| mesh.cell_neighbor(c, e).map(|d| (c, d)))
    });
    Graph::from_edges(mesh.n_cells(), edges)
}

/// Cells are nodes; two cells are adjacent when they share at least one
/// vertex. One BFS step in this graph adds every cell touching a subdomain.
pub fn cell_vertex_graph(mesh: &Mesh) -> Graph {
    let (nx, ny) = (mesh.nx() as isize, mesh.ny() as isize);
    let edges = (0..mesh.n_cells()).flat_map(move |c| {
        let (cx, cy) = mesh.cell_position(c);
        let (cx, cy) = (cx as isize, cy as isize);
        [(1isize, 0isize), (-1, 1), (0, 1), (1, 1)].into_iter().filter_map(move |(dx, dy)| {
            let (x, y) = (cx + dx, cy + dy);
            (x >= 0 && y >= 0 && x < nx && y < ny).then(|| (c, mesh.cell_index(x as usize, y as usize)))
        })
    });
    Graph::from_edges(mesh.n_cells(), edges)
}

/// Graph of the sparsity pattern of `a`: `i ~ j` iff `a[i,j]` or `a[j,i]` is
/// a stored nonzero, `i != j`.
pub fn node_graph<S: Scalar>(a: &CsrMatrix<S>) -> Graph {
    let edges = a.triplets().filter(|&(i, j, v)| i != j && v != S::zero()).map(|(i, j, _)| (i, j));
    Graph::from_edges(a.n_rows(), edges)
}
