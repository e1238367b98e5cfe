//! Non-overlapping partitions, overlap extension and the restriction /
//! scaling operators `R_i`, `P_i = R_i^T`, `D_i`.

mod overlap;
mod scaling;

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use overlap::{extend_overlap_elements, extend_overlap_nodes, OverlapMode, OverlappingDecomposition, Subdomain};
pub use scaling::{restriction, scalings, unique_owner_assignment, RestrictionMap, ScalingMode, ScalingVector};

use crate::error::{Error, Result};
use crate::mesh::{Graph, Mesh};

/// What a partition assigns owners to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Elements,
    Nodes,
}

/// Every element (or dof) has exactly one owner; every part is nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    kind: PartitionKind,
    n_parts: usize,
    owner: Vec<usize>,
}

impl Partition {
    pub fn new(kind: PartitionKind, n_parts: usize, owner: Vec<usize>) -> Result<Self> {
        if n_parts == 0 {
            return Err(Error::Partition("need at least one part".into()));
        }
        let mut sizes = vec![0usize; n_parts];
        for &o in &owner {
            if o >= n_parts {
                return Err(Error::Partition(format!("owner {o} out of range for {n_parts} parts")));
            }
            sizes[o] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Partition(format!("part {empty} is empty")));
        }
        Ok(Self { kind, n_parts, owner })
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn n_parts(&self) -> usize {
        self.n_parts
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// Members of each part in ascending order.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let mut parts = vec![Vec::new(); self.n_parts];
        for (e, &o) in self.owner.iter().enumerate() {
            parts[o].push(e);
        }
        parts
    }
}

/// `px x py` rectangular blocks; cell `(cx, cy)` goes to block
/// `(floor(cx px / nx), floor(cy py / ny))`, numbered with `x` fastest.
pub fn partition_geometric(mesh: &Mesh, px: usize, py: usize) -> Result<Partition> {
    if px == 0 || py == 0 {
        return Err(Error::Partition("block counts must be positive".into()));
    }
    if px * py > mesh.n_cells() || px > mesh.nx() || py > mesh.ny() {
        return Err(Error::Partition(format!(
            "{px}x{py} blocks do not fit a {}x{} mesh",
            mesh.nx(),
            mesh.ny()
        )));
    }
    let owner = (0..mesh.n_cells())
        .map(|c| {
            let (cx, cy) = mesh.cell_position(c);
            let bx = cx * px / mesh.nx();
            let by = cy * py / mesh.ny();
            by * px + bx
        })
        .collect();
    Partition::new(PartitionKind::Elements, px * py, owner)
}

/// Greedy BFS region growing.
///
/// Each part starts from the lowest-index unassigned node (or a random one
/// when `seed` is given) and grows breadth-first until it holds
/// `ceil(remaining / parts_left)` nodes. When its component runs out the
/// part continues from the next unassigned seed.
pub fn partition_graph_greedy(graph: &Graph, n_parts: usize, seed: Option<u64>, kind: PartitionKind) -> Result<Partition> {
    let n = graph.n_nodes();
    if n_parts == 0 || n_parts > n {
        return Err(Error::Partition(format!("cannot split {n} nodes into {n_parts} parts")));
    }
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut owner = vec![usize::MAX; n];
    let mut remaining = n;
    let mut lowest = 0usize;

    for part in 0..n_parts {
        let target = remaining.div_ceil(n_parts - part);
        let mut taken = 0;
        let mut queue = VecDeque::new();
        while taken < target {
            if queue.is_empty() {
                while owner[lowest] != usize::MAX {
                    lowest += 1;
                }
                let start = match rng.as_mut() {
                    Some(r) => {
                        let free: Vec<usize> = (lowest..n).filter(|&v| owner[v] == usize::MAX).collect();
                        *free.choose(r).expect("an unassigned node remains")
                    }
                    None => lowest,
                };
                owner[start] = part;
                taken += 1;
                queue.push_back(start);
                continue;
            }
            let v = queue.pop_front().unwrap();
            for &w in graph.neighbors(v) {
                if taken == target {
                    break;
                }
                if owner[w] == usize::MAX {
                    owner[w] = part;
                    taken += 1;
                    queue.push_back(w);
                }
            }
        }
        remaining -= taken;
    }
    Partition::new(kind, n_parts, owner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{dual_graph, MarkScheme};
    use proptest::prelude::*;

    fn mesh(nx: usize, ny: usize) -> Mesh {
        Mesh::structured(nx, ny, 1.0, 1.0, &MarkScheme::default()).unwrap()
    }

    #[test]
    fn geometric_examples() {
        let p = partition_geometric(&mesh(4, 4), 2, 2).unwrap();
        assert_eq!(p.n_parts(), 4);
        assert!(p.parts().iter().all(|s| s.len() == 4));

        let p = partition_geometric(&mesh(4, 4), 1, 1).unwrap();
        assert_eq!(p.parts(), vec![(0..16).collect::<Vec<_>>()]);

        let m = mesh(5, 4);
        let p = partition_geometric(&m, 2, 2).unwrap();
        let sizes: Vec<usize> = p.parts().iter().map(|s| s.len()).collect();
        // Columns 0..=2 go left, 3..=4 right; two rows per block.
        assert_eq!(sizes, vec![6, 4, 6, 4]);

        assert!(partition_geometric(&mesh(2, 2), 3, 1).is_err());
    }

    #[test]
    fn greedy_examples() {
        let path = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let p = partition_graph_greedy(&path, 2, None, PartitionKind::Nodes).unwrap();
        assert_eq!(p.parts(), vec![vec![0, 1], vec![2, 3]]);

        let g = dual_graph(&mesh(3, 3));
        let p = partition_graph_greedy(&g, 1, None, PartitionKind::Elements).unwrap();
        assert!(p.owner().iter().all(|&o| o == 0));

        let g = dual_graph(&mesh(2, 2));
        let p = partition_graph_greedy(&g, 4, None, PartitionKind::Elements).unwrap();
        assert!(p.parts().iter().all(|s| s.len() == 1));

        assert!(partition_graph_greedy(&g, 5, None, PartitionKind::Elements).is_err());
    }

    #[test]
    fn greedy_handles_disconnected_graphs() {
        let g = Graph::from_edges(6, [(0, 1), (2, 3)]);
        let p = partition_graph_greedy(&g, 3, None, PartitionKind::Nodes).unwrap();
        assert!(p.parts().iter().all(|s| s.len() == 2));
    }

    proptest! {
        #[test]
        fn greedy_parts_are_nonempty_and_balanced(nx in 1usize..12, ny in 1usize..12, parts in 1usize..10, seed in proptest::option::of(0u64..50)) {
            let m = mesh(nx, ny);
            prop_assume!(parts <= m.n_cells());
            let g = dual_graph(&m);
            let p = partition_graph_greedy(&g, parts, seed, PartitionKind::Elements).unwrap();
            let sizes: Vec<usize> = p.parts().iter().map(|s| s.len()).collect();
            prop_assert!(sizes.iter().all(|&s| s >= 1));
            prop_assert_eq!(sizes.iter().sum::<usize>(), m.n_cells());
            prop_assert!(*sizes.iter().max().unwrap() <= m.n_cells().div_ceil(parts));
            let again = partition_graph_greedy(&g, parts, seed, PartitionKind::Elements).unwrap();
            prop_assert_eq!(p, again);
        }
    }
}
