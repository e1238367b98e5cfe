//! Fill-reducing symmetric orderings for the sparse LU.
//!
//! Nested dissection on the pattern of `A + A^T`: each connected piece is
//! split by the middle level set of a breadth-first level structure rooted at
//! a pseudo-peripheral node, the two halves are ordered recursively and the
//! separator is numbered last.

use std::collections::VecDeque;

use crate::linalg::{CsrMatrix, Scalar};

/// Region label of separator nodes, which never take part in later searches.
const NUMBERED: usize = usize::MAX;

/// Pieces at or below this size are numbered as they come.
const LEAF_SIZE: usize = 48;

/// Symmetric adjacency of `A + A^T` without the diagonal.
pub(crate) fn symmetric_pattern<S: Scalar>(a: &CsrMatrix<S>) -> (Vec<usize>, Vec<usize>) {
    let n = a.n_rows();
    let mut deg = vec![0usize; n + 1];
    for (i, j, _) in a.triplets() {
        if i != j {
            deg[i + 1] += 1;
            deg[j + 1] += 1;
        }
    }
    for i in 0..n {
        deg[i + 1] += deg[i];
    }
    let mut next = deg.clone();
    let mut adj = vec![0usize; deg[n]];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[next[i]] = j;
            next[i] += 1;
            adj[next[j]] = i;
            next[j] += 1;
        }
    }
    // Sort and dedupe each list.
    let mut offsets = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(adj.len());
    offsets.push(0);
    for i in 0..n {
        let list = &mut adj[deg[i]..deg[i + 1]];
        list.sort_unstable();
        let mut last = usize::MAX;
        for &j in list.iter() {
            if j != last {
                out.push(j);
                last = j;
            }
        }
        offsets.push(out.len());
    }
    (offsets, out)
}

/// Nested-dissection permutation: `perm[k]` is the original index placed at
/// position `k`.
pub fn nested_dissection<S: Scalar>(a: &CsrMatrix<S>) -> Vec<usize> {
    let n = a.n_rows();
    let (xadj, adj) = symmetric_pattern(a);
    let mut nd = Dissector {
        xadj: &xadj,
        adj: &adj,
        region: vec![0; n],
        level: vec![usize::MAX; n],
        next_region: 1,
        perm: Vec::with_capacity(n),
    };
    let all: Vec<usize> = (0..n).collect();
    nd.order(all, 0);
    debug_assert_eq!(nd.perm.len(), n);
    nd.perm
}

struct Dissector<'a> {
    xadj: &'a [usize],
    adj: &'a [usize],
    /// Region label of every node; BFS is confined to one label.
    region: Vec<usize>,
    level: Vec<usize>,
    next_region: usize,
    perm: Vec<usize>,
}

impl Dissector<'_> {
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.xadj[v]..self.xadj[v + 1]]
    }

    /// BFS from `root` inside region `label`. Returns visited nodes in BFS
    /// order and writes their levels.
    fn bfs(&mut self, root: usize, label: usize) -> Vec<usize> {
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        self.level[root] = 0;
        while let Some(v) = queue.pop_front() {
            let lv = self.level[v];
            for k in self.xadj[v]..self.xadj[v + 1] {
                let w = self.adj[k];
                if self.region[w] == label && self.level[w] == usize::MAX {
                    self.level[w] = lv + 1;
                    queue.push_back(w);
                    order.push(w);
                }
            }
        }
        order
    }

    fn clear_levels(&mut self, nodes: &[usize]) {
        for &v in nodes {
            self.level[v] = usize::MAX;
        }
    }

    fn order(&mut self, nodes: Vec<usize>, label: usize) {
        if nodes.len() <= LEAF_SIZE {
            self.perm.extend_from_slice(&nodes);
            return;
        }
        let mut remaining = nodes;
        // Handle each connected component separately.
        while !remaining.is_empty() {
            let start = remaining[0];
            let mut comp = self.bfs(start, label);
            // Pseudo-peripheral root: repeat BFS from a farthest node with
            // minimum degree until eccentricity stops growing.
            let mut depth = self.level[*comp.last().unwrap()];
            for _ in 0..4 {
                let far_level = depth;
                let cand = comp
                    .iter()
                    .copied()
                    .filter(|&v| self.level[v] == far_level)
                    .min_by_key(|&v| (self.neighbors(v).len(), v))
                    .unwrap();
                self.clear_levels(&comp);
                let trial = self.bfs(cand, label);
                let trial_depth = self.level[*trial.last().unwrap()];
                comp = trial;
                if trial_depth <= depth {
                    depth = trial_depth;
                    break;
                }
                depth = trial_depth;
            }

            let comp_label = self.next_region;
            self.next_region += 1;
            for &v in &comp {
                self.region[v] = comp_label;
            }
            remaining.retain(|&v| self.region[v] != comp_label);

            if comp.len() <= LEAF_SIZE || depth < 2 {
                self.clear_levels(&comp);
                self.perm.extend_from_slice(&comp);
                continue;
            }

            // Middle level: first level where the cumulative count reaches half.
            let mut counts = vec![0usize; depth + 1];
            for &v in &comp {
                counts[self.level[v]] += 1;
            }
            let half = comp.len() / 2;
            let mut acc = 0;
            let mut mid = 1;
            for (l, &c) in counts.iter().enumerate() {
                acc += c;
                if acc >= half {
                    mid = l.clamp(1, depth - 1);
                    break;
                }
            }

            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut sep = Vec::new();
            for &v in &comp {
                let l = self.level[v];
                if l < mid {
                    left.push(v);
                } else if l > mid {
                    right.push(v);
                } else if self.neighbors(v).iter().any(|&w| self.region[w] == comp_label && self.level[w] > mid) {
                    sep.push(v);
                } else {
                    // No neighbour beyond the cut: joins the near side.
                    left.push(v);
                }
            }
            self.clear_levels(&comp);

            let left_label = self.next_region;
            let right_label = self.next_region + 1;
            self.next_region += 2;
            for &v in &left {
                self.region[v] = left_label;
            }
            for &v in &right {
                self.region[v] = right_label;
            }
            for &v in &sep {
                self.region[v] = NUMBERED;
            }
            left.sort_unstable();
            right.sort_unstable();
            self.order(left, left_label);
            self.order(right, right_label);
            self.perm.extend_from_slice(&sep);
        }
    }
}
