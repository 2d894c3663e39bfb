//! Constant-time LCA and ancestor queries on a frozen tree.
//!
//! Built from an Euler tour with a sparse table over depths: `O(n log n)`
//! preprocessing, `O(1)` per query.  Any mutation of the indexed tree
//! invalidates the index; the engine rebuilds one per pyramid.

use thiserror::Error;

use crate::network::{Network, VertexId};

#[derive(Debug, Error)]
pub enum LcaError {
    #[error("cannot index a structure with reticulations")]
    HasReticulations,
    #[error("vertex {0} is not part of the indexed tree")]
    NotIndexed(VertexId),
}

/// Euler-tour + sparse-table index over one immutable tree snapshot.
pub struct LcaIndex {
    /// Vertex at each Euler tour position.
    tour: Vec<VertexId>,
    /// First tour position of each vertex slot (`ABSENT` if not indexed).
    first: Vec<u32>,
    /// Depth of each tour position.
    depth: Vec<u32>,
    /// sparse[j][i] = position of the minimum depth in tour[i..i + 2^j).
    sparse: Vec<Vec<u32>>,
    /// Preorder entry/exit numbers for interval ancestor tests.
    entry: Vec<u32>,
    exit: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl LcaIndex {
    pub fn build(tree: &Network) -> Result<LcaIndex, LcaError> {
        if tree.reticulations().next().is_some() {
            return Err(LcaError::HasReticulations);
        }
        let slots = tree.slot_count();
        let mut tour = Vec::with_capacity(2 * tree.vertex_count());
        let mut depth = Vec::with_capacity(2 * tree.vertex_count());
        let mut first = vec![ABSENT; slots];
        let mut entry = vec![ABSENT; slots];
        let mut exit = vec![ABSENT; slots];

        // Iterative Euler tour; the second element counts children visited.
        let root = tree.root();
        let mut clock = 0u32;
        let mut stack: Vec<(VertexId, usize, u32)> = vec![(root, 0, 0)];
        while let Some((v, child_idx, d)) = stack.pop() {
            if child_idx == 0 {
                first[v.idx()] = tour.len() as u32;
                entry[v.idx()] = clock;
                clock += 1;
            }
            tour.push(v);
            depth.push(d);
            match tree.children(v).get(child_idx) {
                Some(&c) => {
                    stack.push((v, child_idx + 1, d));
                    stack.push((c, 0, d + 1));
                }
                None => {
                    exit[v.idx()] = clock;
                    clock += 1;
                }
            }
        }

        // Sparse table of argmin positions over depths.
        let n = tour.len();
        let levels = if n <= 1 { 1 } else { n.ilog2() as usize + 1 };
        let mut sparse: Vec<Vec<u32>> = Vec::with_capacity(levels);
        sparse.push((0..n as u32).collect());
        for j in 1..levels {
            let half = 1usize << (j - 1);
            let prev = &sparse[j - 1];
            let mut row = Vec::with_capacity(n.saturating_sub(2 * half) + 1);
            for i in 0..=n.saturating_sub(2 * half) {
                let a = prev[i];
                let b = prev[i + half];
                row.push(if depth[a as usize] <= depth[b as usize] {
                    a
                } else {
                    b
                });
            }
            sparse.push(row);
        }

        Ok(LcaIndex {
            tour,
            first,
            depth,
            sparse,
            entry,
            exit,
        })
    }

    fn check(&self, v: VertexId) -> Result<(), LcaError> {
        if self.first.get(v.idx()).copied().unwrap_or(ABSENT) == ABSENT {
            return Err(LcaError::NotIndexed(v));
        }
        Ok(())
    }

    /// Least common ancestor of `u` and `v`.
    pub fn lca(&self, u: VertexId, v: VertexId) -> Result<VertexId, LcaError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.lca_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn lca_unchecked(&self, u: VertexId, v: VertexId) -> VertexId {
        let a = self.first[u.idx()] as usize;
        let b = self.first[v.idx()] as usize;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let len = hi - lo + 1;
        let j = len.ilog2() as usize;
        let x = self.sparse[j][lo];
        let y = self.sparse[j][hi + 1 - (1 << j)];
        let pos = if self.depth[x as usize] <= self.depth[y as usize] {
            x
        } else {
            y
        };
        self.tour[pos as usize]
    }

    /// True iff `u <= v`, i.e. `v` is an ancestor of `u` or `u` itself.
    pub fn is_ancestor(&self, u: VertexId, v: VertexId) -> Result<bool, LcaError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.is_ancestor_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn is_ancestor_unchecked(&self, u: VertexId, v: VertexId) -> bool {
        self.entry[v.idx()] <= self.entry[u.idx()] && self.exit[u.idx()] <= self.exit[v.idx()]
    }

    /// Preorder entry number; used to sort vertices into traversal order.
    #[inline]
    pub(crate) fn entry_of(&self, v: VertexId) -> u32 {
        self.entry[v.idx()]
    }

    /// Postorder exit number paired with [`Self::entry_of`].
    #[inline]
    pub(crate) fn exit_of(&self, v: VertexId) -> u32 {
        self.exit[v.idx()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lbl(s: &str) -> Label {
        Label::taxon(s)
    }

    /// Naive LCA by walking both vertices up to the root.
    fn naive_lca(tree: &Network, u: VertexId, v: VertexId) -> VertexId {
        let mut anc = std::collections::HashSet::new();
        let mut cur = u;
        loop {
            anc.insert(cur);
            match tree.parents(cur) {
                [] => break,
                [p] => cur = *p,
                _ => unreachable!("tree"),
            }
        }
        let mut cur = v;
        loop {
            if anc.contains(&cur) {
                return cur;
            }
            cur = tree.parents(cur)[0];
        }
    }

    fn random_tree(seed: u64, n_leaves: usize) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Network::new();
        let root = net.add_vertex();
        let l0 = net.add_leaf(lbl("t0"));
        let l1 = net.add_leaf(lbl("t1"));
        net.add_arc(root, l0);
        net.add_arc(root, l1);
        net.set_root(root);
        let mut arcs: Vec<(VertexId, VertexId)> = vec![(root, l0), (root, l1)];
        for i in 2..n_leaves {
            let (u, v) = arcs[rng.random_range(0..arcs.len())];
            let mid = net.add_vertex();
            let leaf = net.add_leaf(lbl(&format!("t{i}")));
            net.remove_arc(u, v);
            net.add_arc(u, mid);
            net.add_arc(mid, v);
            net.add_arc(mid, leaf);
            arcs.retain(|&a| a != (u, v));
            arcs.push((u, mid));
            arcs.push((mid, v));
            arcs.push((mid, leaf));
        }
        net
    }

    #[test]
    fn single_leaf_index() {
        let mut n = Network::new();
        let v = n.add_leaf(lbl("a"));
        n.set_root(v);
        let idx = LcaIndex::build(&n).unwrap();
        assert_eq!(idx.lca(v, v).unwrap(), v);
        assert!(idx.is_ancestor(v, v).unwrap());
    }

    #[test]
    fn path_of_three() {
        let mut n = Network::new();
        let root = n.add_vertex();
        let mid = n.add_vertex();
        let leaf = n.add_leaf(lbl("a"));
        n.add_arc(root, mid);
        n.add_arc(mid, leaf);
        n.set_root(root);
        let idx = LcaIndex::build(&n).unwrap();
        assert_eq!(idx.lca(leaf, mid).unwrap(), mid);
        assert_eq!(idx.lca(leaf, root).unwrap(), root);
    }

    #[test]
    fn reticulation_input_is_rejected() {
        let n = crate::newick::parse_network("((a,(b)#H1),(#H1,c));").unwrap();
        assert!(matches!(
            LcaIndex::build(&n),
            Err(LcaError::HasReticulations)
        ));
    }

    #[test]
    fn matches_naive_walk_on_random_tree() {
        let tree = random_tree(42, 1000);
        let idx = LcaIndex::build(&tree).unwrap();
        let ids: Vec<VertexId> = tree.vertex_ids().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let u = ids[rng.random_range(0..ids.len())];
            let v = ids[rng.random_range(0..ids.len())];
            assert_eq!(idx.lca(u, v).unwrap(), naive_lca(&tree, u, v));
            assert_eq!(idx.lca(u, v).unwrap(), idx.lca(v, u).unwrap());
        }
    }

    #[test]
    fn lca_basics() {
        let tree = random_tree(3, 20);
        let idx = LcaIndex::build(&tree).unwrap();
        let root = tree.root();
        for v in tree.vertex_ids() {
            assert_eq!(idx.lca(v, v).unwrap(), v);
            assert_eq!(idx.lca(v, root).unwrap(), root);
            assert!(idx.is_ancestor(v, root).unwrap());
            assert!(idx.is_ancestor(v, v).unwrap());
        }
    }

    #[test]
    fn siblings_meet_at_parent() {
        let t = crate::newick::parse_tree("((a,b),c);").unwrap();
        let idx = LcaIndex::build(&t).unwrap();
        let a = t.leaf_by_label(&lbl("a")).unwrap();
        let b = t.leaf_by_label(&lbl("b")).unwrap();
        let parent = t.parents(a)[0];
        assert_eq!(idx.lca(a, b).unwrap(), parent);
    }

    #[test]
    fn ancestor_agrees_with_lca_definition() {
        let tree = random_tree(9, 25); // ~50 vertices
        let idx = LcaIndex::build(&tree).unwrap();
        let ids: Vec<VertexId> = tree.vertex_ids().collect();
        for &u in &ids {
            for &v in &ids {
                assert_eq!(
                    idx.is_ancestor(u, v).unwrap(),
                    idx.lca(u, v).unwrap() == v,
                    "mismatch at {u},{v}"
                );
            }
        }
    }

    #[test]
    fn stale_vertex_is_reported() {
        let tree = random_tree(1, 5);
        let idx = LcaIndex::build(&tree).unwrap();
        let ghost = VertexId(10_000);
        assert!(matches!(
            idx.lca(ghost, tree.root()),
            Err(LcaError::NotIndexed(_))
        ));
    }
}
