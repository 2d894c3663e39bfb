//! Deciding display of a tree by a multi-labeled tree.
//!
//! For every vertex `v` of the input tree `t`, `M(v)` is the set of minimal
//! mul-tree vertices whose subtree displays `t_v`.  Leaves seed `M` with the
//! occurrences of their label; an internal vertex combines its children's
//! sets through pairwise LCAs.  The sets are antichains of size at most `k`
//! (the label multiplicity bound), which caps the combine step at `k²` pairs.
//!
//! A vertex is *marked* once its set is computed (empty counts).  The ready
//! queue holds vertices with both children marked; when a computed set comes
//! out empty the children with nonempty sets are maximal displayed subtrees
//! and go to the output.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lca::LcaIndex;
use crate::network::{MulTree, Tree, VertexId};

/// An antichain of mul-tree vertices, kept sorted by traversal entry number.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinSet {
    items: Vec<VertexId>,
}

impl MinSet {
    pub fn new(items: Vec<VertexId>) -> MinSet {
        MinSet { items }
    }

    pub fn as_slice(&self) -> &[VertexId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.items.contains(&v)
    }

    /// Checks the antichain property; test support.
    pub fn is_antichain(&self, idx: &LcaIndex) -> bool {
        for (i, &u) in self.items.iter().enumerate() {
            for &w in &self.items[i + 1..] {
                if idx.is_ancestor_unchecked(u, w) || idx.is_ancestor_unchecked(w, u) {
                    return false;
                }
            }
        }
        true
    }
}

/// Result of one DP run.
#[derive(Debug)]
pub struct DpOutcome {
    /// Maxima (wrt. the tree order of `t`) of the displayed subtrees, as
    /// emitted by the queue discipline.
    pub maxima: Vec<VertexId>,
    /// Every computed `M(v)`, keyed by vertex of `t`.  Absence means the
    /// vertex was never marked (some leaf below it has no matching label).
    pub minsets: HashMap<VertexId, MinSet>,
}

impl DpOutcome {
    /// Marked with a nonempty set, i.e. `t_v` is known to be displayed.
    pub fn displayed(&self, v: VertexId) -> bool {
        self.minsets.get(&v).is_some_and(|m| !m.is_empty())
    }
}

/// `M` at the leaves of `t`: all occurrences of each leaf's label.
///
/// Walks whichever side is smaller: the mul-tree's leaves when
/// `|mul| <= |t|`, the leaves of `t` against the label index otherwise.
pub fn leaf_minsets(mul: &MulTree, t: &Tree) -> HashMap<VertexId, MinSet> {
    let mut out: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    if mul.vertex_count() <= t.vertex_count() {
        for m in mul.leaves() {
            let label = mul.label(m).expect("leaves are labeled");
            if let Some(l) = t.leaf_by_label(label) {
                out.entry(l).or_default().push(m);
            }
        }
    } else {
        for l in t.leaves() {
            let label = t.label(l).expect("leaves are labeled");
            let occ = mul.vertices_with_label(label);
            if !occ.is_empty() {
                out.insert(l, occ.to_vec());
            }
        }
    }
    out.into_iter()
        .map(|(v, items)| (v, MinSet { items }))
        .collect()
}

/// `M(v)` from the children's sets: the minima of all pairwise LCAs that are
/// not already in either child set.
pub fn combine(idx: &LcaIndex, m1: &MinSet, m2: &MinSet) -> MinSet {
    let mut candidates: Vec<VertexId> = Vec::with_capacity(m1.len() * m2.len());
    for &u1 in &m1.items {
        for &u2 in &m2.items {
            candidates.push(idx.lca_unchecked(u1, u2));
        }
    }
    candidates.sort_by_key(|&v| idx.entry_of(v));
    candidates.dedup();
    candidates.retain(|&v| !m1.contains(v) && !m2.contains(v));

    // Minima sweep in entry order: a candidate inside the interval of the
    // current survivor is a descendant and replaces it.
    let mut minima: Vec<VertexId> = Vec::new();
    let mut last: Option<VertexId> = None;
    for v in candidates {
        match last {
            None => last = Some(v),
            Some(l) => {
                if idx.exit_of(v) <= idx.exit_of(l) {
                    // v is below l, so l is not minimal.
                    last = Some(v);
                } else {
                    minima.push(l);
                    last = Some(v);
                }
            }
        }
    }
    if let Some(l) = last {
        minima.push(l);
    }
    MinSet { items: minima }
}

/// Runs the bottom-up marking over `t`.  `shuffle` randomizes the order in
/// which ready vertices are processed; the result does not depend on it.
pub fn run_dp(
    mul: &MulTree,
    idx: &LcaIndex,
    t: &Tree,
    mut shuffle: Option<&mut ChaCha8Rng>,
) -> DpOutcome {
    let mut minsets = leaf_minsets(mul, t);
    let root = t.root();
    let mut maxima = Vec::new();

    if t.is_leaf(root) {
        if minsets.get(&root).is_some_and(|m| !m.is_empty()) {
            maxima.push(root);
        }
        return DpOutcome { maxima, minsets };
    }

    let mut queue: VecDeque<VertexId> = VecDeque::new();
    let mut enqueued: HashMap<VertexId, ()> = HashMap::new();
    let mut seed: Vec<VertexId> = minsets
        .keys()
        .filter_map(|&l| {
            let p = *t.parents(l).first()?;
            t.children(p)
                .iter()
                .all(|c| minsets.contains_key(c))
                .then_some(p)
        })
        .collect();
    seed.sort();
    seed.dedup();
    for p in seed {
        enqueued.insert(p, ());
        queue.push_back(p);
    }

    while !queue.is_empty() {
        let v = match shuffle.as_deref_mut() {
            Some(rng) => queue.remove(rng.random_range(0..queue.len())).unwrap(),
            None => queue.pop_front().unwrap(),
        };
        let children = t.children(v);
        debug_assert_eq!(children.len(), 2);
        let m = combine(idx, &minsets[&children[0]], &minsets[&children[1]]);
        debug_assert!(m.len() <= mul.k(), "|M(v)| exceeded the multiplicity bound");
        if m.is_empty() {
            for &c in children {
                if !minsets[&c].is_empty() {
                    maxima.push(c);
                }
            }
        }
        let nonempty = !m.is_empty();
        minsets.insert(v, m);
        if v == root {
            if nonempty {
                debug_assert!(maxima.is_empty());
                maxima.push(root);
            }
            continue;
        }
        let p = t.parents(v)[0];
        if t.children(p).iter().all(|c| minsets.contains_key(c)) && !enqueued.contains_key(&p) {
            enqueued.insert(p, ());
            queue.push_back(p);
        }
    }

    DpOutcome { maxima, minsets }
}

/// The maxima (wrt. the order of `t`) of the subtrees of `t` displayed by
/// `mul`, as produced by the queue discipline.
pub fn maximal_displayed(mul: &MulTree, t: &Tree) -> Vec<VertexId> {
    let idx = LcaIndex::build(mul.as_net()).expect("mul-trees have no reticulations");
    run_dp(mul, &idx, t, None).maxima
}

/// Does `mul` display all of `t`?
pub fn displays(mul: &MulTree, t: &Tree) -> bool {
    let maxima = maximal_displayed(mul, t);
    maxima.len() == 1 && maxima[0] == t.root()
}
