//! Tree components, the component DAG, and pyramid extraction.
//!
//! Removing all reticulations from a network leaves a forest of tree
//! components.  The roots of the non-trivial components (those that are more
//! than a single leaf) form the component DAG `Q`, ordered by the ancestor
//! relation and stored here as the immediate-successor relation: there is an
//! arc `C -> D` for every network arc from a tree vertex of `C` into a
//! reticulation whose forced child chain ends at the root of `D`.
//!
//! A leaf of `Q` (out-degree zero) roots a *pyramid*: below it every tree
//! vertex under a reticulation is a network leaf, so the subnetwork layers
//! into a tip of tree vertices, a base of reticulations and a foundation of
//! leaves.
//!
//! `Q` is maintained incrementally across the engine's edits.  The placement
//! rule only ever retires the processed leaf; the cherry rule and cleanup
//! cascades can additionally suppress a component root, which renames or
//! removes its `Q` vertex.  The rare shapes that would need arc rewiring
//! (reachable only on networks violating the engine's stability
//! precondition) just mark the DAG for a rebuild.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::network::{EditEvent, Network, VertexId};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("component DAG has no leaf to pop")]
    Empty,
    #[error("{0} is not a current leaf of the component DAG")]
    NotALeaf(VertexId),
    #[error("pyramid layering violated at {0}: internal tree vertex below a reticulation")]
    LayeringViolated(VertexId),
    #[error("base reticulation {0} has no recorded leaf below it")]
    UnmappedReticulation(VertexId),
}

/// For each reticulation with a pure-reticulation path down to a leaf, that
/// leaf.  Entries are written once and never changed before the vertex dies.
#[derive(Debug, Default, Clone)]
pub struct ReticulationLeafMap {
    map: Vec<Option<VertexId>>,
}

impl ReticulationLeafMap {
    pub fn build(net: &Network) -> ReticulationLeafMap {
        let mut rmap = ReticulationLeafMap::default();
        for leaf in net.leaves() {
            rmap.update_from_leaf(net, leaf);
        }
        rmap
    }

    pub fn lookup(&self, r: VertexId) -> Option<VertexId> {
        self.map.get(r.idx()).copied().flatten()
    }

    fn set(&mut self, r: VertexId, leaf: VertexId) {
        if self.map.len() <= r.idx() {
            self.map.resize(r.idx() + 1, None);
        }
        debug_assert!(self.map[r.idx()].is_none(), "entries are never overwritten");
        self.map[r.idx()] = Some(leaf);
    }

    /// Walks up from `leaf` through reticulations, recording `leaf` for every
    /// unmapped one encountered.  Stops at tree vertices and mapped entries,
    /// so the total work over a run stays linear.
    pub fn update_from_leaf(&mut self, net: &Network, leaf: VertexId) {
        debug_assert!(net.is_leaf(leaf));
        let mut stack = vec![leaf];
        while let Some(v) = stack.pop() {
            for &p in net.parents(v) {
                if net.is_reticulation(p) && self.lookup(p).is_none() {
                    self.set(p, leaf);
                    stack.push(p);
                }
            }
        }
    }

    /// Keeps the map current after a cleanup batch: a suppression that joins
    /// a reticulation directly to a leaf (or to a mapped reticulation) opens
    /// a new reticulation path.
    pub fn apply_event(&mut self, net: &Network, event: &EditEvent) {
        if let EditEvent::Suppressed {
            parent,
            child,
            parent_is_retic,
            child_is_leaf,
            ..
        } = event
        {
            if !parent_is_retic || !net.is_alive(*parent) || self.lookup(*parent).is_some() {
                return;
            }
            let source = if *child_is_leaf {
                Some(*child)
            } else if net.is_reticulation(*child) {
                self.lookup(*child)
            } else {
                None
            };
            if let Some(leaf) = source {
                if net.is_alive(leaf) && net.is_leaf(leaf) {
                    self.set(*parent, leaf);
                    let mut stack = vec![*parent];
                    while let Some(v) = stack.pop() {
                        for &p in net.parents(v) {
                            if net.is_reticulation(p) && self.lookup(p).is_none() {
                                self.set(p, leaf);
                                stack.push(p);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[derive(Debug, Default, Clone)]
struct QNode {
    /// Arc multiset to immediate successor components.
    out: BTreeMap<VertexId, u32>,
    /// Arc multiset from immediate predecessor components.
    incoming: BTreeMap<VertexId, u32>,
    out_total: u32,
}

/// The component DAG.
#[derive(Debug, Default)]
pub struct ComponentDag {
    nodes: BTreeMap<VertexId, QNode>,
    leaf_queue: VecDeque<VertexId>,
    needs_rebuild: bool,
}

impl ComponentDag {
    pub fn build(net: &Network) -> ComponentDag {
        let mut q = ComponentDag::default();
        q.rebuild(net);
        q
    }

    fn rebuild(&mut self, net: &Network) {
        self.nodes.clear();
        self.leaf_queue.clear();
        self.needs_rebuild = false;

        let order = match net.topo_order() {
            Some(o) => o,
            None => return,
        };
        // Component root of every tree vertex: itself if its parent is a
        // reticulation or missing, the parent's root otherwise.
        let mut cmap: HashMap<VertexId, VertexId> = HashMap::with_capacity(order.len());
        for &v in &order {
            if net.is_reticulation(v) {
                continue;
            }
            let root = match net.parents(v) {
                [p] if !net.is_reticulation(*p) => cmap[p],
                _ => v,
            };
            cmap.insert(v, root);
            if root == v && !net.is_leaf(v) {
                self.nodes.insert(v, QNode::default());
            }
        }

        // First non-reticulation vertex down each reticulation's child chain.
        let mut dest: HashMap<VertexId, VertexId> = HashMap::new();
        for r in net.reticulations() {
            let mut chain = Vec::new();
            let mut cur = r;
            while net.is_reticulation(cur) && !dest.contains_key(&cur) {
                chain.push(cur);
                cur = net.children(cur)[0];
            }
            let end = dest.get(&cur).copied().unwrap_or(cur);
            for v in chain {
                dest.insert(v, end);
            }
        }

        // One Q arc per network arc from a tree vertex into a reticulation
        // whose chain ends at a non-trivial component root.
        for v in net.vertex_ids() {
            if net.is_reticulation(v) {
                continue;
            }
            for &c in net.children(v) {
                if !net.is_reticulation(c) {
                    continue;
                }
                let d = dest[&c];
                if net.is_leaf(d) {
                    continue;
                }
                let src = cmap[&v];
                debug_assert!(self.nodes.contains_key(&d) && src != d);
                self.add_arc(src, d);
            }
        }

        let leaves: Vec<VertexId> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.out_total == 0)
            .map(|(&v, _)| v)
            .collect();
        self.leaf_queue.extend(leaves);
    }

    fn add_arc(&mut self, from: VertexId, to: VertexId) {
        let fnode = self.nodes.get_mut(&from).expect("unknown Q source");
        *fnode.out.entry(to).or_insert(0) += 1;
        fnode.out_total += 1;
        let tnode = self.nodes.get_mut(&to).expect("unknown Q target");
        *tnode.incoming.entry(from).or_insert(0) += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.nodes.get(&v).is_some_and(|n| n.out_total == 0)
    }

    pub fn component_roots(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.keys().copied()
    }

    /// Number of arcs, counting multiplicities.
    pub fn arc_count(&self) -> usize {
        self.nodes.values().map(|n| n.out_total as usize).sum()
    }

    /// True when the incremental state claims to be exact and matches a
    /// from-scratch rebuild of the current network; test support.
    pub fn consistent_with(&self, net: &Network) -> bool {
        if self.needs_rebuild {
            return true; // lazily stale by design
        }
        let fresh = ComponentDag::build(net);
        if fresh.nodes.len() != self.nodes.len() {
            return false;
        }
        fresh.nodes.iter().all(|(v, n)| {
            self.nodes
                .get(v)
                .is_some_and(|mine| mine.out == n.out && mine.out_total == n.out_total)
        })
    }

    /// Reorders the pending leaf queue; used to check order independence.
    pub fn shuffle_leaf_queue(&mut self, rng: &mut impl rand::Rng) {
        let mut entries: Vec<VertexId> = self.leaf_queue.drain(..).collect();
        for i in (1..entries.len()).rev() {
            entries.swap(i, rng.random_range(0..=i));
        }
        self.leaf_queue.extend(entries);
    }

    /// Next component root whose component has no other component below it.
    /// Rebuilds first if an irregular edit invalidated the incremental state.
    pub fn pop_leaf(&mut self, net: &Network) -> Option<VertexId> {
        if self.needs_rebuild {
            self.rebuild(net);
        }
        while let Some(v) = self.leaf_queue.pop_front() {
            if self.is_leaf(v) {
                return Some(v);
            }
        }
        None
    }

    /// Removes a fully processed leaf component; predecessors whose last
    /// outgoing arc disappears become leaves themselves.
    pub fn retire(&mut self, rho: VertexId) -> Result<(), DecomposeError> {
        if !self.is_leaf(rho) {
            return Err(if self.contains(rho) {
                DecomposeError::NotALeaf(rho)
            } else {
                DecomposeError::Empty
            });
        }
        self.remove_node(rho);
        Ok(())
    }

    fn remove_node(&mut self, v: VertexId) {
        let node = self.nodes.remove(&v).expect("removing an absent Q vertex");
        for (p, mult) in node.incoming {
            if let Some(pn) = self.nodes.get_mut(&p) {
                pn.out.remove(&v);
                pn.out_total -= mult;
                if pn.out_total == 0 {
                    self.leaf_queue.push_back(p);
                }
            }
        }
        if node.out_total > 0 {
            // Successor arcs would need rewiring; rebuild instead.
            for (s, _) in node.out {
                if let Some(sn) = self.nodes.get_mut(&s) {
                    sn.incoming.remove(&v);
                }
            }
            self.needs_rebuild = true;
        }
    }

    fn rekey(&mut self, old: VertexId, new: VertexId) {
        let node = self
            .nodes
            .remove(&old)
            .expect("rekeying an absent Q vertex");
        if self.nodes.contains_key(&new) {
            // The old entry was stale (its component had already been
            // restructured by an earlier irregular edit); recompute.
            self.needs_rebuild = true;
            return;
        }
        let ins: Vec<VertexId> = node.incoming.keys().copied().collect();
        let outs: Vec<VertexId> = node.out.keys().copied().collect();
        for p in ins {
            if let Some(pn) = self.nodes.get_mut(&p) {
                if let Some(m) = pn.out.remove(&old) {
                    *pn.out.entry(new).or_insert(0) += m;
                }
            }
        }
        for s in outs {
            if let Some(sn) = self.nodes.get_mut(&s) {
                if let Some(m) = sn.incoming.remove(&old) {
                    *sn.incoming.entry(new).or_insert(0) += m;
                }
            }
        }
        let is_leaf = node.out_total == 0;
        self.nodes.insert(new, node);
        if is_leaf {
            self.leaf_queue.push_back(new);
        }
    }

    /// Digests one structural edit.  `net` reflects the state after the whole
    /// cleanup batch; the event carries the facts captured at edit time.
    /// Once a rebuild is pending, further bookkeeping on the stale map is
    /// pointless and skipped.
    pub fn apply_event(&mut self, net: &Network, event: &EditEvent) {
        if self.needs_rebuild {
            return;
        }
        match *event {
            EditEvent::RootReplaced { old, new_root } => {
                if self.contains(old) {
                    if net.is_leaf(new_root) {
                        self.remove_node(old);
                    } else {
                        self.rekey(old, new_root);
                    }
                }
            }
            EditEvent::Suppressed {
                v,
                child,
                parent_is_retic,
                child_is_leaf,
                child_is_retic,
                ..
            } => {
                if self.contains(v) {
                    if child_is_leaf {
                        // The component shrank to a single leaf.
                        self.remove_node(v);
                    } else if child_is_retic {
                        // A lone-vertex component vanished from the middle of
                        // a chain; its arcs would need contraction.
                        self.needs_rebuild = true;
                        self.nodes.remove(&v);
                    } else {
                        self.rekey(v, child);
                    }
                } else if self.contains(child) && !parent_is_retic {
                    // A reticulation above a component root was suppressed and
                    // the component now hangs from a plain tree vertex: it
                    // merges into the component above.
                    self.needs_rebuild = true;
                }
            }
            EditEvent::Deleted { v } => {
                if self.contains(v) {
                    self.remove_node(v);
                }
            }
        }
    }
}

/// A pyramid: the subnetwork under a component-DAG leaf, layered.
#[derive(Debug)]
pub struct Pyramid {
    /// The component root; the only tip vertex that survives placement.
    pub rho: VertexId,
    /// Tree vertices of the component, including its leaves; BFS order.
    pub tip: Vec<VertexId>,
    pub tip_set: HashSet<VertexId>,
    /// Leaves hanging directly in the tip.
    pub tip_leaves: Vec<VertexId>,
    /// Reticulations below the tip.
    pub base: Vec<VertexId>,
    /// Network leaves below reticulations.
    pub foundation: Vec<VertexId>,
    /// Arcs from tip vertices into the base.
    pub cross_arcs: Vec<(VertexId, VertexId)>,
}

impl Pyramid {
    pub fn size(&self) -> usize {
        self.tip.len() + self.base.len() + self.foundation.len()
    }
}

/// Materializes the pyramid rooted at the given component-DAG leaf.
///
/// The traversal touches exactly the vertices of the subnetwork.  Every tree
/// vertex reached through a reticulation must be a network leaf; anything
/// else means the caller's component DAG is stale.
pub fn pop_pyramid(net: &Network, rho: VertexId) -> Result<Pyramid, DecomposeError> {
    let mut tip = Vec::new();
    let mut tip_set = HashSet::new();
    let mut tip_leaves = Vec::new();
    let mut base = Vec::new();
    let mut foundation = Vec::new();
    let mut cross_arcs = Vec::new();
    let mut seen_base: HashSet<VertexId> = HashSet::new();
    let mut seen_foundation: HashSet<VertexId> = HashSet::new();

    let mut tip_queue = VecDeque::from([rho]);
    tip_set.insert(rho);
    let mut base_queue = VecDeque::new();
    while let Some(v) = tip_queue.pop_front() {
        tip.push(v);
        if net.is_leaf(v) {
            tip_leaves.push(v);
        }
        for &c in net.children(v) {
            if net.is_reticulation(c) {
                cross_arcs.push((v, c));
                if seen_base.insert(c) {
                    base_queue.push_back(c);
                }
            } else if tip_set.insert(c) {
                tip_queue.push_back(c);
            }
        }
    }
    while let Some(r) = base_queue.pop_front() {
        base.push(r);
        for &c in net.children(r) {
            if net.is_reticulation(c) {
                if seen_base.insert(c) {
                    base_queue.push_back(c);
                }
            } else {
                if !net.is_leaf(c) {
                    return Err(DecomposeError::LayeringViolated(c));
                }
                if seen_foundation.insert(c) {
                    foundation.push(c);
                }
            }
        }
    }

    Ok(Pyramid {
        rho,
        tip,
        tip_set,
        tip_leaves,
        base,
        foundation,
        cross_arcs,
    })
}
