//! Stability (visibility) of vertices and network classification.
//!
//! A vertex `v` is stable on a leaf `l` if every root-to-`l` path contains
//! `v`, i.e. `v` dominates `l` in the DAG rooted at the network root.  The
//! witnesses are computed from the dominator tree; the engine's main loop
//! never calls this (it uses a cheaper local argument, see
//! [`crate::reduce::find_anchor_leaf`]) so a simple iterative-intersection
//! dominator computation over a topological order is plenty.

use std::collections::HashMap;

use crate::network::{Label, Network, VertexId};

/// Immediate dominators of all vertices reachable from the root.
///
/// One pass over a topological order suffices on a DAG: every parent is
/// finalized before its children.
pub fn immediate_dominators(net: &Network) -> HashMap<VertexId, VertexId> {
    let order = net
        .topo_order()
        .expect("dominators require an acyclic network");
    let mut pos: HashMap<VertexId, usize> = HashMap::with_capacity(order.len());
    for (i, &v) in order.iter().enumerate() {
        pos.insert(v, i);
    }
    let mut idom: HashMap<VertexId, VertexId> = HashMap::with_capacity(order.len());
    let root = net.root();

    let intersect = |idom: &HashMap<VertexId, VertexId>, mut a: VertexId, mut b: VertexId| {
        while a != b {
            if pos[&a] > pos[&b] {
                a = idom[&a];
            } else {
                b = idom[&b];
            }
        }
        a
    };

    for &v in &order {
        if v == root {
            continue;
        }
        let mut new_idom: Option<VertexId> = None;
        for &p in net.parents(v) {
            new_idom = Some(match new_idom {
                None => p,
                Some(cur) => intersect(&idom, cur, p),
            });
        }
        if let Some(d) = new_idom {
            idom.insert(v, d);
        }
    }
    idom
}

/// For each vertex, some leaf label it is stable on, if any.
///
/// `v` is stable on `l` iff `v` is an ancestor of `l` in the dominator tree,
/// so a witness is any leaf in `v`'s dominator subtree, propagated bottom-up.
pub fn stability_witnesses(net: &Network) -> HashMap<VertexId, Option<Label>> {
    let idom = immediate_dominators(net);
    let order = net.topo_order().expect("acyclic");
    let mut witness: HashMap<VertexId, Option<Label>> = HashMap::with_capacity(order.len());
    for &v in order.iter().rev() {
        let own = if net.is_leaf(v) {
            net.label(v).cloned()
        } else {
            None
        };
        let w = match own {
            Some(l) => Some(l),
            None => witness.get(&v).cloned().flatten(),
        };
        witness.insert(v, w.clone());
        if let (Some(l), Some(&d)) = (w, idom.get(&v)) {
            witness.entry(d).or_insert(None);
            let slot = witness.get_mut(&d).unwrap();
            if slot.is_none() {
                *slot = Some(l);
            }
        }
    }
    witness
}

/// Classification of a network by the strongest property it satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkClass {
    /// Every reticulation is stable.
    ReticulationVisible,
    /// Every vertex is stable or has all parents stable.
    NearlyStable,
    /// Neither of the named classes, but every tree vertex with a
    /// reticulation parent is stable, which is all the engine needs.
    GeneralOk,
    /// The engine precondition fails somewhere.
    Unsupported,
}

impl std::fmt::Display for NetworkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NetworkClass::ReticulationVisible => write!(f, "reticulation-visible"),
            NetworkClass::NearlyStable => write!(f, "nearly-stable"),
            NetworkClass::GeneralOk => write!(f, "general-ok"),
            NetworkClass::Unsupported => write!(f, "unsupported"),
        }
    }
}

fn stable(witness: &HashMap<VertexId, Option<Label>>, v: VertexId) -> bool {
    matches!(witness.get(&v), Some(Some(_)))
}

pub fn is_reticulation_visible(net: &Network) -> bool {
    let w = stability_witnesses(net);
    net.reticulations().all(|r| stable(&w, r))
}

pub fn is_nearly_stable(net: &Network) -> bool {
    let w = stability_witnesses(net);
    net.vertex_ids().all(|v| {
        stable(&w, v) || (net.indegree(v) > 0 && net.parents(v).iter().all(|&p| stable(&w, p)))
    })
}

/// Does every tree vertex with a reticulation parent have a stability witness?
pub fn engine_precondition_holds(net: &Network) -> bool {
    first_precondition_violation(net).is_none()
}

/// First tree vertex with a reticulation parent that is unstable, if any.
pub fn first_precondition_violation(net: &Network) -> Option<VertexId> {
    let w = stability_witnesses(net);
    net.vertex_ids().find(|&v| {
        !net.is_reticulation(v)
            && net.parents(v).iter().any(|&p| net.is_reticulation(p))
            && !stable(&w, v)
    })
}

/// Reports the strongest matching class of a valid network.
pub fn classify(net: &Network) -> NetworkClass {
    let w = stability_witnesses(net);
    if net.reticulations().all(|r| stable(&w, r)) {
        return NetworkClass::ReticulationVisible;
    }
    if net.vertex_ids().all(|v| {
        stable(&w, v) || (net.indegree(v) > 0 && net.parents(v).iter().all(|&p| stable(&w, p)))
    }) {
        return NetworkClass::NearlyStable;
    }
    let ok = net.vertex_ids().all(|v| {
        net.is_reticulation(v)
            || !net.parents(v).iter().any(|&p| net.is_reticulation(p))
            || stable(&w, v)
    });
    if ok {
        NetworkClass::GeneralOk
    } else {
        NetworkClass::Unsupported
    }
}

/// Length (arc count) of the longest path whose non-terminal vertices are
/// all reticulations.  Zero for trees.
pub fn max_reticulation_path(net: &Network) -> usize {
    // Walk down the forced child chain of each reticulation; chains() is a
    // DAG of outdegree 1 on reticulations, so memoization makes this linear.
    let mut memo: HashMap<VertexId, usize> = HashMap::new();
    let mut best = 0;
    for r in net.reticulations() {
        let mut path = Vec::new();
        let mut cur = r;
        let len = loop {
            if let Some(&l) = memo.get(&cur) {
                break l;
            }
            if !net.is_reticulation(cur) {
                break 0;
            }
            path.push(cur);
            cur = net.children(cur)[0];
        };
        let mut l = len;
        for &v in path.iter().rev() {
            l += 1;
            memo.insert(v, l);
        }
        best = best.max(*memo.get(&r).unwrap_or(&0));
    }
    best
}
