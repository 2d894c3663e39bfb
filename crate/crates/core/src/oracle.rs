//! Exponential-time ground truth for the display relation.
//!
//! A binary network displays a tree iff some *resolution* — a choice of one
//! incoming arc per reticulation — yields that tree after cleaning up.  The
//! oracle enumerates all `2^r` resolutions, which is exactly the subdivision
//! definition of display spelled out constructively; see the README for the
//! equivalence sketch.  Everything here is test scaffolding: correctness
//! over speed.

use std::collections::HashMap;

use thiserror::Error;

use crate::iso::trees_equal;
use crate::lca::LcaIndex;
use crate::network::{MulTree, Network, Tree, VertexId};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {0} reticulations, above the oracle bound of {1}")]
    TooManyReticulations(usize, usize),
    #[error("multi-labeled instance too large for exhaustive search ({0} leaves)")]
    TooLarge(usize),
}

/// One incoming arc chosen per reticulation.
#[derive(Debug, Clone, Default)]
pub struct Resolution {
    pub chosen_parent: HashMap<VertexId, VertexId>,
}

pub const DEFAULT_RETICULATION_BOUND: usize = 16;

/// The tree obtained by deleting all unchosen reticulation arcs and cleaning
/// up (unreachable debris, unlabeled sinks, degree-two vertices).
pub fn resolve_to_tree(net: &Network, resolution: &Resolution) -> Network {
    let mut work = net.clone();
    let mut seeds = Vec::new();
    for (&r, &keep) in &resolution.chosen_parent {
        let parents: Vec<VertexId> = work.parents(r).to_vec();
        debug_assert!(parents.contains(&keep));
        let mut kept_once = false;
        for p in parents {
            if p == keep && !kept_once {
                kept_once = true;
                continue;
            }
            work.remove_arc(p, r);
            seeds.push(p);
        }
        seeds.push(r);
    }
    let mut log = Vec::new();
    work.cleanup(seeds, &mut log);
    work
}

/// Restricts a tree to the leaves whose labels appear in `keep`, suppressing
/// whatever that strands.
fn restrict_to_labels(tree: &Network, keep: &Network) -> Network {
    let mut work = tree.clone();
    let extra: Vec<VertexId> = work
        .leaves()
        .filter(|&l| {
            let lab = work.label(l).expect("leaves are labeled");
            keep.leaf_by_label(lab).is_none()
        })
        .collect();
    let mut log = Vec::new();
    for l in extra {
        if work.vertex_count() == 1 {
            break;
        }
        work.delete_leaf(l, &mut log);
    }
    work
}

/// Iterates over every resolution of `net`, calling `f` with the derived
/// tree until `f` returns true.  Returns whether any call did.
pub fn any_resolution(
    net: &Network,
    bound: usize,
    mut f: impl FnMut(&Network) -> bool,
) -> Result<bool, OracleError> {
    let retics: Vec<VertexId> = net.reticulations().collect();
    if retics.len() > bound {
        return Err(OracleError::TooManyReticulations(retics.len(), bound));
    }
    for mask in 0u64..(1u64 << retics.len()) {
        let mut resolution = Resolution::default();
        for (i, &r) in retics.iter().enumerate() {
            let pick = ((mask >> i) & 1) as usize;
            // Valid binary networks have exactly two parents per
            // reticulation; indexing by bit covers both.
            let parents = net.parents(r);
            let keep = parents[pick.min(parents.len() - 1)];
            resolution.chosen_parent.insert(r, keep);
        }
        let tree = resolve_to_tree(net, &resolution);
        if f(&tree) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Ground-truth display check with the default reticulation bound.
pub fn oracle_displays(net: &Network, t: &Tree) -> Result<bool, OracleError> {
    oracle_displays_bounded(net, t, DEFAULT_RETICULATION_BOUND)
}

/// Does some resolution of `net`, restricted to the label set of `t`, equal
/// `t` as a leaf-labeled tree?
pub fn oracle_displays_bounded(net: &Network, t: &Tree, bound: usize) -> Result<bool, OracleError> {
    // A label of t missing from the network settles it immediately.
    for l in t.labels() {
        if net.leaf_by_label(l).is_none() {
            return Ok(false);
        }
    }
    any_resolution(net, bound, |tree| {
        let restricted = restrict_to_labels(tree, t.as_net());
        trees_equal(&restricted, t.as_net())
    })
}

/// All distinct trees displayed by `net` (canonical-duplicate-free), used by
/// small exhaustive tests.
pub fn displayed_trees(net: &Network, bound: usize) -> Result<Vec<Network>, OracleError> {
    let mut out: Vec<Network> = Vec::new();
    any_resolution(net, bound, |tree| {
        if !out.iter().any(|seen| trees_equal(seen, tree)) {
            out.push(tree.clone());
        }
        false
    })?;
    Ok(out)
}

const SUBTREE_LEAF_BOUND: usize = 20;

/// Vertices `u` of `mul` such that the subtree of `t` rooted at `v` embeds
/// into the subtree of `mul` rooted at `u`, reported as the minimal such `u`.
///
/// Exhaustive: every label-respecting assignment of the leaves of `t_v` to
/// distinct leaves of `mul` is tried; an assignment realizes the topology
/// iff the induced LCA map is strictly monotone with incomparable siblings,
/// which in a tree is also sufficient.
pub fn oracle_min_set(mul: &MulTree, t: &Tree, v: VertexId) -> Result<Vec<VertexId>, OracleError> {
    // Leaves of t under v, in a fixed order.
    let mut t_leaves = Vec::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if t.is_leaf(u) {
            t_leaves.push(u);
        }
        for &c in t.children(u) {
            stack.push(c);
        }
    }
    if t_leaves.len() > SUBTREE_LEAF_BOUND {
        return Err(OracleError::TooLarge(t_leaves.len()));
    }

    let idx = LcaIndex::build(mul.as_net()).expect("mul-trees have no reticulations");
    let mut assignment: Vec<VertexId> = Vec::with_capacity(t_leaves.len());
    let mut roots: Vec<VertexId> = Vec::new();
    search(mul, t, &t_leaves, &idx, v, &mut assignment, &mut roots);

    // Keep the <=-minima of all embedding roots.
    roots.sort_by_key(|&u| idx.entry_of(u));
    roots.dedup();
    let mut minima: Vec<VertexId> = Vec::new();
    for &u in &roots {
        if !roots
            .iter()
            .any(|&w| w != u && idx.is_ancestor_unchecked(w, u))
        {
            minima.push(u);
        }
    }
    Ok(minima)
}

fn search(
    mul: &MulTree,
    t: &Tree,
    t_leaves: &[VertexId],
    idx: &LcaIndex,
    v: VertexId,
    assignment: &mut Vec<VertexId>,
    roots: &mut Vec<VertexId>,
) {
    if assignment.len() == t_leaves.len() {
        let map: HashMap<VertexId, VertexId> = t_leaves
            .iter()
            .copied()
            .zip(assignment.iter().copied())
            .collect();
        if let Some(root) = embedding_root(mul, t, idx, v, &map) {
            roots.push(root);
        }
        return;
    }
    let leaf = t_leaves[assignment.len()];
    let label = t.label(leaf).expect("leaves are labeled").clone();
    for &cand in mul.vertices_with_label(&label) {
        if assignment.contains(&cand) {
            continue;
        }
        assignment.push(cand);
        search(mul, t, t_leaves, idx, v, assignment, roots);
        assignment.pop();
    }
}

/// The image of `v` under the LCA map of `map`, if the map realizes the
/// topology of `t_v` inside the mul-tree.
fn embedding_root(
    mul: &MulTree,
    t: &Tree,
    idx: &LcaIndex,
    v: VertexId,
    map: &HashMap<VertexId, VertexId>,
) -> Option<VertexId> {
    // Bottom-up over t_v; iterative post-order.
    let mut image: HashMap<VertexId, VertexId> = HashMap::new();
    let mut stack = vec![(v, false)];
    while let Some((u, expanded)) = stack.pop() {
        if t.is_leaf(u) {
            image.insert(u, *map.get(&u)?);
            continue;
        }
        if !expanded {
            stack.push((u, true));
            for &c in t.children(u) {
                stack.push((c, false));
            }
            continue;
        }
        let imgs: Vec<VertexId> = t.children(u).iter().map(|c| image[c]).collect();
        let [a, b] = imgs[..] else { return None };
        let l = idx.lca_unchecked(a, b);
        // Children images must be incomparable, i.e. the LCA is strictly
        // above both.
        if l == a || l == b {
            return None;
        }
        image.insert(u, l);
    }
    let _ = mul;
    image.get(&v).copied()
}

/// Does the mul-tree display the subtree of `t` rooted at `v`?
pub fn oracle_subtree_display(mul: &MulTree, t: &Tree, v: VertexId) -> Result<bool, OracleError> {
    Ok(!oracle_min_set(mul, t, v)?.is_empty())
}
