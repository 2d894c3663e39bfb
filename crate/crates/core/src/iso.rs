//! Leaf-label-preserving isomorphism checks.
//!
//! Trees are compared through a canonical child order (sort by the smallest
//! leaf label below each child), which is exact for 1-labeled trees.
//! Networks are compared by growing an explicit bijection upward from the
//! forced leaf correspondence, backtracking over the rare ambiguous parent
//! choices, and verifying the final map edge by edge.

use std::collections::HashMap;

use crate::network::{Label, Network, VertexId};

/// Smallest leaf label in each subtree, used as a canonical sort key.
fn min_labels(net: &Network) -> HashMap<VertexId, Label> {
    let order = net.topo_order().expect("acyclic");
    let mut min: HashMap<VertexId, Label> = HashMap::with_capacity(order.len());
    for &v in order.iter().rev() {
        let mut best: Option<Label> = net.label(v).cloned();
        for c in net.children(v) {
            let cl = &min[c];
            if best.as_ref().is_none_or(|b| cl < b) {
                best = Some(cl.clone());
            }
        }
        min.insert(v, best.expect("every sink is labeled"));
    }
    min
}

/// Leaf-labeled topology equality of two 1-labeled trees.
///
/// Children are visited in canonical order on both sides simultaneously; the
/// trees are equal iff the traversals never diverge.
pub fn trees_equal(a: &Network, b: &Network) -> bool {
    if a.vertex_count() != b.vertex_count() || a.label_count() != b.label_count() {
        return false;
    }
    if a.vertex_count() == 0 {
        return true;
    }
    let min_a = min_labels(a);
    let min_b = min_labels(b);
    let sorted = |net: &Network, v: VertexId, min: &HashMap<VertexId, Label>| {
        let mut cs: Vec<VertexId> = net.children(v).to_vec();
        cs.sort_by(|x, y| min[x].cmp(&min[y]));
        cs
    };
    let mut stack = vec![(a.root(), b.root())];
    while let Some((u, v)) = stack.pop() {
        match (a.label(u), b.label(v)) {
            (Some(x), Some(y)) => {
                if x != y {
                    return false;
                }
            }
            (None, None) => {}
            _ => return false,
        }
        let cu = sorted(a, u, &min_a);
        let cv = sorted(b, v, &min_b);
        if cu.len() != cv.len() {
            return false;
        }
        stack.extend(cu.into_iter().zip(cv));
    }
    true
}

/// Leaf-label-preserving isomorphism of two valid 1-labeled networks.
pub fn networks_isomorphic(a: &Network, b: &Network) -> bool {
    if a.vertex_count() != b.vertex_count() {
        return false;
    }
    let mut labels_a: Vec<&Label> = a.labels().collect();
    let mut labels_b: Vec<&Label> = b.labels().collect();
    labels_a.sort();
    labels_b.sort();
    if labels_a != labels_b {
        return false;
    }
    if a.vertex_count() == 0 {
        return true;
    }

    // The leaf map is forced by labels.
    let mut fwd: HashMap<VertexId, VertexId> = HashMap::new();
    let mut bwd: HashMap<VertexId, VertexId> = HashMap::new();
    for leaf in a.leaves() {
        let l = a.label(leaf).expect("leaves are labeled");
        let img = match b.leaf_by_label(l) {
            Some(x) if b.is_leaf(x) => x,
            _ => return false,
        };
        fwd.insert(leaf, img);
        bwd.insert(img, leaf);
    }

    if !extend(a, b, &mut fwd, &mut bwd) {
        return false;
    }
    verify(a, b, &fwd)
}

/// A vertex of `a` is ready when all children are mapped; its image must be a
/// common parent of the children's images.  Usually that candidate is unique;
/// when two parents qualify the search branches.
fn extend(
    a: &Network,
    b: &Network,
    fwd: &mut HashMap<VertexId, VertexId>,
    bwd: &mut HashMap<VertexId, VertexId>,
) -> bool {
    let next = a
        .vertex_ids()
        .find(|v| !fwd.contains_key(v) && a.children(*v).iter().all(|c| fwd.contains_key(c)));
    let u = match next {
        Some(u) => u,
        None => return fwd.len() == a.vertex_count(),
    };

    let first_child = a.children(u)[0];
    let mut candidates: Vec<VertexId> = b
        .parents(fwd[&first_child])
        .iter()
        .copied()
        .filter(|w| !bwd.contains_key(w))
        .filter(|&w| {
            if b.indegree(w) != a.indegree(u) || b.outdegree(w) != a.outdegree(u) {
                return false;
            }
            // Child multisets must correspond under the current map.
            let mut want: Vec<VertexId> = a.children(u).iter().map(|c| fwd[c]).collect();
            let mut have: Vec<VertexId> = b.children(w).to_vec();
            want.sort();
            have.sort();
            want == have
        })
        .collect();
    candidates.dedup();

    for w in candidates {
        fwd.insert(u, w);
        bwd.insert(w, u);
        if extend(a, b, fwd, bwd) {
            return true;
        }
        fwd.remove(&u);
        bwd.remove(&w);
    }
    false
}

fn verify(a: &Network, b: &Network, fwd: &HashMap<VertexId, VertexId>) -> bool {
    if fwd.len() != a.vertex_count() {
        return false;
    }
    if fwd[&a.root()] != b.root() {
        return false;
    }
    for v in a.vertex_ids() {
        let mut want: Vec<VertexId> = a.children(v).iter().map(|c| fwd[c]).collect();
        let mut have: Vec<VertexId> = b.children(fwd[&v]).to_vec();
        want.sort();
        have.sort();
        if want != have {
            return false;
        }
        if a.label(v) != b.label(fwd[&v]) {
            return false;
        }
    }
    true
}
