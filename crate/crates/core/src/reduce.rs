//! The two reduction rules driving the engine, plus their supporting steps.
//!
//! *Cherry reduction*: a cherry of the network must be a cherry of the tree,
//! in which case one of its leaves is deleted on both sides; otherwise the
//! instance is rejected outright.
//!
//! *Pyramid placement*: once the largest subtree `t_v` of the tree that is
//! displayed by the current pyramid and anchored at the pyramid root's
//! stability witness is known, the pyramid's tip and `t_v` are both
//! collapsed onto a shared fresh label.  Cleanup deletes everything the
//! collapse disconnects (reticulation chains to removed leaves, unlabeled
//! sinks) and re-suppresses degree-two vertices, so the network invariants
//! hold again afterwards.

use std::collections::HashMap;

use crate::decompose::{DecomposeError, Pyramid, ReticulationLeafMap};
use crate::mul::DpOutcome;
use crate::network::{EditEvent, Label, MulTree, Network, Tree, VertexId};

/// Result of exhaustive cherry reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CherryOutcome {
    Reduced,
    /// Some cherry of the network is not a cherry of the tree: the network
    /// cannot display the tree.
    Rejected,
}

/// Applies the cherry rule until no cherry of `net` remains, starting from
/// all leaves.  `reduced` collects the label pairs of applied reductions.
pub fn apply_cherry_reductions(
    net: &mut Network,
    t: &mut Tree,
    log: &mut Vec<EditEvent>,
    reduced: &mut Vec<(Label, Label)>,
) -> CherryOutcome {
    let seeds: Vec<VertexId> = net.leaves().collect();
    apply_cherry_reductions_seeded(net, t, seeds, log, reduced)
}

/// Outcome of offering one candidate leaf to the cherry rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CherryStep {
    /// The candidate is not part of a network cherry (or is gone).
    NotApplicable,
    /// The cherry matched in both structures and `deleted` was removed.
    Applied {
        deleted: Label,
        kept: Label,
        kept_leaf: VertexId,
    },
    /// The candidate forms a network cherry that is not a cherry of `t`.
    Rejected,
}

/// One application of the cherry rule at leaf `a`.
pub fn reduce_cherry_at(
    net: &mut Network,
    t: &mut Tree,
    a: VertexId,
    log: &mut Vec<EditEvent>,
) -> CherryStep {
    if !net.is_alive(a) || !net.is_leaf(a) {
        return CherryStep::NotApplicable;
    }
    let p = match net.parents(a) {
        [p] => *p,
        _ => return CherryStep::NotApplicable, // root leaf of a collapsed network
    };
    let sibling = match net.children(p) {
        [x, y] if *x == a => *y,
        [x, y] if *y == a => *x,
        _ => return CherryStep::NotApplicable,
    };
    if !net.is_leaf(sibling) {
        return CherryStep::NotApplicable;
    }
    let la = net.label(a).expect("leaves are labeled").clone();
    let lb = net.label(sibling).expect("leaves are labeled").clone();

    // Is (a, b) also a cherry of t?
    let ta = match t.leaf_by_label(&la) {
        Some(x) => x,
        None => {
            debug_assert!(false, "network label missing from the tree");
            return CherryStep::NotApplicable;
        }
    };
    let tp = match t.parents(ta) {
        [p] => *p,
        _ => return CherryStep::Rejected, // t is a lone leaf, net is not
    };
    let t_sibling = match t.children(tp) {
        [x, y] if *x == ta => *y,
        [x, y] if *y == ta => *x,
        _ => return CherryStep::Rejected,
    };
    if !(t.is_leaf(t_sibling) && t.label(t_sibling) == Some(&lb)) {
        return CherryStep::Rejected;
    }

    // Delete a on both sides; the unary parents get suppressed by the
    // leaf-deletion cleanup.
    net.delete_leaf(a, log);
    let mut t_log = Vec::new();
    t.net_mut().delete_leaf(ta, &mut t_log);
    CherryStep::Applied {
        deleted: la,
        kept: lb,
        kept_leaf: sibling,
    }
}

/// Cherry reduction restricted to a work list of candidate leaves; edits
/// re-enqueue any leaf they touch, so the rule still runs to exhaustion over
/// everything reachable from the seeds.
pub fn apply_cherry_reductions_seeded(
    net: &mut Network,
    t: &mut Tree,
    seeds: Vec<VertexId>,
    log: &mut Vec<EditEvent>,
    reduced: &mut Vec<(Label, Label)>,
) -> CherryOutcome {
    let mut queue: std::collections::VecDeque<VertexId> = seeds.into();
    while let Some(a) = queue.pop_front() {
        let before = log.len();
        match reduce_cherry_at(net, t, a, log) {
            CherryStep::NotApplicable => {}
            CherryStep::Rejected => return CherryOutcome::Rejected,
            CherryStep::Applied {
                deleted,
                kept,
                kept_leaf,
            } => {
                reduced.push((deleted, kept));
                queue.push_back(kept_leaf);
                for ev in &log[before..] {
                    match *ev {
                        EditEvent::Suppressed {
                            child,
                            child_is_leaf: true,
                            ..
                        } => queue.push_back(child),
                        EditEvent::RootReplaced { new_root, .. } => queue.push_back(new_root),
                        _ => {}
                    }
                }
            }
        }
    }
    CherryOutcome::Reduced
}

/// Builds the multi-labeled tree of a pyramid: the tip, with every cross arc
/// into the base replaced by a fresh leaf copying the label of the unique
/// leaf below that reticulation.
pub fn pyramid_to_multree(
    p: &Pyramid,
    net: &Network,
    rmap: &ReticulationLeafMap,
) -> Result<MulTree, DecomposeError> {
    let mut out = Network::new();
    let mut map: HashMap<VertexId, VertexId> = HashMap::with_capacity(p.tip.len());
    for &v in &p.tip {
        let nv = out.add_vertex();
        if let Some(l) = net.label(v) {
            out.set_label(nv, l.clone());
        }
        map.insert(v, nv);
    }
    for &v in &p.tip {
        for &c in net.children(v) {
            if let Some(&nc) = map.get(&c) {
                out.add_arc(map[&v], nc);
            } else {
                // Cross arc into the base.
                debug_assert!(net.is_reticulation(c));
                let below = rmap
                    .lookup(c)
                    .filter(|&l| net.is_alive(l) && net.is_leaf(l))
                    .ok_or(DecomposeError::UnmappedReticulation(c))?;
                let label = net.label(below).expect("leaves are labeled").clone();
                let leaf = out.add_leaf(label);
                out.add_arc(map[&v], leaf);
            }
        }
    }
    out.set_root(map[&p.rho]);
    debug_assert!(out.vertex_count() <= 2 * p.tip.len() + 1);
    MulTree::try_new(out).map_err(|_| DecomposeError::LayeringViolated(p.rho))
}

/// A leaf of the pyramid that the pyramid root is stable on.
///
/// Any leaf hanging directly in the tip qualifies: the tip is a tree
/// component, so every path from the network root enters it at the pyramid
/// root.  Otherwise a foundation leaf works iff every tree vertex with an
/// arc into the reticulations above it lies inside the tip.  If no leaf
/// qualifies the pyramid root is unstable and the engine's precondition is
/// violated.
pub fn find_anchor_leaf(p: &Pyramid, net: &Network) -> Option<Label> {
    if let Some(&l) = p.tip_leaves.first() {
        return Some(net.label(l).expect("leaves are labeled").clone());
    }
    let mut memo: HashMap<VertexId, bool> = HashMap::new();
    for &leaf in &p.foundation {
        let parent = net.parents(leaf)[0];
        if closure_entries_inside_tip(net, p, parent, &mut memo) {
            return Some(net.label(leaf).expect("leaves are labeled").clone());
        }
    }
    None
}

/// Do all paths into the reticulation closure above `start` enter through
/// the tip?  Iterative with memoization; the closure may extend to
/// reticulations outside the pyramid.
fn closure_entries_inside_tip(
    net: &Network,
    p: &Pyramid,
    start: VertexId,
    memo: &mut HashMap<VertexId, bool>,
) -> bool {
    debug_assert!(net.is_reticulation(start));
    let mut stack: Vec<(VertexId, usize)> = vec![(start, 0)];
    'outer: while let Some(&(v, next)) = stack.last() {
        if memo.contains_key(&v) {
            stack.pop();
            continue;
        }
        let parents = net.parents(v);
        let mut i = next;
        while i < parents.len() {
            let q = parents[i];
            i += 1;
            if net.is_reticulation(q) {
                match memo.get(&q) {
                    Some(false) => {
                        memo.insert(v, false);
                        stack.pop();
                        continue 'outer;
                    }
                    Some(true) => {}
                    None => {
                        stack.last_mut().unwrap().1 = i;
                        stack.push((q, 0));
                        continue 'outer;
                    }
                }
            } else if !p.tip_set.contains(&q) {
                memo.insert(v, false);
                stack.pop();
                continue 'outer;
            }
        }
        memo.insert(v, true);
        stack.pop();
    }
    memo[&start]
}

/// The unique maximal vertex `v` of `t` with the anchor leaf below it whose
/// subtree the pyramid displays.
///
/// The displayed ancestors of the anchor leaf form a prefix of its ancestor
/// chain and every vertex of that prefix was marked by the DP, so walking up
/// while the computed sets stay nonempty finds the maximum directly.  This
/// also covers anchored maxima that the queue discipline never emitted into
/// its output list (processing can stop at an unmarked sibling below them).
pub fn select_anchored_maximum(dp: &DpOutcome, t: &Tree, c_leaf: VertexId) -> VertexId {
    debug_assert!(
        dp.displayed(c_leaf),
        "the anchor leaf itself is always displayed"
    );
    let mut v = c_leaf;
    while let [parent] = t.parents(v) {
        if dp.displayed(*parent) {
            v = *parent;
        } else {
            break;
        }
    }
    v
}

/// Applies the placement rule for pyramid `p` and chosen tree vertex `v`:
/// collapse `t_v` to `v`, collapse the tip to its root, give both the fresh
/// label, and clean up everything this disconnects.
pub fn apply_pyramid_placement(
    net: &mut Network,
    t: &mut Tree,
    p: &Pyramid,
    v: VertexId,
    fresh: Label,
    log: &mut Vec<EditEvent>,
) {
    // Subtree of t below v.
    let mut t_sub = Vec::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        t_sub.push(u);
        for &c in t.children(u) {
            stack.push(c);
        }
    }
    let t_labels: Vec<Label> = t_sub.iter().filter_map(|&u| t.label(u).cloned()).collect();

    // Network side: leaves labeled in t_v, all tip vertices except the root,
    // and the root's outgoing arcs all go.
    let mut doomed: Vec<VertexId> = Vec::new();
    for l in &t_labels {
        if let Some(leaf) = net.leaf_by_label(l) {
            doomed.push(leaf);
        }
    }
    doomed.extend(p.tip.iter().copied().filter(|&x| x != p.rho));

    let mut seeds: Vec<VertexId> = Vec::new();
    for &d in &doomed {
        if !net.is_alive(d) {
            continue;
        }
        for c in net.children(d).to_vec() {
            net.remove_arc(d, c);
            seeds.push(c);
        }
        for par in net.parents(d).to_vec() {
            net.remove_arc(par, d);
            seeds.push(par);
        }
        net.delete_detached(d);
        log.push(EditEvent::Deleted { v: d });
    }
    for c in net.children(p.rho).to_vec() {
        net.remove_arc(p.rho, c);
        seeds.push(c);
    }
    net.set_label(p.rho, fresh.clone());
    seeds.retain(|&s| net.is_alive(s));
    net.cleanup(seeds, log);

    // Tree side: t_v collapses onto v, which takes the fresh label.
    let tn = t.net_mut();
    for &u in &t_sub {
        if u == v {
            continue;
        }
        for c in tn.children(u).to_vec() {
            tn.remove_arc(u, c);
        }
        for par in tn.parents(u).to_vec() {
            tn.remove_arc(par, u);
        }
        tn.delete_detached(u);
    }
    tn.set_label(v, fresh);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{pop_pyramid, ComponentDag, ReticulationLeafMap};
    use crate::lca::LcaIndex;
    use crate::mul::run_dp;
    use crate::newick::{parse_network, parse_tree};
    use crate::oracle::oracle_displays;

    fn lbl(s: &str) -> Label {
        Label::taxon(s)
    }

    #[test]
    fn identical_trees_reduce_to_a_single_leaf() {
        let mut net = parse_network("((a,b),c);").unwrap();
        let mut t = parse_tree("((a,b),c);").unwrap();
        let mut log = Vec::new();
        let mut reduced = Vec::new();
        let outcome = apply_cherry_reductions(&mut net, &mut t, &mut log, &mut reduced);
        assert_eq!(outcome, CherryOutcome::Reduced);
        assert_eq!(net.vertex_count(), 1);
        assert_eq!(t.vertex_count(), 1);
        assert_eq!(net.label(net.root()), t.label(t.root()));
        assert_eq!(reduced.len(), 2);
    }

    #[test]
    fn mismatched_cherry_rejects() {
        let mut net = parse_network("((a,b),c);").unwrap();
        let mut t = parse_tree("((a,c),b);").unwrap();
        let mut log = Vec::new();
        let mut reduced = Vec::new();
        assert_eq!(
            apply_cherry_reductions(&mut net, &mut t, &mut log, &mut reduced),
            CherryOutcome::Rejected
        );
    }

    #[test]
    fn network_without_cherries_is_untouched() {
        // Every leaf's sibling is a reticulation here.
        let mut net = parse_network("((a,(b)#H1),(#H1,c));").unwrap();
        let mut t = parse_tree("((a,b),c);").unwrap();
        let before = net.vertex_count();
        let mut log = Vec::new();
        let mut reduced = Vec::new();
        let outcome = apply_cherry_reductions(&mut net, &mut t, &mut log, &mut reduced);
        assert_eq!(outcome, CherryOutcome::Reduced);
        assert_eq!(net.vertex_count(), before);
        assert!(reduced.is_empty());
    }

    #[test]
    fn cherry_reduction_preserves_the_oracle_verdict() {
        let base = parse_network("(((a,b),(d)#H1),(#H1,c));").unwrap();
        for t_text in ["(((a,b),d),c);", "((a,b),(d,c));", "(((a,d),b),c);"] {
            let mut net = base.clone();
            let mut t = parse_tree(t_text).unwrap();
            let before = oracle_displays(&net, &t).unwrap();
            let mut log = Vec::new();
            let mut reduced = Vec::new();
            match apply_cherry_reductions(&mut net, &mut t, &mut log, &mut reduced) {
                CherryOutcome::Rejected => assert!(!before, "rejection must imply non-display"),
                CherryOutcome::Reduced => {
                    let after = oracle_displays(&net, &t).unwrap();
                    assert_eq!(before, after, "t = {t_text}");
                    assert!(net.validate().is_valid());
                }
            }
        }
    }

    #[test]
    fn multree_of_reticulation_free_pyramid_is_the_tip() {
        let net = parse_network("((a,b),c);").unwrap();
        let p = pop_pyramid(&net, net.root()).unwrap();
        let rmap = ReticulationLeafMap::build(&net);
        let mul = pyramid_to_multree(&p, &net, &rmap).unwrap();
        assert_eq!(mul.vertex_count(), 5);
        assert_eq!(mul.k(), 1);
    }

    #[test]
    fn multree_duplicates_shared_foundation_labels() {
        // Both cross arcs reach the same leaf b below the reticulation.
        let net = parse_network("((a,(b)#H1),(#H1,c));").unwrap();
        let p = pop_pyramid(&net, net.root()).unwrap();
        let rmap = ReticulationLeafMap::build(&net);
        let mul = pyramid_to_multree(&p, &net, &rmap).unwrap();
        assert_eq!(mul.k(), 2);
        assert_eq!(mul.vertices_with_label(&lbl("b")).len(), 2);
        assert!(mul.vertex_count() <= 2 * p.tip.len() + 1);
    }

    #[test]
    fn multree_multiplicity_stays_under_base_height_bound() {
        // Chain r1 -> r2 -> c of base height 2 entered from three tip
        // vertices: multiplicity 3 <= 2^2.
        let mut net = Network::new();
        let root = net.add_vertex();
        let u1 = net.add_vertex();
        let u2 = net.add_vertex();
        let u3 = net.add_vertex();
        let r1 = net.add_vertex();
        let r2 = net.add_vertex();
        let a = net.add_leaf(lbl("a"));
        let b = net.add_leaf(lbl("b"));
        let c = net.add_leaf(lbl("c"));
        net.add_arc(root, u1);
        net.add_arc(root, u2);
        net.add_arc(u1, a);
        net.add_arc(u1, r1);
        net.add_arc(u2, r1);
        net.add_arc(u2, u3);
        net.add_arc(u3, b);
        net.add_arc(u3, r2);
        net.add_arc(r1, r2);
        net.add_arc(r2, c);
        net.set_root(root);
        let p = pop_pyramid(&net, root).unwrap();
        assert_eq!(p.base.len(), 2);
        let rmap = ReticulationLeafMap::build(&net);
        let mul = pyramid_to_multree(&p, &net, &rmap).unwrap();
        assert_eq!(mul.vertices_with_label(&lbl("c")).len(), 3);
        assert!(mul.k() <= p.tip.len().min(1 << 2));
    }

    #[test]
    fn anchor_prefers_tip_leaves() {
        let net = parse_network("((a,(b)#H1),(#H1,c));").unwrap();
        let p = pop_pyramid(&net, net.root()).unwrap();
        let anchor = find_anchor_leaf(&p, &net).unwrap();
        assert!(anchor == lbl("a") || anchor == lbl("c"));
    }

    /// Tip without leaves: {rho, m} over reticulations h1 (both parents in
    /// the tip) and h2 (one parent outside), foundation {f1, f2}.
    fn leafless_tip_net() -> (Network, VertexId) {
        let mut net = Network::new();
        let root = net.add_vertex();
        let u1 = net.add_vertex();
        let u2 = net.add_vertex();
        let u3 = net.add_vertex();
        let hr = net.add_vertex();
        let rho = net.add_vertex();
        let m = net.add_vertex();
        let h1 = net.add_vertex();
        let h2 = net.add_vertex();
        let l1 = net.add_leaf(lbl("l1"));
        let l2 = net.add_leaf(lbl("l2"));
        let f1 = net.add_leaf(lbl("f1"));
        let f2 = net.add_leaf(lbl("f2"));
        net.add_arc(root, u1);
        net.add_arc(root, u2);
        net.add_arc(u1, l1);
        net.add_arc(u1, hr);
        net.add_arc(u2, hr);
        net.add_arc(u2, u3);
        net.add_arc(u3, l2);
        net.add_arc(u3, h2);
        net.add_arc(hr, rho);
        net.add_arc(rho, m);
        net.add_arc(rho, h1);
        net.add_arc(m, h1);
        net.add_arc(m, h2);
        net.add_arc(h1, f1);
        net.add_arc(h2, f2);
        net.set_root(root);
        assert!(net.validate().is_valid(), "{}", net.validate());
        (net, rho)
    }

    #[test]
    fn anchor_finds_tip_fed_foundation_leaf() {
        let (net, rho) = leafless_tip_net();
        let q = ComponentDag::build(&net);
        assert!(q.is_leaf(rho));
        let p = pop_pyramid(&net, rho).unwrap();
        assert!(p.tip_leaves.is_empty());
        // f1's reticulation has both parents in the tip; f2's has one outside.
        assert_eq!(find_anchor_leaf(&p, &net), Some(lbl("f1")));
    }

    /// Both foundation reticulations have a parent outside the component:
    /// the pyramid root is unstable and no anchor exists.
    #[test]
    fn anchor_detects_unstable_pyramid_root() {
        let mut net = Network::new();
        let root = net.add_vertex();
        let u1 = net.add_vertex();
        let u2 = net.add_vertex();
        let u3 = net.add_vertex();
        let hr = net.add_vertex();
        let rho = net.add_vertex();
        let h1 = net.add_vertex();
        let h2 = net.add_vertex();
        let l1 = net.add_leaf(lbl("l1"));
        let f1 = net.add_leaf(lbl("f1"));
        let f2 = net.add_leaf(lbl("f2"));
        net.add_arc(root, u1);
        net.add_arc(root, u2);
        net.add_arc(u1, l1);
        net.add_arc(u1, hr);
        net.add_arc(u2, hr);
        net.add_arc(u2, u3);
        net.add_arc(u3, h1);
        net.add_arc(u3, h2);
        net.add_arc(hr, rho);
        net.add_arc(rho, h1);
        net.add_arc(rho, h2);
        net.add_arc(h1, f1);
        net.add_arc(h2, f2);
        net.set_root(root);
        assert!(net.validate().is_valid(), "{}", net.validate());
        let p = pop_pyramid(&net, rho).unwrap();
        assert_eq!(find_anchor_leaf(&p, &net), None);
        // classify agrees that the precondition fails.
        assert_eq!(
            crate::stability::classify(&net),
            crate::stability::NetworkClass::Unsupported
        );
    }

    #[test]
    fn anchored_maximum_walks_past_unemitted_vertices() {
        // mul has labels {a, q}, t = (a, z) with z foreign: the DP never
        // processes the root, so its output list is empty, yet the anchored
        // maximum (the a leaf) must still be found.
        let mut mn = Network::new();
        let r = mn.add_vertex();
        let a = mn.add_leaf(lbl("a"));
        let q = mn.add_leaf(lbl("q"));
        mn.add_arc(r, a);
        mn.add_arc(r, q);
        mn.set_root(r);
        let mul = MulTree::try_new(mn).unwrap();
        let t = parse_tree("(a,z);").unwrap();
        let idx = LcaIndex::build(mul.as_net()).unwrap();
        let dp = run_dp(&mul, &idx, &t, None);
        assert!(dp.maxima.is_empty(), "queue never fires");
        let c_leaf = t.leaf_by_label(&lbl("a")).unwrap();
        assert_eq!(select_anchored_maximum(&dp, &t, c_leaf), c_leaf);
    }

    #[test]
    fn anchored_maximum_reaches_the_root_when_everything_displays() {
        let net = parse_network("((a,(b)#H1),(#H1,c));").unwrap();
        let p = pop_pyramid(&net, net.root()).unwrap();
        let rmap = ReticulationLeafMap::build(&net);
        let mul = pyramid_to_multree(&p, &net, &rmap).unwrap();
        let t = parse_tree("((a,b),c);").unwrap();
        let idx = LcaIndex::build(mul.as_net()).unwrap();
        let dp = run_dp(&mul, &idx, &t, None);
        // The whole t is displayed by the mul-tree ((a,b),(b,c)).
        assert_eq!(dp.maxima, vec![t.root()]);
        for anchor in ["a", "c"] {
            let c_leaf = t.leaf_by_label(&lbl(anchor)).unwrap();
            assert_eq!(select_anchored_maximum(&dp, &t, c_leaf), t.root());
        }
    }

    #[test]
    fn placement_collapses_tip_and_subtree() {
        // Tip {rho, c-leaf} with one cross arc; t_v is just the c leaf.
        let mut net = Network::new();
        let root = net.add_vertex();
        let u1 = net.add_vertex();
        let u2 = net.add_vertex();
        let hr = net.add_vertex();
        let rho = net.add_vertex();
        let hb = net.add_vertex();
        let l1 = net.add_leaf(lbl("l1"));
        let c = net.add_leaf(lbl("c"));
        let f = net.add_leaf(lbl("f"));
        net.add_arc(root, u1);
        net.add_arc(root, u2);
        net.add_arc(u1, l1);
        net.add_arc(u1, hr);
        net.add_arc(u2, hr);
        net.add_arc(u2, hb);
        net.add_arc(hr, rho);
        net.add_arc(rho, c);
        net.add_arc(rho, hb);
        net.add_arc(hb, f);
        net.set_root(root);
        assert!(net.validate().is_valid(), "{}", net.validate());

        let queries = ["((l1,c),f);", "((l1,f),c);", "(l1,(c,f));"];
        let before: Vec<bool> = queries
            .iter()
            .map(|s| oracle_displays(&net, &parse_tree(s).unwrap()).unwrap())
            .collect();

        let mut t = parse_tree("((l1,c),f);").unwrap();
        let p = pop_pyramid(&net, rho).unwrap();
        let v = t.leaf_by_label(&lbl("c")).unwrap();
        let fresh = Label::internal(0);
        let mut log = Vec::new();
        apply_pyramid_placement(&mut net, &mut t, &p, v, fresh.clone(), &mut log);

        assert!(net.validate().is_valid(), "{}", net.validate());
        assert!(t.as_net().validate().is_valid());
        assert_eq!(net.vertices_with_label(&fresh).len(), 1);
        assert_eq!(t.vertices_with_label(&fresh).len(), 1);
        // rho became the fresh leaf and the base reticulation was suppressed
        // into the arc u2 -> f.
        assert!(net.is_leaf(rho));
        assert!(!net.is_alive(hb));
        assert_eq!(net.parents(f), &[u2]);

        // Display relation unchanged: query trees with c renamed to the
        // fresh label must get the same verdicts as before.
        let after: Vec<bool> = queries
            .iter()
            .map(|s| {
                let mut qt = parse_tree(s).unwrap();
                let cl = qt.leaf_by_label(&lbl("c")).unwrap();
                qt.net_mut().set_label(cl, fresh.clone());
                oracle_displays(&net, &qt).unwrap()
            })
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn placement_deletes_reticulation_chains_to_removed_leaves() {
        let (mut net, rho) = leafless_tip_net();
        let mut t = parse_tree("((l1,l2),(f1,f2));").unwrap();
        let p = pop_pyramid(&net, rho).unwrap();
        let rmap = ReticulationLeafMap::build(&net);
        let mul = pyramid_to_multree(&p, &net, &rmap).unwrap();
        let idx = LcaIndex::build(mul.as_net()).unwrap();
        let dp = run_dp(&mul, &idx, &t, None);
        let c_leaf = t.leaf_by_label(&lbl("f1")).unwrap();
        let v = select_anchored_maximum(&dp, &t, c_leaf);
        // (f1, f2) is displayed by the pyramid; its parent in t is the max.
        assert_eq!(v, t.parents(c_leaf)[0]);

        let mut log = Vec::new();
        apply_pyramid_placement(&mut net, &mut t, &p, v, Label::internal(7), &mut log);
        assert!(net.validate().is_valid(), "{}", net.validate());
        // f2's outside reticulation path (through u3) is gone with it.
        assert!(net.leaf_by_label(&lbl("f2")).is_none());
        assert_eq!(
            net.reticulation_count(),
            1,
            "only the one above rho remains"
        );
    }
}
