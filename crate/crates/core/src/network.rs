//! The mutable network/tree representation all other modules operate on.
//!
//! A [`Network`] is a rooted binary DAG with labeled sinks.  Vertices of
//! indegree at least two are reticulations, everything else is a tree vertex,
//! and no leaf may be a reticulation.  Vertex handles are never reused: a
//! deleted [`VertexId`] stays invalid for the lifetime of the structure.
//!
//! The reduction rules edit one `Network` in place.  Every structural edit
//! that removes a vertex is reported through [`EditEvent`] so that the
//! incremental structures of the decomposition layer (component DAG,
//! reticulation-leaf map) can be kept in sync.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Stable handle of a vertex. Never reused while the owning network is alive.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub(crate) u32);

impl VertexId {
    #[inline]
    pub(crate) fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A leaf label.
///
/// `Taxon` labels come from parsed or generated input; `Internal` labels are
/// created by the pyramid placement rule and live in a namespace that cannot
/// collide with any taxon string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Taxon(Arc<str>),
    Internal(u64),
}

impl Label {
    pub fn taxon(s: &str) -> Self {
        Label::Taxon(Arc::from(s))
    }

    pub fn internal(n: u64) -> Self {
        Label::Internal(n)
    }

    pub fn as_taxon(&self) -> Option<&str> {
        match self {
            Label::Taxon(s) => Some(s),
            Label::Internal(_) => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Taxon(s) => f.write_str(s),
            // '$' is not a legal taxon character, so this form can never be
            // confused with (or parsed back as) a user label.
            Label::Internal(n) => write!(f, "$L{}", n),
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

/// Errors from model-level operations.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("vertex {0} is stale (deleted or never allocated)")]
    StaleVertex(VertexId),
    #[error("operation requires a tree but the structure has reticulations")]
    NotATree,
    #[error("vertex {0} is not suppressible: indegree {1}, outdegree {2}")]
    NotDegreeTwo(VertexId, usize, usize),
    #[error("some label occurs more than once")]
    MultiLabeled,
    #[error("structure is invalid: {0}")]
    Invalid(ValidationReport),
}

/// One invariant violation found by [`Network::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MultipleSources(Vec<VertexId>),
    Cycle,
    DegreeViolation(VertexId),
    UnlabeledSink(VertexId),
    LabeledInternal(VertexId),
    ReticulationLeaf(VertexId),
    Unrooted,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultipleSources(vs) => write!(f, "multiple sources: {:?}", vs),
            Violation::Cycle => write!(f, "cycle"),
            Violation::DegreeViolation(v) => write!(f, "degree violation at {}", v),
            Violation::UnlabeledSink(v) => write!(f, "unlabeled sink {}", v),
            Violation::LabeledInternal(v) => write!(f, "labeled internal vertex {}", v),
            Violation::ReticulationLeaf(v) => write!(f, "reticulation leaf {}", v),
            Violation::Unrooted => write!(f, "no root set"),
        }
    }
}

/// Result of [`Network::validate`]; empty means valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// True if some violation message contains `needle`.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.to_string().contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Structural edit notification, consumed by the decomposition layer.
///
/// The boolean context is captured at the moment the edit happens because the
/// surrounding cleanup batch may change the picture again before the events
/// are drained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditEvent {
    /// `v` was removed outright (unreachable debris or an unlabeled sink).
    Deleted { v: VertexId },
    /// `v` had indegree 1 and outdegree 1 and was replaced by the arc
    /// `parent -> child` (or by nothing, if that arc already existed).
    Suppressed {
        v: VertexId,
        parent: VertexId,
        child: VertexId,
        parent_is_retic: bool,
        child_is_leaf: bool,
        child_is_retic: bool,
    },
    /// The root had a single child and was dropped; `new_root` took over.
    RootReplaced { old: VertexId, new_root: VertexId },
}

/// Rooted binary DAG with labeled sinks.
#[derive(Clone, Default)]
pub struct Network {
    children: Vec<Vec<VertexId>>,
    parents: Vec<Vec<VertexId>>,
    alive: Vec<bool>,
    labels: Vec<Option<Label>>,
    label_index: HashMap<Label, Vec<VertexId>>,
    root: Option<VertexId>,
    n_alive: usize,
}

impl Network {
    pub fn new() -> Self {
        Network::default()
    }

    /// Number of live vertices.
    pub fn vertex_count(&self) -> usize {
        self.n_alive
    }

    /// Number of vertex slots ever allocated (live ids are a subset).
    pub fn slot_count(&self) -> usize {
        self.alive.len()
    }

    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId(self.alive.len() as u32);
        self.children.push(Vec::new());
        self.parents.push(Vec::new());
        self.alive.push(true);
        self.labels.push(None);
        self.n_alive += 1;
        id
    }

    pub fn add_leaf(&mut self, label: Label) -> VertexId {
        let v = self.add_vertex();
        self.set_label(v, label);
        v
    }

    pub fn set_root(&mut self, v: VertexId) {
        debug_assert!(self.is_alive(v));
        self.root = Some(v);
    }

    pub fn root(&self) -> VertexId {
        self.root.expect("network has no root")
    }

    pub fn try_root(&self) -> Option<VertexId> {
        self.root
    }

    #[inline]
    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive.get(v.idx()).copied().unwrap_or(false)
    }

    fn check_alive(&self, v: VertexId) -> Result<(), ModelError> {
        if self.is_alive(v) {
            Ok(())
        } else {
            Err(ModelError::StaleVertex(v))
        }
    }

    #[inline]
    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.idx()]
    }

    #[inline]
    pub fn parents(&self, v: VertexId) -> &[VertexId] {
        &self.parents[v.idx()]
    }

    #[inline]
    pub fn indegree(&self, v: VertexId) -> usize {
        self.parents[v.idx()].len()
    }

    #[inline]
    pub fn outdegree(&self, v: VertexId) -> usize {
        self.children[v.idx()].len()
    }

    #[inline]
    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.is_alive(v) && self.children[v.idx()].is_empty()
    }

    #[inline]
    pub fn is_reticulation(&self, v: VertexId) -> bool {
        self.is_alive(v) && self.parents[v.idx()].len() >= 2
    }

    pub fn add_arc(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(self.is_alive(u) && self.is_alive(v));
        self.children[u.idx()].push(v);
        self.parents[v.idx()].push(u);
    }

    /// Removes one occurrence of the arc `u -> v`.
    pub fn remove_arc(&mut self, u: VertexId, v: VertexId) {
        let cs = &mut self.children[u.idx()];
        if let Some(i) = cs.iter().position(|&c| c == v) {
            cs.remove(i);
        }
        let ps = &mut self.parents[v.idx()];
        if let Some(i) = ps.iter().position(|&p| p == u) {
            ps.remove(i);
        }
    }

    pub fn label(&self, v: VertexId) -> Option<&Label> {
        self.labels[v.idx()].as_ref()
    }

    pub fn set_label(&mut self, v: VertexId, label: Label) {
        debug_assert!(self.is_alive(v));
        self.clear_label(v);
        self.label_index.entry(label.clone()).or_default().push(v);
        self.labels[v.idx()] = Some(label);
    }

    pub fn clear_label(&mut self, v: VertexId) -> Option<Label> {
        let old = self.labels[v.idx()].take();
        if let Some(l) = &old {
            if let Some(entry) = self.label_index.get_mut(l) {
                if let Some(i) = entry.iter().position(|&x| x == v) {
                    entry.remove(i);
                }
                if entry.is_empty() {
                    self.label_index.remove(l);
                }
            }
        }
        old
    }

    /// All live vertices carrying `label`.
    pub fn vertices_with_label(&self, label: &Label) -> &[VertexId] {
        self.label_index
            .get(label)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// The unique leaf with `label` in a 1-labeled structure.
    pub fn leaf_by_label(&self, label: &Label) -> Option<VertexId> {
        self.vertices_with_label(label).first().copied()
    }

    /// Iterator over the distinct labels in use.
    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.label_index.keys()
    }

    pub fn label_count(&self) -> usize {
        self.label_index.len()
    }

    /// Largest number of leaves sharing one label (the `k` of a k-labeled tree).
    pub fn max_label_multiplicity(&self) -> usize {
        self.label_index
            .values()
            .map(|v| v.len())
            .max()
            .unwrap_or(0)
    }

    /// Live vertex ids in allocation order.
    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.alive.len() as u32)
            .map(VertexId)
            .filter(move |v| self.is_alive(*v))
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(move |&v| self.is_leaf(v))
    }

    pub fn reticulations(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(move |&v| self.is_reticulation(v))
    }

    pub fn reticulation_count(&self) -> usize {
        self.reticulations().count()
    }

    /// Removes a vertex with no remaining arcs.
    pub(crate) fn delete_detached(&mut self, v: VertexId) {
        debug_assert!(self.is_alive(v));
        debug_assert!(self.children[v.idx()].is_empty() && self.parents[v.idx()].is_empty());
        self.clear_label(v);
        self.alive[v.idx()] = false;
        self.n_alive -= 1;
        if self.root == Some(v) {
            self.root = None;
        }
    }

    /// Live vertices in topological order (parents before children).
    /// Returns `None` if a cycle is reachable.
    pub fn topo_order(&self) -> Option<Vec<VertexId>> {
        let mut indeg: Vec<usize> = vec![0; self.alive.len()];
        let mut order = Vec::with_capacity(self.n_alive);
        let mut queue = Vec::new();
        for v in self.vertex_ids() {
            indeg[v.idx()] = self.indegree(v);
            if indeg[v.idx()] == 0 {
                queue.push(v);
            }
        }
        while let Some(v) = queue.pop() {
            order.push(v);
            for &c in self.children(v) {
                indeg[c.idx()] -= 1;
                if indeg[c.idx()] == 0 {
                    queue.push(c);
                }
            }
        }
        if order.len() == self.n_alive {
            Some(order)
        } else {
            None
        }
    }

    /// Checks every model invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let root = match self.root {
            Some(r) if self.is_alive(r) => r,
            _ => {
                report.violations.push(Violation::Unrooted);
                return report;
            }
        };

        let sources: Vec<VertexId> = self
            .vertex_ids()
            .filter(|&v| self.indegree(v) == 0)
            .collect();
        if sources.len() != 1 || sources[0] != root {
            report.violations.push(Violation::MultipleSources(sources));
        }

        if self.topo_order().is_none() {
            report.violations.push(Violation::Cycle);
            return report;
        }

        for v in self.vertex_ids() {
            let ind = self.indegree(v);
            let outd = self.outdegree(v);
            if outd == 0 {
                if ind >= 2 {
                    report.violations.push(Violation::ReticulationLeaf(v));
                } else if v != root && ind != 1 {
                    report.violations.push(Violation::DegreeViolation(v));
                }
                if self.label(v).is_none() {
                    report.violations.push(Violation::UnlabeledSink(v));
                }
            } else {
                if self.label(v).is_some() {
                    report.violations.push(Violation::LabeledInternal(v));
                }
                if v == root {
                    if ind != 0 || outd != 2 {
                        report.violations.push(Violation::DegreeViolation(v));
                    }
                } else if ind + outd != 3 {
                    report.violations.push(Violation::DegreeViolation(v));
                }
            }
        }

        // Reachability: every live vertex must hang under the root.
        let mut seen = vec![false; self.alive.len()];
        let mut stack = vec![root];
        seen[root.idx()] = true;
        let mut count = 0usize;
        while let Some(v) = stack.pop() {
            count += 1;
            for &c in self.children(v) {
                if !seen[c.idx()] {
                    seen[c.idx()] = true;
                    stack.push(c);
                }
            }
        }
        if count != self.n_alive
            && !report
                .violations
                .iter()
                .any(|x| matches!(x, Violation::MultipleSources(_)))
        {
            let extra: Vec<VertexId> = self.vertex_ids().filter(|v| !seen[v.idx()]).collect();
            report.violations.push(Violation::MultipleSources(extra));
        }

        report
    }

    /// True iff `u <= v`, i.e. `v` is an ancestor of `u` (or `u` itself).
    ///
    /// Only defined on trees, where the walk along parent arcs is unique.
    /// Constant-time ancestor queries on a frozen tree live in
    /// [`crate::lca::LcaIndex`]; this walk exists for callers without an index.
    pub fn is_ancestor(&self, u: VertexId, v: VertexId) -> Result<bool, ModelError> {
        self.check_alive(u)?;
        self.check_alive(v)?;
        let mut cur = u;
        loop {
            if cur == v {
                return Ok(true);
            }
            match self.parents(cur) {
                [] => return Ok(false),
                [p] => cur = *p,
                _ => return Err(ModelError::NotATree),
            }
        }
    }

    /// Removes a degree-(1,1) vertex, joining its parent to its child, and
    /// cleans up any fallout (parallel arcs, newly degree-deficient vertices).
    pub fn suppress_degree_two(&mut self, v: VertexId) -> Result<(), ModelError> {
        self.check_alive(v)?;
        if self.indegree(v) != 1 || self.outdegree(v) != 1 {
            return Err(ModelError::NotDegreeTwo(
                v,
                self.indegree(v),
                self.outdegree(v),
            ));
        }
        let mut log = Vec::new();
        self.cleanup(vec![v], &mut log);
        Ok(())
    }

    /// Restores the degree invariants around the seed vertices.
    ///
    /// Iterates to a fixpoint: unreachable vertices and unlabeled sinks are
    /// deleted, degree-(1,1) vertices are suppressed, parallel arcs are
    /// collapsed (which may make further vertices degree-deficient).  Every
    /// removal is appended to `log`.
    pub fn cleanup(&mut self, seeds: Vec<VertexId>, log: &mut Vec<EditEvent>) {
        let mut queue: std::collections::VecDeque<VertexId> = seeds.into();
        while let Some(v) = queue.pop_front() {
            if !self.is_alive(v) {
                continue;
            }
            let ind = self.indegree(v);
            let outd = self.outdegree(v);
            if Some(v) == self.root {
                if ind == 0 && outd == 1 && self.label(v).is_none() {
                    let c = self.children[v.idx()][0];
                    self.remove_arc(v, c);
                    self.delete_detached(v);
                    self.root = Some(c);
                    log.push(EditEvent::RootReplaced {
                        old: v,
                        new_root: c,
                    });
                    queue.push_back(c);
                }
                continue;
            }
            if ind == 0 {
                // Unreachable debris; may carry a label (a leaf cut off from
                // the root), in which case the label disappears with it.
                let cs: Vec<VertexId> = self.children[v.idx()].clone();
                for c in cs {
                    self.remove_arc(v, c);
                    queue.push_back(c);
                }
                self.delete_detached(v);
                log.push(EditEvent::Deleted { v });
            } else if outd == 0 && self.label(v).is_none() {
                let ps: Vec<VertexId> = self.parents[v.idx()].clone();
                for p in ps {
                    self.remove_arc(p, v);
                    queue.push_back(p);
                }
                self.delete_detached(v);
                log.push(EditEvent::Deleted { v });
            } else if ind == 1 && outd == 1 {
                let p = self.parents[v.idx()][0];
                let c = self.children[v.idx()][0];
                self.remove_arc(p, v);
                self.remove_arc(v, c);
                self.delete_detached(v);
                let parallel = self.children[p.idx()].contains(&c);
                if !parallel {
                    self.add_arc(p, c);
                }
                log.push(EditEvent::Suppressed {
                    v,
                    parent: p,
                    child: c,
                    parent_is_retic: self.is_reticulation(p),
                    child_is_leaf: self.is_leaf(c),
                    child_is_retic: self.is_reticulation(c),
                });
                if parallel {
                    // The duplicate arc is dropped, so both endpoints lost a
                    // degree and must be re-examined.
                    queue.push_back(p);
                    queue.push_back(c);
                }
            }
        }
    }

    /// Deletes a leaf (dropping its label) and cleans up around its parent.
    pub fn delete_leaf(&mut self, v: VertexId, log: &mut Vec<EditEvent>) {
        debug_assert!(self.is_leaf(v));
        let ps: Vec<VertexId> = self.parents[v.idx()].clone();
        for p in &ps {
            self.remove_arc(*p, v);
        }
        self.delete_detached(v);
        log.push(EditEvent::Deleted { v });
        self.cleanup(ps, log);
    }

    /// Copies the subnetwork rooted at `v` (vertices `<= v` plus the arcs
    /// among them) into a fresh network, then restores the degree invariants
    /// (reticulations that lose an outside parent become plain vertices and
    /// are suppressed).  Returns the copy and the old-to-new vertex map.
    pub fn extract_subnetwork(&self, v: VertexId) -> (Network, HashMap<VertexId, VertexId>) {
        let mut map: HashMap<VertexId, VertexId> = HashMap::new();
        let mut sub = Network::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if map.contains_key(&u) {
                continue;
            }
            let nu = sub.add_vertex();
            if let Some(l) = self.label(u) {
                sub.set_label(nu, l.clone());
            }
            map.insert(u, nu);
            for &c in self.children(u) {
                stack.push(c);
            }
        }
        for (&old, &new) in &map {
            for &c in self.children(old) {
                sub.add_arc(new, map[&c]);
            }
        }
        sub.set_root(map[&v]);
        let seeds: Vec<VertexId> = sub.vertex_ids().collect();
        let mut log = Vec::new();
        sub.cleanup(seeds, &mut log);
        (sub, map)
    }
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Network({} vertices, root {:?})",
            self.n_alive, self.root
        )?;
        for v in self.vertex_ids() {
            write!(f, "  {:?} -> {:?}", v, self.children(v))?;
            if let Some(l) = self.label(v) {
                write!(f, "  [{}]", l)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A network with no reticulations in which every label occurs exactly once.
#[derive(Clone, Debug)]
pub struct Tree(Network);

impl Tree {
    /// Validates the tree invariants on top of the network ones.
    pub fn try_new(net: Network) -> Result<Tree, ModelError> {
        let report = net.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        if net.reticulations().next().is_some() {
            return Err(ModelError::NotATree);
        }
        if net.max_label_multiplicity() > 1 {
            return Err(ModelError::MultiLabeled);
        }
        Ok(Tree(net))
    }

    pub fn as_net(&self) -> &Network {
        &self.0
    }

    pub(crate) fn net_mut(&mut self) -> &mut Network {
        &mut self.0
    }

    pub fn into_network(self) -> Network {
        self.0
    }
}

impl std::ops::Deref for Tree {
    type Target = Network;

    fn deref(&self) -> &Network {
        &self.0
    }
}

/// A tree in which a label may occur up to `k` times.
#[derive(Clone, Debug)]
pub struct MulTree {
    net: Network,
    k: usize,
}

impl MulTree {
    pub fn try_new(net: Network) -> Result<MulTree, ModelError> {
        if net.reticulations().next().is_some() {
            return Err(ModelError::NotATree);
        }
        let k = net.max_label_multiplicity();
        Ok(MulTree { net, k })
    }

    pub fn from_tree(tree: Tree) -> MulTree {
        let net = tree.into_network();
        let k = net.max_label_multiplicity();
        MulTree { net, k }
    }

    /// Maximum multiplicity of any label.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_net(&self) -> &Network {
        &self.net
    }
}

impl std::ops::Deref for MulTree {
    type Target = Network;

    fn deref(&self) -> &Network {
        &self.net
    }
}
