//! The main containment loop.
//!
//! Pipeline: reject trivially on a cherry mismatch, then repeatedly pop a
//! pyramid off the component DAG, turn its tip into a multi-labeled tree,
//! find the largest anchored subtree of `t` it displays, and collapse both
//! sides onto a fresh shared label.  The instance is accepted iff both
//! structures end up as single vertices carrying the same label.
//!
//! The loop runs in time linear in the network size (up to the LCA table's
//! log factor) when the longest reticulation path is bounded, which covers
//! reticulation-visible and nearly stable networks.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thiserror::Error;

use crate::decompose::{pop_pyramid, ComponentDag, DecomposeError, ReticulationLeafMap};
use crate::lca::LcaIndex;
use crate::mul;
use crate::network::{EditEvent, Label, MulTree, Network, Tree, ValidationReport, VertexId};
use crate::reduce::{
    apply_cherry_reductions, apply_cherry_reductions_seeded, apply_pyramid_placement,
    find_anchor_leaf, pyramid_to_multree, select_anchored_maximum, CherryOutcome,
};
use crate::stability;

pub use crate::stability::max_reticulation_path;

/// Answer of the containment engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    /// The network falls outside the supported class: some pyramid root has
    /// no stability witness.
    Unsupported,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Yes => write!(f, "YES"),
            Verdict::No => write!(f, "NO"),
            Verdict::Unsupported => write!(f, "UNSUPPORTED"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EngineOptions {
    /// Classify up front and refuse unsupported networks before reducing.
    /// The default is to proceed and fail lazily only if an unstable pyramid
    /// root is actually encountered.
    pub strict: bool,
    /// Record one trace event per reduction.
    pub collect_events: bool,
    /// Randomizes pyramid pop order and DP queue order; the verdict must not
    /// depend on it.
    pub shuffle_seed: Option<u64>,
    /// Cross-check the incremental component DAG against a from-scratch
    /// rebuild after every placement.  Expensive; meant for tests.
    pub validate_decomposition: bool,
}

/// One reduction step, for traces.
#[derive(Debug, Clone)]
pub enum TraceEvent {
    Cherry {
        kept: Label,
        deleted: Label,
    },
    Pyramid {
        rho: VertexId,
        tip: usize,
        base: usize,
        anchor: Label,
        chosen: VertexId,
    },
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceEvent::Cherry { kept, deleted } => {
                write!(f, "cherry: deleted {deleted}, kept {kept}")
            }
            TraceEvent::Pyramid {
                rho,
                tip,
                base,
                anchor,
                chosen,
            } => write!(
                f,
                "pyramid at {rho}: |tip|={tip} |base|={base} anchor={anchor} placed at {chosen}"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimes {
    pub validate: Duration,
    pub cherries: Duration,
    pub decompose: Duration,
    pub pyramids: Duration,
}

/// Observability record of one run.
#[derive(Debug, Default)]
pub struct RunTrace {
    pub events: Vec<TraceEvent>,
    /// Total tip size over all processed pyramids; never exceeds the initial
    /// network size.
    pub sum_tip: usize,
    pub initial_size: usize,
    pub pyramids_processed: usize,
    pub cherries_reduced: usize,
    pub phases: PhaseTimes,
    pub unsupported_reason: Option<String>,
}

#[derive(Debug)]
pub struct Outcome {
    pub verdict: Verdict,
    pub trace: RunTrace,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),
    #[error("network and tree must carry the same label set")]
    LabelMismatch,
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<DecomposeError> for EngineError {
    fn from(e: DecomposeError) -> Self {
        EngineError::Internal(e.to_string())
    }
}

/// Decides whether `net` displays `t`.
///
/// Inputs are taken by reference and cloned internally; the originals stay
/// usable for cross-checks.
pub fn contains(net: &Network, t: &Tree, opts: &EngineOptions) -> Result<Outcome, EngineError> {
    let mut trace = RunTrace {
        initial_size: net.vertex_count(),
        ..Default::default()
    };
    let t_validate = Instant::now();

    let report = net.validate();
    if !report.is_valid() {
        return Err(EngineError::InvalidNetwork(report));
    }
    let mut net_labels: Vec<&Label> = net.labels().collect();
    let mut t_labels: Vec<&Label> = t.labels().collect();
    net_labels.sort();
    t_labels.sort();
    if net_labels != t_labels {
        return Err(EngineError::LabelMismatch);
    }

    if opts.strict && stability::classify(net) == stability::NetworkClass::Unsupported {
        let witness = stability::first_precondition_violation(net);
        trace.unsupported_reason = witness
            .map(|v| format!("tree vertex {v} under a reticulation is unstable"))
            .or_else(|| Some("precondition violated".into()));
        trace.phases.validate = t_validate.elapsed();
        return Ok(Outcome {
            verdict: Verdict::Unsupported,
            trace,
        });
    }
    trace.phases.validate = t_validate.elapsed();

    // A reticulation-free network is a 1-labeled tree: one DP run decides.
    if net.reticulation_count() == 0 {
        let mul =
            MulTree::try_new(net.clone()).map_err(|e| EngineError::Internal(e.to_string()))?;
        let verdict = if mul::displays(&mul, t) {
            Verdict::Yes
        } else {
            Verdict::No
        };
        return Ok(Outcome { verdict, trace });
    }

    let mut rng = opts.shuffle_seed.map(ChaCha8Rng::seed_from_u64);
    let mut n = net.clone();
    let mut tw = t.clone();
    let mut log: Vec<EditEvent> = Vec::new();
    let mut reduced: Vec<(Label, Label)> = Vec::new();

    let t_cherries = Instant::now();
    if apply_cherry_reductions(&mut n, &mut tw, &mut log, &mut reduced) == CherryOutcome::Rejected {
        trace.phases.cherries = t_cherries.elapsed();
        return Ok(Outcome {
            verdict: Verdict::No,
            trace,
        });
    }
    trace.cherries_reduced += reduced.len();
    if opts.collect_events {
        for (deleted, kept) in reduced.drain(..) {
            trace.events.push(TraceEvent::Cherry { kept, deleted });
        }
    }
    trace.phases.cherries = t_cherries.elapsed();

    if n.vertex_count() == 1 {
        return Ok(Outcome {
            verdict: accept(&n, &tw),
            trace,
        });
    }

    let t_build = Instant::now();
    let mut rmap = ReticulationLeafMap::build(&n);
    let mut q = ComponentDag::build(&n);
    trace.phases.decompose = t_build.elapsed();

    let t_pyramids = Instant::now();
    let mut fresh_counter: u64 = 0;
    loop {
        if let Some(r) = rng.as_mut() {
            q.shuffle_leaf_queue(r);
        }
        let rho = match q.pop_leaf(&n) {
            Some(rho) => rho,
            None => break,
        };
        debug_assert!(n.is_alive(rho));
        let pyramid = pop_pyramid(&n, rho)?;
        trace.sum_tip += pyramid.tip.len();
        trace.pyramids_processed += 1;
        debug_assert!(trace.sum_tip <= trace.initial_size);

        let anchor = match find_anchor_leaf(&pyramid, &n) {
            Some(a) => a,
            None => {
                trace.unsupported_reason =
                    Some(format!("pyramid root {rho} has no stability witness"));
                trace.phases.pyramids = t_pyramids.elapsed();
                return Ok(Outcome {
                    verdict: Verdict::Unsupported,
                    trace,
                });
            }
        };

        let mul_tree = pyramid_to_multree(&pyramid, &n, &rmap)?;
        let idx =
            LcaIndex::build(mul_tree.as_net()).map_err(|e| EngineError::Internal(e.to_string()))?;
        let dp = mul::run_dp(&mul_tree, &idx, &tw, rng.as_mut());

        let c_leaf = tw
            .leaf_by_label(&anchor)
            .ok_or_else(|| EngineError::Internal(format!("anchor {anchor} missing from t")))?;
        let chosen = select_anchored_maximum(&dp, &tw, c_leaf);
        if opts.collect_events {
            trace.events.push(TraceEvent::Pyramid {
                rho,
                tip: pyramid.tip.len(),
                base: pyramid.base.len(),
                anchor: anchor.clone(),
                chosen,
            });
        }

        let fresh = Label::internal(fresh_counter);
        fresh_counter += 1;
        log.clear();
        apply_pyramid_placement(&mut n, &mut tw, &pyramid, chosen, fresh, &mut log);
        q.retire(rho)?;
        for ev in &log {
            q.apply_event(&n, ev);
            rmap.apply_event(&n, ev);
        }
        rmap.update_from_leaf(&n, rho);

        // Collapses may have created new cherries around the placed label
        // and wherever suppression rerouted arcs onto leaves.
        let mut seeds: Vec<VertexId> = vec![rho];
        for ev in &log {
            match *ev {
                EditEvent::Suppressed {
                    child,
                    child_is_leaf: true,
                    ..
                } => seeds.push(child),
                EditEvent::RootReplaced { new_root, .. } => seeds.push(new_root),
                _ => {}
            }
        }
        log.clear();
        reduced.clear();
        if apply_cherry_reductions_seeded(&mut n, &mut tw, seeds, &mut log, &mut reduced)
            == CherryOutcome::Rejected
        {
            trace.phases.pyramids = t_pyramids.elapsed();
            return Ok(Outcome {
                verdict: Verdict::No,
                trace,
            });
        }
        trace.cherries_reduced += reduced.len();
        if opts.collect_events {
            for (deleted, kept) in reduced.drain(..) {
                trace.events.push(TraceEvent::Cherry { kept, deleted });
            }
        }
        for ev in &log {
            q.apply_event(&n, ev);
            rmap.apply_event(&n, ev);
        }
        log.clear();

        if opts.validate_decomposition && !q.consistent_with(&n) {
            return Err(EngineError::Internal(
                "incremental component DAG diverged from the network".into(),
            ));
        }
    }
    trace.phases.pyramids = t_pyramids.elapsed();

    Ok(Outcome {
        verdict: accept(&n, &tw),
        trace,
    })
}

/// Final test: both sides collapsed to single vertices with the same label.
fn accept(n: &Network, t: &Tree) -> Verdict {
    let single = n.vertex_count() == 1 && t.vertex_count() == 1;
    if single && n.label(n.root()) == t.label(t.root()) {
        Verdict::Yes
    } else {
        Verdict::No
    }
}
