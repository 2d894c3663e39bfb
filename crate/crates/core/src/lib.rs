//! Tree containment in rooted binary phylogenetic networks.
//!
//! The central question answered by this crate: does a network `N` display a
//! tree `T`, i.e. does `N` contain a subdivision of `T` that respects the
//! leaf labels?  The fast path decomposes the network into tree components,
//! pops one "pyramid" (the subnetwork under a lowest component root) at a
//! time, turns its tip into a multi-labeled tree and runs a dynamic program
//! over candidate embedding roots.  On reticulation-visible and nearly
//! stable networks this runs in linear time.
//!
//! Besides the engine itself ([`engine::contains`]) the crate ships
//!
//! * a Newick / extended-Newick parser and serializer ([`newick`]),
//! * an exponential-time oracle used as ground truth in tests ([`oracle`]),
//! * seeded random instance generators ([`generate`]),
//! * constant-time LCA/ancestor queries on trees ([`lca`]).

pub mod decompose;
pub mod engine;
pub mod generate;
pub mod iso;
pub mod lca;
pub mod mul;
pub mod network;
pub mod newick;
pub mod oracle;
pub mod reduce;
pub mod stability;

pub use engine::{contains, EngineError, EngineOptions, Outcome, RunTrace, Verdict};
pub use network::{Label, MulTree, Network, Tree, ValidationReport, VertexId};
pub use stability::{classify, max_reticulation_path, NetworkClass};
