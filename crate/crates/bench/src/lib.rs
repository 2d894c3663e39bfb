//! Shared fixtures for the criterion benches.

use nettc_core::generate::{gen_displayed_tree, gen_network, ClassTarget};
use nettc_core::{Network, Tree};

/// Reticulation-visible instance with roughly `size` vertices and a planted
/// displayed tree.
pub fn rv_instance(seed: u64, size: usize) -> (Network, Tree) {
    let g = (size / 16).max(1);
    let base = (size / 2).saturating_sub(2 * g).max(2);
    let net =
        gen_network(seed, base + g, g, ClassTarget::ReticulationVisible).expect("bench instance");
    let t = gen_displayed_tree(seed ^ 0xfeed, &net);
    (net, t)
}
