//! Randomized property tests: every fast-path answer is checked against the
//! exhaustive oracle on instances small enough to enumerate.

use nettc_core::engine::{contains, EngineOptions, Verdict};
use nettc_core::generate::{gen_displayed_tree, gen_network, gen_perturbed_tree, ClassTarget};
use nettc_core::iso::networks_isomorphic;
use nettc_core::newick::{parse_network, serialize_network};
use nettc_core::oracle::oracle_displays;
use nettc_core::stability::engine_precondition_holds;
use nettc_core::{Network, Tree};

fn instance(seed: u64) -> Option<(Network, Tree)> {
    let n_leaves = 4 + (seed % 9) as usize;
    let n_retics = (seed % 5) as usize;
    let target = match seed % 3 {
        0 => ClassTarget::ReticulationVisible,
        1 => ClassTarget::NearlyStable,
        _ => ClassTarget::Theorem2 { chain: 3 },
    };
    let net = gen_network(seed, n_leaves, n_retics, target).ok()?;
    let t = if seed.is_multiple_of(2) {
        gen_displayed_tree(seed.wrapping_mul(31), &net)
    } else {
        let planted = gen_displayed_tree(seed.wrapping_mul(31), &net);
        gen_perturbed_tree(seed.wrapping_mul(17), &planted).ok()?
    };
    Some((net, t))
}

#[test]
fn engine_matches_oracle_on_random_instances() {
    let mut checked = 0;
    let mut yes = 0;
    for seed in 0..400u64 {
        let Some((net, t)) = instance(seed) else {
            continue;
        };
        let out = contains(&net, &t, &EngineOptions::default()).unwrap();
        assert_ne!(
            out.verdict,
            Verdict::Unsupported,
            "generated classes satisfy the precondition (seed {seed})"
        );
        let want = oracle_displays(&net, &t).unwrap();
        assert_eq!(out.verdict == Verdict::Yes, want, "seed {seed}");
        assert!(out.trace.sum_tip <= out.trace.initial_size, "seed {seed}");
        checked += 1;
        if want {
            yes += 1;
        }
    }
    assert!(checked >= 350, "only {checked} instances were generated");
    assert!(yes >= 100, "verdict mix is degenerate: {yes}/{checked} yes");
    assert!(
        checked - yes >= 50,
        "verdict mix is degenerate: {yes}/{checked} yes"
    );
}

#[test]
fn verdicts_are_order_independent() {
    for seed in 0..60u64 {
        let Some((net, t)) = instance(seed) else {
            continue;
        };
        let base = contains(&net, &t, &EngineOptions::default())
            .unwrap()
            .verdict;
        for shuffle in [1u64, 2, 3] {
            let opts = EngineOptions {
                shuffle_seed: Some(seed.wrapping_mul(1000) + shuffle),
                ..Default::default()
            };
            let got = contains(&net, &t, &opts).unwrap().verdict;
            assert_eq!(got, base, "seed {seed} shuffle {shuffle}");
        }
    }
}

#[test]
fn strict_mode_agrees_on_supported_classes() {
    for seed in 0..60u64 {
        let Some((net, t)) = instance(seed) else {
            continue;
        };
        assert!(engine_precondition_holds(&net));
        let lazy = contains(&net, &t, &EngineOptions::default())
            .unwrap()
            .verdict;
        let strict = contains(
            &net,
            &t,
            &EngineOptions {
                strict: true,
                ..Default::default()
            },
        )
        .unwrap()
        .verdict;
        assert_eq!(lazy, strict, "seed {seed}");
    }
}

#[test]
fn serialization_round_trips_up_to_isomorphism() {
    for seed in 0..150u64 {
        let n_leaves = 3 + (seed % 40) as usize;
        let n_retics = (seed % 7) as usize;
        let Ok(net) = gen_network(seed, n_leaves, n_retics, ClassTarget::Any) else {
            continue;
        };
        let text = serialize_network(&net);
        let again = parse_network(&text).unwrap();
        assert!(networks_isomorphic(&net, &again), "seed {seed}: {text}");
        // And the round trip is a fixpoint on the text form.
        assert_eq!(text, serialize_network(&again), "seed {seed}");
    }
}
