//! `nettc` — tree containment in rooted binary phylogenetic networks.
//!
//! Exit codes of `check` are a stable contract: 0 = displayed, 1 = not
//! displayed, 2 = parse/validation error or unsupported network class.

use std::io::Read;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use nettc_core::engine::{contains, EngineOptions, Verdict};
use nettc_core::generate::{gen_displayed_tree, gen_network, gen_perturbed_tree, ClassTarget};
use nettc_core::newick::{parse_network, parse_tree, serialize_network};
use nettc_core::oracle::oracle_displays_bounded;
use nettc_core::stability::{classify, first_precondition_violation, max_reticulation_path};
use nettc_core::{Network, Tree};

#[derive(Parser)]
#[command(
    name = "nettc",
    version,
    about = "Does a phylogenetic network display a tree?"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Any,
    Rv,
    Ns,
    Theorem2,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeMode {
    Displayed,
    Perturbed,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a network displays a tree.
    Check {
        /// Extended-Newick network file, or - for stdin.
        network: String,
        /// Newick tree file, or - for stdin.
        tree: String,
        /// Refuse unsupported networks up front instead of lazily.
        #[arg(long)]
        strict: bool,
        /// Print the reduction trace.
        #[arg(long)]
        trace: bool,
        /// Cross-check the verdict with the exhaustive oracle
        /// (refused above 16 reticulations).
        #[arg(long)]
        oracle: bool,
        /// Shuffle internal processing orders with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the class of a network.
    Classify {
        /// Extended-Newick network file, or - for stdin.
        network: String,
    },
    /// Generate a network/tree instance pair.
    Gen {
        #[arg(long)]
        leaves: usize,
        #[arg(long, default_value_t = 0)]
        rets: usize,
        #[arg(long, value_enum, default_value_t = ClassArg::Any)]
        class: ClassArg,
        /// Reticulation chain length for --class theorem2.
        #[arg(long, default_value_t = 3)]
        chain: usize,
        #[arg(long)]
        seed: u64,
        /// Tree to emit alongside the network.
        #[arg(long, value_enum, default_value_t = TreeMode::Displayed)]
        tree: TreeMode,
        #[arg(long, default_value = "network.nwk")]
        out_net: String,
        #[arg(long, default_value = "tree.nwk")]
        out_tree: String,
    },
    /// Time the engine over a size ladder and print CSV.
    Bench {
        /// Comma-separated network sizes (vertex counts).
        #[arg(long, default_value = "4096,8192,16384,32768,65536")]
        sizes: String,
        #[arg(long, value_enum, default_value_t = ClassArg::Rv)]
        class: ClassArg,
        /// Reticulation chain length for --class theorem2.
        #[arg(long, default_value_t = 3)]
        chain: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn load_network(path: &str) -> Result<Network> {
    let text = read_input(path)?;
    parse_network(&text).with_context(|| format!("parsing network from {path}"))
}

fn load_tree(path: &str) -> Result<Tree> {
    let text = read_input(path)?;
    parse_tree(&text).with_context(|| format!("parsing tree from {path}"))
}

fn class_target(class: ClassArg, chain: usize) -> ClassTarget {
    match class {
        ClassArg::Any => ClassTarget::Any,
        ClassArg::Rv => ClassTarget::ReticulationVisible,
        ClassArg::Ns => ClassTarget::NearlyStable,
        ClassArg::Theorem2 => ClassTarget::Theorem2 { chain },
    }
}

fn cmd_check(
    network: &str,
    tree: &str,
    strict: bool,
    trace: bool,
    oracle: bool,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let net = load_network(network)?;
    let t = load_tree(tree)?;
    let opts = EngineOptions {
        strict,
        collect_events: trace,
        shuffle_seed: seed,
        ..Default::default()
    };
    let out = contains(&net, &t, &opts)?;
    if trace {
        for ev in &out.trace.events {
            eprintln!("{ev}");
        }
        eprintln!(
            "pyramids: {}  cherries: {}  tip budget: {}/{}",
            out.trace.pyramids_processed,
            out.trace.cherries_reduced,
            out.trace.sum_tip,
            out.trace.initial_size
        );
        eprintln!(
            "phases: validate {:?}, cherries {:?}, decompose {:?}, pyramids {:?}",
            out.trace.phases.validate,
            out.trace.phases.cherries,
            out.trace.phases.decompose,
            out.trace.phases.pyramids
        );
    }
    if oracle && out.verdict != Verdict::Unsupported {
        let want = oracle_displays_bounded(&net, &t, 16).context("oracle cross-check refused")?;
        if (out.verdict == Verdict::Yes) != want {
            bail!(
                "oracle disagrees: engine says {}, oracle says {}",
                out.verdict,
                want
            );
        }
        eprintln!("oracle agrees");
    }
    match out.verdict {
        Verdict::Yes => {
            println!("YES");
            Ok(ExitCode::from(0))
        }
        Verdict::No => {
            println!("NO");
            Ok(ExitCode::from(1))
        }
        Verdict::Unsupported => {
            println!(
                "UNSUPPORTED{}",
                out.trace
                    .unsupported_reason
                    .map(|r| format!(" ({r})"))
                    .unwrap_or_default()
            );
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_classify(network: &str) -> Result<ExitCode> {
    let net = load_network(network)?;
    let class = classify(&net);
    let detail = match class {
        nettc_core::NetworkClass::Unsupported => first_precondition_violation(&net)
            .map(|v| format!(" (unstable tree vertex {v} under a reticulation)"))
            .unwrap_or_default(),
        _ => String::new(),
    };
    println!(
        "{class}{detail}  reticulations={}  max-reticulation-path={}",
        net.reticulation_count(),
        max_reticulation_path(&net)
    );
    Ok(ExitCode::from(0))
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    leaves: usize,
    rets: usize,
    class: ClassArg,
    chain: usize,
    seed: u64,
    tree_mode: TreeMode,
    out_net: &str,
    out_tree: &str,
) -> Result<ExitCode> {
    let net = gen_network(seed, leaves, rets, class_target(class, chain))?;
    let t = match tree_mode {
        TreeMode::Displayed => gen_displayed_tree(seed ^ 0x9e3779b97f4a7c15, &net),
        TreeMode::Perturbed => {
            let planted = gen_displayed_tree(seed ^ 0x9e3779b97f4a7c15, &net);
            gen_perturbed_tree(seed ^ 0x517cc1b727220a95, &planted)?
        }
    };
    std::fs::write(out_net, serialize_network(&net) + "\n")
        .with_context(|| format!("writing {out_net}"))?;
    std::fs::write(out_tree, serialize_network(t.as_net()) + "\n")
        .with_context(|| format!("writing {out_tree}"))?;
    eprintln!(
        "wrote {out_net} ({} vertices, {} reticulations) and {out_tree}",
        net.vertex_count(),
        net.reticulation_count()
    );
    Ok(ExitCode::from(0))
}

fn cmd_bench(
    sizes: &str,
    class: ClassArg,
    chain: usize,
    reps: usize,
    seed: u64,
) -> Result<ExitCode> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>().context("bad size"))
        .collect::<Result<_>>()?;
    println!("# nettc bench csv v1");
    println!("n,k,class,median_ns,ns_per_vertex");
    let target = class_target(class, chain);
    let class_name = match class {
        ClassArg::Any => "any",
        ClassArg::Rv => "rv",
        ClassArg::Ns => "ns",
        ClassArg::Theorem2 => "theorem2",
    };
    for (i, &size) in sizes.iter().enumerate() {
        let g = (size / 16).max(1);
        let base = (size / 2).saturating_sub(2 * g).max(2);
        let net = gen_network(seed + i as u64, base + g, g, target)?;
        let t = gen_displayed_tree(seed + 1000 + i as u64, &net);
        let n = net.vertex_count();
        let k = max_reticulation_path(&net);
        let mut times: Vec<u128> = Vec::with_capacity(reps);
        for _ in 0..reps.max(1) {
            let t0 = Instant::now();
            let out = contains(&net, &t, &EngineOptions::default())?;
            times.push(t0.elapsed().as_nanos());
            if out.verdict != Verdict::Yes {
                bail!("planted tree not displayed at size {size}");
            }
        }
        times.sort();
        let median = times[times.len() / 2];
        println!(
            "{n},{k},{class_name},{median},{:.2}",
            median as f64 / n as f64
        );
    }
    Ok(ExitCode::from(0))
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check {
            network,
            tree,
            strict,
            trace,
            oracle,
            seed,
        } => cmd_check(&network, &tree, strict, trace, oracle, seed),
        Command::Classify { network } => cmd_classify(&network),
        Command::Gen {
            leaves,
            rets,
            class,
            chain,
            seed,
            tree,
            out_net,
            out_tree,
        } => cmd_gen(leaves, rets, class, chain, seed, tree, &out_net, &out_tree),
        Command::Bench {
            sizes,
            class,
            chain,
            reps,
            seed,
        } => cmd_bench(&sizes, class, chain, reps, seed),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
