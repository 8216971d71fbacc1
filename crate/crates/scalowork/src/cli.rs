//! The `scalowork` command line.
//!
//! Exit status: 0 on success, 1 when mining finds no admissible block, 2 on
//! usage, configuration or file errors, and for a rejected block the
//! rejection's own code (10 and up), after a `rejected <code> <reason>`
//! status line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use scalowork_core::chain::{genesis_digest, log_view, parse_log, ChainState};
use scalowork_core::clock::ManualClock;
use scalowork_core::crypto::{DirectVerifier, KeyPair};
use scalowork_core::graph::{generate_ba, generate_er, make_instance_pool, Graph};
use scalowork_core::mds::{compute_bound, coverage, greedy_distributed, Partition};
use scalowork_core::pool::{PartitionStrategy, PoolConfig, PoolSolver};
use scalowork_core::protocol::{
    generate_block, select_instance_index, GenerateOptions, InstanceStore, LocalEpoch, VerifyContext,
};
use scalowork_core::sim::storage_for;

use crate::bench::{lookup_csv, lookup_rows, results_csv, run_benchmark, timings_csv, BenchConfig, DEFAULT_MAX_EDGES};
use crate::config::{ConfigFile, Scenario};
use crate::io::{
    looks_gzipped, read_block, read_graph, render_graph, render_permutation, write_block, write_bytes, SolutionFile,
};
use crate::report::{rounds_csv, storage_csv};
use crate::scenario::run_scenario;
use crate::store::{parse_epochs, read_epochs, render_epochs, DirStore};
use crate::RayonExecutor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_BLOCK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "scalowork", version, about = "Dominating-set proof of useful work: tools and simulator")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Solver threads, one miner each.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (or directory for iso-pool); stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ba,
    Er,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Contiguous,
    Degree,
}

impl From<Split> for PartitionStrategy {
    fn from(s: Split) -> Self {
        match s {
            Split::Contiguous => PartitionStrategy::Contiguous,
            Split::Degree => PartitionStrategy::DegreeBalanced,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph.
    GenGraph {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Target average degree.
        #[arg(long, conflicts_with = "p")]
        degree: Option<f64>,
        /// Edge probability (er only).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        gzip: bool,
    },
    /// Write `z` relabeled copies of a graph and their permutations.
    IsoPool {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        z: u64,
        #[arg(long)]
        gzip: bool,
    },
    /// Find a dominating set with the distributed greedy solver.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        gzip: bool,
        #[arg(long, value_enum, default_value_t = Split::Contiguous)]
        partition: Split,
        /// Per-round statistics as CSV.
        #[arg(long)]
        rounds_csv: Option<PathBuf>,
    },
    /// Run one local epoch on a graph and write the resulting block.
    Mine {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        gzip: bool,
        /// Instance store directory; created if missing.
        #[arg(long)]
        store: PathBuf,
        /// Chain log to build on; defaults to the store's.
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Check a block against a store and chain log.
    Verify {
        #[arg(long)]
        block: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        chain: Option<PathBuf>,
        /// Arrival time; defaults to the block's timestamp.
        #[arg(long)]
        now_ms: Option<u64>,
        /// Size of the best block already accepted this epoch.
        #[arg(long)]
        past_size: Option<usize>,
    },
    /// Run a simulation scenario and write its metrics CSV.
    Simulate {
        /// honest, free-rider, selfish-mining, replay-attack, solution-theft
        /// or storage-accounting; overrides the config file.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        epochs: Option<u32>,
        #[arg(long)]
        pools: Option<usize>,
        /// Where to write the committed chain.
        #[arg(long)]
        chain_log: Option<PathBuf>,
    },
    /// Time generation and verification over a sweep of BA graphs.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 100_000])]
        nodes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [50usize])]
        degrees: Vec<usize>,
        /// Worker counts to sweep; defaults to --workers.
        #[arg(long, value_delimiter = ',')]
        worker_counts: Option<Vec<usize>>,
        #[arg(long, default_value_t = 900)]
        cutoff_secs: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_EDGES)]
        max_edges: u64,
        /// Measured times; stderr when omitted.
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Lookup table (n, m, tau_ms) built from the measurements.
        #[arg(long)]
        lookup: Option<PathBuf>,
    },
    /// Network-wide edge storage compared with per-pool full copies.
    StorageReport {
        #[arg(long)]
        pools: u64,
        #[arg(long, conflicts_with_all = ["n", "m", "delta"])]
        graph: Option<PathBuf>,
        #[arg(long)]
        gzip: bool,
        #[arg(long, requires_all = ["m", "delta"])]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        delta: Option<u32>,
    },
}

/// Failure carrying the process exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl ToString) -> Exit {
    Exit { code: EXIT_USAGE, message: message.to_string() }
}

type Outcome = Result<(), Exit>;

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            e.code
        }
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_bytes(path, bytes, false).map_err(usage),
        None => std::io::stdout().write_all(bytes).map_err(usage),
    }
}

fn load_graph(path: &Path, gzip: bool) -> Result<Graph, Exit> {
    read_graph(path, gzip || looks_gzipped(path)).map_err(usage)
}

fn load_config(cli: &Cli) -> Result<ConfigFile, Exit> {
    cli.config.as_deref().map_or_else(|| Ok(ConfigFile::default()), ConfigFile::load).map_err(usage)
}

fn executor(workers: usize) -> Result<RayonExecutor, Exit> {
    if workers == 0 {
        return Err(usage("--workers must be at least 1"));
    }
    RayonExecutor::new(workers).map_err(usage)
}

pub fn execute(cli: &Cli) -> Outcome {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::GenGraph { model, n, degree, p, gzip } => {
            let g = match model {
                Model::Ba => {
                    let d = degree.ok_or_else(|| usage("ba needs --degree"))?;
                    let attach = crate::config::graph_model("ba", *n, Some(d), None, None).map_err(usage)?;
                    let scalowork_core::sim::GraphModel::Ba { attach, .. } = attach else { unreachable!() };
                    generate_ba(*n, attach, cli.seed)
                }
                Model::Er => {
                    let p = match (p, degree) {
                        (Some(p), _) => *p,
                        (None, Some(d)) if *n >= 2 => (d / (*n - 1) as f64).min(1.0),
                        _ => return Err(usage("er needs --p or --degree")),
                    };
                    generate_er(*n, p, cli.seed)
                }
            }
            .map_err(usage)?;
            match (out, gzip) {
                (Some(path), _) => write_bytes(path, render_graph(&g).as_bytes(), *gzip).map_err(usage),
                (None, true) => Err(usage("--gzip needs --out")),
                (None, false) => emit(None, render_graph(&g).as_bytes()),
            }
        }
        Command::IsoPool { graph, z, gzip } => {
            let dir = out.ok_or_else(|| usage("iso-pool needs --out <directory>"))?;
            let g = load_graph(graph, *gzip)?;
            let pool = make_instance_pool(&g, *z as usize, cli.seed).map_err(usage)?;
            std::fs::create_dir_all(dir).map_err(usage)?;
            for (j, (h, perm)) in pool.iter().enumerate() {
                write_bytes(&dir.join(format!("{j}.graph")), render_graph(h).as_bytes(), false).map_err(usage)?;
                write_bytes(&dir.join(format!("{j}.perm")), render_permutation(perm).as_bytes(), false)
                    .map_err(usage)?;
            }
            Ok(())
        }
        Command::Solve { graph, gzip, partition, rounds_csv: rounds_path } => {
            let g = load_graph(graph, *gzip)?;
            let exec = executor(cli.workers)?;
            let part = match PartitionStrategy::from(*partition) {
                PartitionStrategy::Contiguous => Partition::contiguous(g.n(), cli.workers),
                PartitionStrategy::DegreeBalanced => Partition::degree_balanced(&g, cli.workers),
            };
            let run = greedy_distributed(&g, &part, &exec).map_err(usage)?;
            let dominating = coverage(&g, run.set.vertices()).dominating;
            let file = SolutionFile::new(&run.set, compute_bound(&g.properties()), dominating);
            if let Some(path) = rounds_path {
                write_bytes(path, rounds_csv(&run.stats).as_bytes(), false).map_err(usage)?;
            }
            if !file.within_bound {
                eprintln!("warning: solution of size {} exceeds the bound {:.6}", run.set.len(), file.bound);
            }
            emit(out, file.render().as_bytes())
        }
        Command::Mine { graph, gzip, store, chain } => mine(cli, graph, *gzip, store, chain.as_deref()),
        Command::Verify { block, store, chain, now_ms, past_size } => {
            verify(block, store, chain.as_deref(), *now_ms, *past_size)
        }
        Command::Simulate { scenario, epochs, pools, chain_log } => {
            let mut cfg = load_config(cli)?;
            if epochs.is_some() {
                cfg.epochs = *epochs;
            }
            if pools.is_some() {
                cfg.pools = *pools;
            }
            let scenario = match scenario {
                Some(name) => Scenario::parse(name).map_err(usage)?,
                None => cfg.scenario().map_err(usage)?.ok_or_else(|| usage("no scenario given"))?,
            };
            let result = run_scenario(scenario, &cfg, &cfg.seeds_or(cli.seed)).map_err(usage)?;
            if let Some(path) = chain_log {
                write_bytes(path, result.joined_chain_logs().as_bytes(), false).map_err(usage)?;
            }
            emit(out, result.csv.as_bytes())
        }
        Command::Bench { nodes, degrees, worker_counts, cutoff_secs, max_edges, timings, lookup } => {
            let cfg = BenchConfig {
                nodes: nodes.clone(),
                degrees: degrees.clone(),
                workers: worker_counts.clone().unwrap_or_else(|| vec![cli.workers]),
                cutoff_ms: cutoff_secs.saturating_mul(1000),
                seed: cli.seed,
                max_edges: *max_edges,
            };
            let rows = run_benchmark(&cfg).map_err(usage)?;
            match timings {
                Some(path) => write_bytes(path, timings_csv(&rows).as_bytes(), false).map_err(usage)?,
                None => eprint!("{}", timings_csv(&rows)),
            }
            if let Some(path) = lookup {
                let multiplier = load_config(cli)?.multiplier.unwrap_or(scalowork_core::scheduler::DEFAULT_MULTIPLIER);
                let table = scalowork_core::scheduler::LookupTable::new(lookup_rows(&rows), multiplier)
                    .map_err(usage)?;
                write_bytes(path, lookup_csv(&table).as_bytes(), false).map_err(usage)?;
            }
            emit(out, results_csv(&rows).as_bytes())
        }
        Command::StorageReport { pools, graph, gzip, n, m, delta } => {
            if *pools == 0 {
                return Err(usage("--pools must be at least 1"));
            }
            let (n, m, delta) = match (graph, n, m, delta) {
                (Some(path), ..) => {
                    let p = load_graph(path, *gzip)?.properties();
                    (p.n, p.m, p.delta_min)
                }
                (None, Some(n), Some(m), Some(d)) => (*n, *m, *d),
                _ => return Err(usage("storage-report needs --graph or --n, --m and --delta")),
            };
            emit(out, storage_csv(*pools, n, m, delta, &storage_for(*pools, n, m, delta)).as_bytes())
        }
    }
}

fn read_chain(path: &Path) -> Result<Vec<scalowork_core::chain::LogEntry>, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_log(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn mine(cli: &Cli, graph: &Path, gzip: bool, store_dir: &Path, chain: Option<&Path>) -> Outcome {
    let block_path = cli.out.as_deref().ok_or_else(|| usage("mine needs --out <block file>"))?;
    let cfg = load_config(cli)?;
    let g = load_graph(graph, gzip)?;
    let store = DirStore::open(store_dir).map_err(usage)?;
    let chain_path = chain.map_or_else(|| store.chain_path(), Path::to_path_buf);
    let (prev, prev_id) = if chain_path.exists() {
        let entries = read_chain(&chain_path)?;
        let tip = entries.last().ok_or_else(|| usage(format!("{}: empty chain log", chain_path.display())))?;
        (tip.digest, tip.instance_id)
    } else {
        let genesis = ChainState::default().render_log();
        write_bytes(&chain_path, genesis.as_bytes(), false).map_err(usage)?;
        (genesis_digest(), 0)
    };

    let params = cfg.epoch_params(prev, prev_id);
    let fx = LocalEpoch::build(&g, cli.seed, &params, None);
    let h = fx.descriptor.hash();
    for j in 0..params.z {
        let (inst, sig) = fx.store.fetch(&h, j).expect("every index is published");
        store.publish(&h, j, &inst, &sig).map_err(usage)?;
    }
    let mut epochs = match std::fs::read_to_string(store.epochs_path()) {
        Ok(text) => parse_epochs(&text, &store.epochs_path()).map_err(usage)?,
        Err(_) => Default::default(),
    };
    epochs.extend(fx.epochs.clone());
    write_bytes(&store.epochs_path(), render_epochs(&epochs).as_bytes(), false).map_err(usage)?;

    let manager = KeyPair::from_seed(format!("manager-{}", cli.seed).as_bytes());
    let exec = executor(cli.workers)?;
    let clock = ManualClock::new(params.start_ms);
    let mut solver = PoolSolver::new(PoolConfig::new(0, cli.workers, PartitionStrategy::Contiguous), &exec, &clock);
    let opts = GenerateOptions { tx_budget_bytes: 1 << 20, improve_until_ms: None };
    let ctx = fx.miner_context(manager.public(), cfg.epoch_puzzle_fee());
    match generate_block(&ctx, &[], &store, &mut solver, &clock, &DirectVerifier, &opts) {
        Ok(block) => {
            write_block(block_path, &block).map_err(usage)?;
            let hd = &block.header;
            println!(
                "mined {} instance {} index {} size {} bound {:.6}",
                block.hash().to_hex(),
                hd.instance_id,
                select_instance_index(&hd.merkle_root, &hd.prev_hash, hd.descriptor.z),
                hd.solution.len(),
                hd.bound
            );
            Ok(())
        }
        Err(e) => Err(Exit { code: EXIT_NO_BLOCK, message: format!("no block: {e}") }),
    }
}

fn verify(block: &Path, store_dir: &Path, chain: Option<&Path>, now: Option<u64>, past: Option<usize>) -> Outcome {
    if !store_dir.is_dir() {
        return Err(usage(format!("{}: not a store directory", store_dir.display())));
    }
    let block = read_block(block).map_err(usage)?;
    let store = DirStore::open(store_dir).map_err(usage)?;
    let epochs = read_epochs(&store.epochs_path()).map_err(usage)?;
    let chain_path = chain.map_or_else(|| store.chain_path(), Path::to_path_buf);
    let view = if chain_path.exists() {
        log_view(&read_chain(&chain_path)?)
    } else {
        [(genesis_digest(), 0)].into_iter().collect()
    };
    let ctx = VerifyContext { store: &store, epochs: &epochs, chain: &view, sigs: &DirectVerifier };
    match ctx.check(&block, now.unwrap_or(block.header.timestamp_ms), past) {
        Ok(()) => {
            println!("accepted {}", block.hash().to_hex());
            Ok(())
        }
        Err(reason) => {
            println!("rejected {} {}", reason.code(), reason.name());
            Err(Exit { code: i32::from(reason.code()), message: String::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["scalowork"]), 2);
        assert_eq!(run(["scalowork", "gen-graph", "--model", "ws", "--n", "5"]), 2);
        assert_eq!(run(["scalowork", "solve", "--graph", "/nonexistent/graph.txt"]), 2);
        assert_eq!(run(["scalowork", "simulate", "--scenario", "nope"]), 2);
        assert_eq!(run(["scalowork", "storage-report", "--pools", "0", "--n", "1", "--m", "1", "--delta", "1"]), 2);
    }
}
