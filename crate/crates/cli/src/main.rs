use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use cdspack::broadcast::spread_messages;
use cdspack::experiments::{run_experiment, Config};
use cdspack::generators::{clique_chain, complete, cycle, gnp, harary, petersen, sanders_graph, sanders_subsampled, GraphMeta};
use cdspack::packing::PackingReport;
use cdspack::partition::PartitionReport;
use cdspack::{
    build_packing, build_partition, extract_packing, simulate_broadcast, vertex_connectivity, verify_packing,
    BuildParams, Error, FallbackPolicy, Graph, NodeSet, ScheduleLog,
};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

const AUTO_K_WARN: usize = 3000;

#[derive(Parser)]
#[command(name = "cdspack", version, about = "Connected dominating set packings of k-connected graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Sanders,
    SandersSub,
    CliqueChain,
    Harary,
    Gnp,
    Complete,
    Cycle,
    Petersen,
}

#[derive(Clone, Copy, Debug)]
enum KArg {
    Auto,
    Value(usize),
}

impl FromStr for KArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Self::Auto)
        } else {
            s.parse().map(Self::Value).map_err(|_| format!("expected AUTO or an integer, got {s:?}"))
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fallback {
    Absorb,
    ReportPartial,
}

impl From<Fallback> for FallbackPolicy {
    fn from(f: Fallback) -> Self {
        match f {
            Fallback::Absorb => FallbackPolicy::Absorb,
            Fallback::ReportPartial => FallbackPolicy::ReportPartial,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list plus a `.meta.json` sidecar.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Target size for `sanders-sub`.
        #[arg(long)]
        eta: Option<usize>,
        /// Edge probability for `gnp`.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a fractional CDS packing.
    Pack {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "AUTO")]
        k: KArg,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0625)]
        delta: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "absorb")]
        fallback: Fallback,
        /// Keep the raw classes instead of shrinking overlapping ones.
        #[arg(long)]
        no_overlap_reduction: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition the nodes into disjoint CDSs.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "AUTO")]
        k: KArg,
        #[arg(long, default_value_t = 4.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0625)]
        delta: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "absorb")]
        fallback: Fallback,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a packing; exits 1 if any entry or node load is invalid.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        packing: PathBuf,
        /// Whitespace-separated node ids; defaults to the set stored in the
        /// packing, or all nodes.
        #[arg(long)]
        sampled: Option<PathBuf>,
    },
    /// Broadcast messages over a packing; writes the send log (CSV) and a
    /// throughput report next to it (JSON).
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        packing: PathBuf,
        #[arg(long)]
        messages: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a CDS packing from a broadcast send log.
    Extract {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a seeded experiment; writes CSV rows and a JSON manifest.
    Experiment {
        #[arg(value_parser = ["sampled-conn", "threshold", "merger", "scaling"])]
        name: String,
        /// `key=value` items; list values are comma-separated.
        #[arg(long = "config", num_args = 1..)]
        config: Vec<String>,
        /// File of `key=value` lines; `--config` items override it.
        #[arg(long)]
        config_file: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the exact vertex connectivity.
    Conn {
        #[arg(long)]
        graph: PathBuf,
    },
}

enum Failure {
    Verification(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Verification(m) | Self::Usage(m) | Self::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Self::Io(e.to_string()),
            Error::Invariant(_) | Error::Schedule(_) => Self::Verification(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome<()> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Outcome<Graph> {
    Graph::parse_edge_list(&read(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn echo<T: Serialize>(command: &str, config: &T) {
    eprintln!("{command}: {}", serde_json::to_string(config).expect("serializable"));
}

fn resolve_k(g: &Graph, k: KArg) -> Outcome<usize> {
    match k {
        KArg::Value(k) => Ok(k),
        KArg::Auto => {
            if g.n() > AUTO_K_WARN {
                eprintln!("warning: computing exact connectivity of a {}-node graph may be slow", g.n());
            }
            Ok(vertex_connectivity(g)?)
        }
    }
}

fn require(name: &str, value: Option<usize>) -> Outcome<usize> {
    value.ok_or_else(|| Failure::Usage(format!("--{name} is required for this family")))
}

fn gen(family: Family, k: Option<usize>, n: Option<usize>, eta: Option<usize>, p: Option<f64>, seed: Option<u64>, out: &Path) -> Outcome<()> {
    let seed = resolve_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = |family: &str, g: &Graph, k: usize| GraphMeta {
        family: family.into(),
        n: g.n(),
        k,
        eta: None,
        p: None,
        seed: None,
        padding: Vec::new(),
    };
    let (g, meta) = match family {
        Family::Sanders => {
            let k = require("k", k)?;
            let g = sanders_graph(k)?;
            let m = meta("sanders", &g, k);
            (g, m)
        }
        Family::SandersSub => {
            let (k, eta) = (require("k", k)?, require("eta", eta)?);
            let (g, mut m) = sanders_subsampled(k, eta, &mut rng)?;
            m.seed = Some(seed);
            (g, m)
        }
        Family::CliqueChain => {
            let (k, n) = (require("k", k)?, require("n", n)?);
            let g = clique_chain(n, k)?;
            let m = meta("clique-chain", &g, k);
            (g, m)
        }
        Family::Harary => {
            let (k, n) = (require("k", k)?, require("n", n)?);
            let g = harary(k, n)?;
            let m = meta("harary", &g, k);
            (g, m)
        }
        Family::Gnp => {
            let n = require("n", n)?;
            let p = p.ok_or_else(|| Failure::Usage("--p is required for gnp".into()))?;
            let g = gnp(n, p, &mut rng)?;
            let k = if n >= 2 { vertex_connectivity(&g)? } else { 0 };
            let mut m = meta("gnp", &g, k);
            m.p = Some(p);
            m.seed = Some(seed);
            (g, m)
        }
        Family::Complete => {
            let n = require("n", n)?;
            let g = complete(n);
            let m = meta("complete", &g, n.saturating_sub(1));
            (g, m)
        }
        Family::Cycle => {
            let n = require("n", n)?;
            if n < 3 {
                return Err(Failure::Usage("cycle needs --n >= 3".into()));
            }
            let g = cycle(n);
            let m = meta("cycle", &g, 2);
            (g, m)
        }
        Family::Petersen => {
            let g = petersen();
            let m = meta("petersen", &g, 3);
            (g, m)
        }
    };
    if matches!(family, Family::SandersSub | Family::Gnp) {
        echo("gen", &meta);
    }
    write(out, &g.to_edge_list())?;
    write(&sidecar(out, ".meta.json"), &to_json(&meta))
}

fn load_packing(path: &Path, g: &Graph) -> Outcome<PackingReport> {
    let report: PackingReport = read_json(path)?;
    if report.n != g.n() {
        return Err(Failure::Usage(format!(
            "packing is for {} nodes but the graph has {}",
            report.n,
            g.n()
        )));
    }
    Ok(report)
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Gen {
            family,
            k,
            n,
            eta,
            p,
            seed,
            out,
        } => gen(family, k, n, eta, p, seed, &out),
        Command::Pack {
            graph,
            k,
            p,
            lambda,
            delta,
            seed,
            fallback,
            no_overlap_reduction,
            out,
        } => {
            let g = read_graph(&graph)?;
            let k = resolve_k(&g, k)?;
            let params = BuildParams {
                lambda,
                delta,
                p,
                seed: resolve_seed(seed),
                fallback: fallback.into(),
                reduce_overlap: !no_overlap_reduction,
                ..Default::default()
            };
            echo("pack", &json!({ "graph": graph, "k": k, "params": params }));
            let outcome = build_packing(&g, k, &params)?;
            let report = PackingReport::from_outcome(g.n(), &outcome);
            println!("size {} over {} entries, valid {}", report.size, report.classes.len(), report.valid);
            write(&out, &to_json(&report))
        }
        Command::Partition {
            graph,
            k,
            lambda,
            delta,
            seed,
            fallback,
            out,
        } => {
            let g = read_graph(&graph)?;
            let k = resolve_k(&g, k)?;
            let params = BuildParams {
                lambda,
                delta,
                seed: resolve_seed(seed),
                fallback: fallback.into(),
                ..Default::default()
            };
            echo("partition", &json!({ "graph": graph, "k": k, "params": params }));
            let outcome = build_partition(&g, k, &params)?;
            let report = PartitionReport::from_outcome(&g, k, params.seed, &outcome);
            println!("{} disjoint CDSs, valid {}", report.count, report.valid);
            write(&out, &to_json(&report))
        }
        Command::Verify { graph, packing, sampled } => {
            let g = read_graph(&graph)?;
            let report = load_packing(&packing, &g)?;
            let sampled = match sampled {
                Some(path) => {
                    let ids = read(&path)?
                        .split_whitespace()
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    NodeSet::from_members(g.n(), ids)?
                }
                None => report.sampled_set()?,
            };
            let verdict = verify_packing(&g, &report.packing()?, &sampled);
            println!("{}", to_json(&verdict).trim_end());
            if verdict.pass {
                Ok(())
            } else {
                Err(Failure::Verification("packing failed verification".into()))
            }
        }
        Command::Simulate {
            graph,
            packing,
            messages,
            seed,
            out,
        } => {
            let g = read_graph(&graph)?;
            let packing = load_packing(&packing, &g)?.packing()?;
            let seed = resolve_seed(seed);
            echo("simulate", &json!({ "graph": graph, "messages": messages, "seed": seed }));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (log, report) = simulate_broadcast(&g, &packing, &spread_messages(g.n(), messages), &mut rng)?;
            println!("{} messages in {} rounds, throughput {}", report.messages, report.rounds, report.throughput);
            write(&out, &log.to_csv()?)?;
            write(
                &out.with_extension("json"),
                &to_json(&json!({ "seed": seed, "report": report })),
            )
        }
        Command::Extract { log, graph, out } => {
            let g = read_graph(&graph)?;
            let log = ScheduleLog::from_csv(&read(&log)?).map_err(|e| Failure::Io(format!("{}: {e}", log.display())))?;
            let extracted = extract_packing(&log, &g)?;
            let size = extracted
                .packing
                .size_exact()
                .ok_or_else(|| Failure::Verification("packing size overflows".into()))?;
            let throughput = extracted.throughput();
            let verdict = verify_packing(&g, &extracted.packing, &g.all_nodes());
            let entries = &extracted.packing.entries;
            let summary = json!({
                "n": g.n(),
                "classes": entries.iter().map(|e| e.nodes.to_vec()).collect::<Vec<_>>(),
                "weights": entries.iter().map(|e| *e.weight.numer() as f64 / *e.weight.denom() as f64).collect::<Vec<_>>(),
                "weights_exact": entries.iter().map(|e| e.weight.to_string()).collect::<Vec<_>>(),
                "groups": extracted.groups,
                "size": *size.numer() as f64 / *size.denom() as f64,
                "size_exact": size.to_string(),
                "throughput": *throughput.numer() as f64 / *throughput.denom() as f64,
                "throughput_exact": throughput.to_string(),
                "messages": extracted.messages,
                "rounds": extracted.rounds,
                "valid": verdict.pass,
            });
            println!("size {size} >= throughput {throughput}: {}", size >= throughput);
            write(&out, &to_json(&summary))
        }
        Command::Experiment {
            name,
            config,
            config_file,
            workers,
            out,
        } => {
            let base = match &config_file {
                Some(path) => read(path)?,
                None => String::new(),
            };
            let mut cfg = Config::parse(base.lines().chain(config.iter().map(String::as_str)))?;
            if cfg.entries().get("seed").is_none() {
                cfg.set("seed", resolve_seed(None));
            }
            echo("experiment", &json!({ "name": name, "config": cfg.entries(), "workers": workers }));
            let output = run_experiment(&name, &cfg, workers)?;
            write(&out, &output.csv()?)?;
            write(&out.with_extension("json"), &(output.manifest_json()? + "\n"))?;
            println!("{} rows written to {}", output.rows.len(), out.display());
            Ok(())
        }
        Command::Conn { graph } => {
            let g = read_graph(&graph)?;
            println!("{}", vertex_connectivity(&g)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
