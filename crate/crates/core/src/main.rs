use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use loopcut::format::{parse_bndag, parse_ugraph};
use loopcut::harness::{
    estimate_success_rate, generate_corpus, load_corpus, read_instance, run_algo, run_bench,
    write_bench_csv, write_corpus, Algo, BenchAlgo, BenchOptions, BenchSummary, CorpusSpec,
    GraphWeights, HarnessError, Instance,
};
use loopcut::loop_cutset::{rlc, split_graph};
use loopcut::oracle::{brute_force_min_loop_cutset, OracleError};
use loopcut::{FvsError, FvsResult, MultiGraph, RandomStream, RunConfig};

#[derive(Parser)]
#[command(
    name = "loopcut",
    version,
    about = "Feedback vertex sets and loop cutsets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoName {
    Guess,
    Repeat,
    Wguess1,
    Wguess2,
    Rwguess1,
    Wra,
    Ga,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Graph,
    Dag,
}

#[derive(Subcommand)]
enum Command {
    /// Feedback vertex set of a UGRAPH file.
    Fvs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoName,
        /// Size bound for guess, wguess1 and rwguess1 (default: vertex count).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 300)]
        max: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Loop cutset of a BNDAG file.
    Cutset {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 300)]
        max: u64,
        #[arg(long)]
        seed: u64,
        /// Solve exactly instead (small DAGs only).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate a random corpus.
    Gen {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Smallest domain size, or smallest vertex weight for graphs.
        #[arg(long)]
        dlo: Option<u32>,
        #[arg(long)]
        dhi: Option<u32>,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several algorithms over a corpus directory.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "wra,ga")]
        algos: Vec<String>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 300)]
        max: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
        /// Fill the elapsed_ms column.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        json: bool,
    },
    /// Estimate how often an algorithm returns an optimum.
    Rate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoName,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 300)]
        max: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    OracleCap(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (message, code) = match self {
            Failure::Usage(m) => (m, 1),
            Failure::Input(m) => (m, 2),
            Failure::OracleCap(m) => (m, 3),
        };
        eprintln!("error: {message}");
        ExitCode::from(code)
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Oracle(_) => Failure::OracleCap(e.to_string()),
            HarnessError::Format { .. } | HarnessError::Io { .. } => Failure::Input(e.to_string()),
            HarnessError::Fvs(FvsError::InvalidParameter(_)) => Failure::Usage(e.to_string()),
            HarnessError::Fvs(_) => Failure::Input(e.to_string()),
            HarnessError::InvalidSpec(_) | HarnessError::Unsupported(_) => {
                Failure::Usage(e.to_string())
            }
        }
    }
}

impl From<FvsError> for Failure {
    fn from(e: FvsError) -> Self {
        HarnessError::Fvs(e).into()
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::OracleCap(e.to_string())
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn algo_for(name: AlgoName, g: &MultiGraph, k: Option<usize>, c: f64, max: u64) -> Algo {
    let k = k.unwrap_or(g.vertex_count());
    match name {
        AlgoName::Guess => Algo::Guess { k },
        AlgoName::Repeat => Algo::Repeat { c },
        AlgoName::Wguess1 => Algo::WGuess1 { k },
        AlgoName::Wguess2 => Algo::WGuess2,
        AlgoName::Rwguess1 => Algo::RWGuess1 { c, k },
        AlgoName::Wra => Algo::Wra { c, max_iters: max },
        AlgoName::Ga => Algo::Ga,
        AlgoName::Oracle => Algo::Oracle,
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).unwrap());
}

fn member_list<T: std::fmt::Display>(members: impl IntoIterator<Item = T>) -> String {
    members
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn fvs_command(
    input: &Path,
    name: AlgoName,
    k: Option<usize>,
    c: f64,
    max: u64,
    seed: u64,
    as_json: bool,
) -> Result<(), Failure> {
    let text = read_text(input)?;
    let g = parse_ugraph(&text).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let algo = algo_for(name, &g, k, c, max);
    let result: Option<FvsResult> =
        run_algo(&g, algo, &RandomStream::new(seed), &RunConfig::default())?;
    if as_json {
        let value = match &result {
            Some(r) => json!({
                "fvs": r.members,
                "weight": r.total_weight.as_f64(),
                "size": r.size(),
                "trace": r.trace,
                "seed": seed,
            }),
            None => json!({ "fvs": null, "seed": seed }),
        };
        print_json(&value);
    } else {
        match &result {
            Some(r) => {
                println!("fvs: {}", member_list(&r.members));
                println!("weight: {}", r.total_weight);
                println!("size: {}", r.size());
                println!("trials: {}", r.trace.trials_run);
            }
            None => println!("no feedback vertex set within the size bound"),
        }
    }
    Ok(())
}

fn cutset_command(
    input: &Path,
    c: f64,
    max: u64,
    seed: u64,
    exact: bool,
    as_json: bool,
) -> Result<(), Failure> {
    let text = read_text(input)?;
    let d = parse_bndag(&text).map_err(|e| Failure::Input(format!("{}: {e}", input.display())))?;
    let cutset = if exact {
        brute_force_min_loop_cutset(&d)?
    } else {
        rlc(&d, c, max, &RandomStream::new(seed), &RunConfig::default())?
    };
    if as_json {
        print_json(&json!({
            "cutset": cutset.members,
            "log2_weight": cutset.log2_weight,
            "trials": cutset.trace.trials_run,
            "seed": seed,
        }));
    } else {
        println!("cutset: {}", member_list(&cutset.members));
        println!("log2_weight: {}", cutset.log2_weight);
        println!("trials: {}", cutset.trace.trials_run);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gen_command(
    kind: Kind,
    n: usize,
    m: usize,
    dlo: Option<u32>,
    dhi: Option<u32>,
    count: usize,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let (weights, default_range) = match (kind, dlo.or(dhi)) {
        (Kind::Dag, _) => (GraphWeights::Unit, (2, 6)),
        (Kind::Graph, None) => (GraphWeights::Unit, (2, 2)),
        (Kind::Graph, Some(_)) => (GraphWeights::Uniform, (2, 6)),
    };
    let lo = dlo.unwrap_or(default_range.0);
    let spec = CorpusSpec {
        n_vertices: n,
        n_edges: m,
        domain_lo: lo,
        domain_hi: dhi.unwrap_or(default_range.1.max(lo)),
        n_instances: count,
        seed,
    };
    let instances = generate_corpus(&spec, matches!(kind, Kind::Dag), weights)?;
    let paths = write_corpus(out, &instances)?;
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}

fn print_summary(summary: &BenchSummary) {
    println!("instances: {}", summary.instances);
    for p in &summary.pairs {
        println!(
            "{} vs {}: {} wins, {} ties, {} losses",
            p.first, p.second, p.wins, p.ties, p.losses
        );
    }
    let show = |x: Option<f64>| x.map_or("-".to_string(), |x| format!("{x:.4}"));
    for m in &summary.means {
        println!(
            "{}: mean weight {}, mean size {}, solved {}",
            m.algo,
            show(m.mean_weight),
            show(m.mean_size),
            m.solved
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn bench_command(
    corpus: &Path,
    algos: &[String],
    c: f64,
    max: u64,
    seed: u64,
    csv_path: &Path,
    timing: bool,
    parallel: bool,
    as_json: bool,
) -> Result<(), Failure> {
    let algos: Vec<BenchAlgo> = algos
        .iter()
        .map(|a| {
            BenchAlgo::parse(a.trim())
                .ok_or_else(|| Failure::Usage(format!("unknown algorithm '{a}'")))
        })
        .collect::<Result<_, _>>()?;
    if c < 1.0 || max < 1 {
        return Err(Failure::Usage("--c must be >= 1 and --max >= 1".into()));
    }
    let instances = load_corpus(corpus)?;
    let opts = BenchOptions {
        c,
        max_iters: max,
        seed,
        timing,
        config: RunConfig {
            parallel,
            ..RunConfig::default()
        },
    };
    let (rows, summary) = run_bench(&instances, &algos, &opts);
    let file = fs::File::create(csv_path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", csv_path.display())))?;
    write_bench_csv(&rows, file)
        .map_err(|e| Failure::Usage(format!("{}: {e}", csv_path.display())))?;
    if as_json {
        print_json(&serde_json::to_value(&summary).unwrap());
    } else {
        print_summary(&summary);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rate_command(
    input: &Path,
    name: AlgoName,
    k: Option<usize>,
    c: f64,
    max: u64,
    trials: u64,
    seed: u64,
    parallel: bool,
    as_json: bool,
) -> Result<(), Failure> {
    let g = match read_instance(input)? {
        Instance::Graph(g) => g,
        Instance::Dag(d) => split_graph(&d).graph,
    };
    if matches!(name, AlgoName::Oracle) {
        return Err(Failure::Usage(
            "rate needs a randomized or greedy algorithm".into(),
        ));
    }
    let algo = algo_for(name, &g, k, c, max);
    let config = RunConfig {
        parallel,
        ..RunConfig::default()
    };
    let estimate = estimate_success_rate(&g, algo, trials, &RandomStream::new(seed), &config)?;
    if as_json {
        print_json(&json!({
            "hit_rate": estimate.hit_rate,
            "ci95": [estimate.ci95.0, estimate.ci95.1],
            "hits": estimate.hits,
            "trials": estimate.trials,
            "optimum": estimate.optimum,
            "seed": seed,
        }));
    } else {
        println!("hit_rate: {}", estimate.hit_rate);
        println!("ci95: [{:.6}, {:.6}]", estimate.ci95.0, estimate.ci95.1);
        println!("hits: {}/{}", estimate.hits, estimate.trials);
        println!("optimum: {}", estimate.optimum);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Fvs {
            input,
            algo,
            k,
            c,
            max,
            seed,
            json,
        } => fvs_command(&input, algo, k, c, max, seed, json),
        Command::Cutset {
            input,
            c,
            max,
            seed,
            exact,
            json,
        } => cutset_command(&input, c, max, seed, exact, json),
        Command::Gen {
            kind,
            n,
            m,
            dlo,
            dhi,
            count,
            seed,
            out,
        } => gen_command(kind, n, m, dlo, dhi, count, seed, &out),
        Command::Bench {
            corpus,
            algos,
            c,
            max,
            seed,
            csv,
            timing,
            parallel,
            json,
        } => bench_command(&corpus, &algos, c, max, seed, &csv, timing, parallel, json),
        Command::Rate {
            input,
            algo,
            k,
            c,
            max,
            trials,
            seed,
            parallel,
            json,
        } => rate_command(&input, algo, k, c, max, trials, seed, parallel, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
