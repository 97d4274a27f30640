//! Instance generation, benchmark runs and success-rate estimation.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{parse_bndag, parse_ugraph, write_bndag, write_ugraph, FormatError};
use crate::graph::{FvsResult, MultiGraph, VertexId, Weight};
use crate::loop_cutset::{split_graph, Dag};
use crate::oracle::{brute_force_min_loop_cutset, brute_force_min_wfvs, greedy_ga, OracleError};
use crate::random_fvs::{
    repeated_guess, repeated_wguess_i, single_guess, single_wguess_i, single_wguess_ii, wra,
    FvsError, RandomStream, RunConfig, WGuessVerdict,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Fvs(#[from] FvsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Unsupported(String),
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_vertices: usize,
    /// Edges for graphs, arcs for DAGs.
    pub n_edges: usize,
    pub domain_lo: u32,
    pub domain_hi: u32,
    pub n_instances: usize,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.check(2)
    }

    fn check(&self, min_lo: u32) -> Result<(), HarnessError> {
        let max_edges = self.n_vertices * self.n_vertices.saturating_sub(1) / 2;
        if self.n_edges > max_edges {
            return Err(HarnessError::InvalidSpec(format!(
                "{} edges do not fit on {} vertices (max {max_edges})",
                self.n_edges, self.n_vertices
            )));
        }
        if self.domain_lo < min_lo || self.domain_lo > self.domain_hi {
            return Err(HarnessError::InvalidSpec(format!(
                "range {}..{} must satisfy {min_lo} <= lo <= hi",
                self.domain_lo, self.domain_hi
            )));
        }
        if self.n_vertices > u32::MAX as usize / 2 {
            return Err(HarnessError::InvalidSpec("too many vertices".into()));
        }
        Ok(())
    }

    /// The random stream for instance `i` of the corpus.
    pub fn instance_stream(&self, i: usize) -> RandomStream {
        RandomStream {
            seed: self.seed,
            stream_index: i as u64,
        }
    }
}

/// How vertex weights of generated undirected graphs are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphWeights {
    Unit,
    /// Integer weights uniform on the spec's domain range.
    Uniform,
}

/// A uniformly random topological order, then `n_edges` distinct arcs drawn
/// uniformly among the pairs that respect it. Domain sizes are uniform on
/// `domain_lo..=domain_hi`.
pub fn gen_random_dag<R: Rng + ?Sized>(
    spec: &CorpusSpec,
    rng: &mut R,
) -> Result<Dag, HarnessError> {
    spec.validate()?;
    let n = spec.n_vertices;
    let domains: Vec<u32> = (0..n)
        .map(|_| rng.gen_range(spec.domain_lo..=spec.domain_hi))
        .collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let pairs = ordered_pairs(n);
    let mut arcs: Vec<(VertexId, VertexId)> = index::sample(rng, pairs.len(), spec.n_edges)
        .into_iter()
        .map(|i| {
            let (a, b) = pairs[i];
            (VertexId(order[a]), VertexId(order[b]))
        })
        .collect();
    arcs.sort();
    let vertices = domains
        .into_iter()
        .enumerate()
        .map(|(v, d)| (VertexId(v as u32), d));
    Ok(Dag::new(vertices, arcs).expect("arcs follow a topological order"))
}

/// Uniform simple graph with `n_edges` distinct edges. Weight ranges may
/// start at 1.
pub fn gen_random_graph<R: Rng + ?Sized>(
    spec: &CorpusSpec,
    weights: GraphWeights,
    rng: &mut R,
) -> Result<MultiGraph, HarnessError> {
    spec.check(1)?;
    let n = spec.n_vertices;
    let mut g = MultiGraph::new();
    for v in 0..n {
        let w = match weights {
            GraphWeights::Unit => Weight::ONE,
            GraphWeights::Uniform => {
                Weight::Finite(rng.gen_range(spec.domain_lo..=spec.domain_hi) as f64)
            }
        };
        g.add_vertex(VertexId(v as u32), w).unwrap();
    }
    let pairs = ordered_pairs(n);
    let mut chosen: Vec<usize> = index::sample(rng, pairs.len(), spec.n_edges).into_vec();
    chosen.sort_unstable();
    for i in chosen {
        let (a, b) = pairs[i];
        g.add_edge(VertexId(a as u32), VertexId(b as u32), 1)
            .unwrap();
    }
    Ok(g)
}

fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instance {
    Graph(MultiGraph),
    Dag(Dag),
}

impl Instance {
    pub fn vertex_count(&self) -> usize {
        match self {
            Instance::Graph(g) => g.vertex_count(),
            Instance::Dag(d) => d.vertex_count(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            Instance::Graph(g) => g.edge_count(),
            Instance::Dag(d) => d.arc_count(),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Instance::Graph(g) => write_ugraph(g),
            Instance::Dag(d) => write_bndag(d),
        }
    }

    fn extension(&self) -> &'static str {
        match self {
            Instance::Graph(_) => "ugraph",
            Instance::Dag(_) => "bndag",
        }
    }

    /// Parses either format, chosen by the header keyword.
    pub fn parse(text: &str) -> Result<Instance, FormatError> {
        let is_dag = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .find(|l| !l.is_empty())
            .is_some_and(|l| l.split_whitespace().next() == Some("dag"));
        if is_dag {
            parse_bndag(text).map(Instance::Dag)
        } else {
            parse_ugraph(text).map(Instance::Graph)
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Instance::parse(&text).map_err(|source| HarnessError::Format {
        path: path.display().to_string(),
        source,
    })
}

pub fn generate_corpus(
    spec: &CorpusSpec,
    dag: bool,
    weights: GraphWeights,
) -> Result<Vec<Instance>, HarnessError> {
    (0..spec.n_instances)
        .map(|i| {
            let mut rng = spec.instance_stream(i).rng();
            if dag {
                gen_random_dag(spec, &mut rng).map(Instance::Dag)
            } else {
                gen_random_graph(spec, weights, &mut rng).map(Instance::Graph)
            }
        })
        .collect()
}

/// Writes `instance_NNNN.<ext>` files into `dir`, creating it if needed.
pub fn write_corpus(dir: &Path, instances: &[Instance]) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let path = dir.join(format!("instance_{i:04}.{}", inst.extension()));
            fs::write(&path, inst.to_text()).map_err(|e| io_err(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Loads every `.ugraph` / `.bndag` file in `dir`, sorted by file name. The
/// instance id is the file stem.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, Instance)>, HarnessError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("ugraph" | "bndag")
            )
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().unwrap().to_string_lossy().into_owned();
            Ok((id, read_instance(&p)?))
        })
        .collect()
}

/// Every algorithm with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algo {
    Guess { k: usize },
    Repeat { c: f64 },
    WGuess1 { k: usize },
    WGuess2,
    RWGuess1 { c: f64, k: usize },
    Wra { c: f64, max_iters: u64 },
    Ga,
    Oracle,
}

impl Algo {
    /// Algorithms that ignore vertex weights are judged by cardinality.
    pub fn is_unweighted(&self) -> bool {
        matches!(self, Algo::Guess { .. } | Algo::Repeat { .. })
    }
}

/// Runs one algorithm; `Ok(None)` is a failed guess (size bound exceeded).
pub fn run_algo(
    g: &MultiGraph,
    algo: Algo,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<Option<FvsResult>, HarnessError> {
    Ok(match algo {
        Algo::Guess { k } => single_guess(g, k, stream)?,
        Algo::Repeat { c } => Some(repeated_guess(g, c, stream, config)?),
        Algo::WGuess1 { k } => single_wguess_i(g, k, stream)?,
        Algo::WGuess2 => Some(single_wguess_ii(g, stream)?),
        Algo::RWGuess1 { c, k } => match repeated_wguess_i(g, c, k, stream, config)? {
            WGuessVerdict::Found(r) => Some(r),
            WGuessVerdict::KTooSmall { .. } => None,
        },
        Algo::Wra { c, max_iters } => Some(wra(g, c, max_iters, stream, config)?),
        Algo::Ga => Some(greedy_ga(g)?),
        Algo::Oracle => Some(brute_force_min_wfvs(g)?),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BenchAlgo {
    Wra,
    Ga,
    Oracle,
    RepeatedGuess,
    RepeatedWGuessI,
}

impl BenchAlgo {
    pub fn name(self) -> &'static str {
        match self {
            BenchAlgo::Wra => "wra",
            BenchAlgo::Ga => "ga",
            BenchAlgo::Oracle => "oracle",
            BenchAlgo::RepeatedGuess => "repeated_guess",
            BenchAlgo::RepeatedWGuessI => "repeated_wguess_i",
        }
    }

    pub fn parse(name: &str) -> Option<BenchAlgo> {
        Some(match name {
            "wra" => BenchAlgo::Wra,
            "ga" => BenchAlgo::Ga,
            "oracle" => BenchAlgo::Oracle,
            "repeated_guess" | "repeat" => BenchAlgo::RepeatedGuess,
            "repeated_wguess_i" | "rwguess1" => BenchAlgo::RepeatedWGuessI,
            _ => return None,
        })
    }

    /// Fixed substream slot, so adding an algorithm never perturbs another.
    fn slot(self) -> u64 {
        self as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchOptions {
    pub c: f64,
    pub max_iters: u64,
    pub seed: u64,
    /// Record wall-clock time. Off by default so output is reproducible.
    pub timing: bool,
    pub config: RunConfig,
}

/// One CSV row. Weights are `log2` state counts for DAG instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub algo: String,
    pub seed: u64,
    pub weight: Option<f64>,
    pub size: Option<usize>,
    pub iterations: u64,
    pub elapsed_ms: u64,
    /// Space-separated member ids.
    pub members: String,
    /// Empty on success.
    pub error: String,
}

impl BenchRow {
    pub fn member_set(&self) -> BTreeSet<VertexId> {
        self.members
            .split_whitespace()
            .filter_map(|s| s.parse().ok())
            .map(VertexId)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairTally {
    pub first: String,
    pub second: String,
    /// Instances where `first` found a strictly lighter set.
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgoMean {
    pub algo: String,
    /// `None` when no run succeeded.
    pub mean_weight: Option<f64>,
    pub mean_size: Option<f64>,
    pub solved: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub pairs: Vec<PairTally>,
    pub means: Vec<AlgoMean>,
}

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

struct Solved {
    members: BTreeSet<VertexId>,
    weight: f64,
    iterations: u64,
}

fn solve_graph(
    g: &MultiGraph,
    algo: BenchAlgo,
    stream: &RandomStream,
    opts: &BenchOptions,
) -> Result<Solved, HarnessError> {
    let capped = RunConfig {
        trial_cap: opts.max_iters,
        ..opts.config.clone()
    };
    let result = match algo {
        BenchAlgo::Wra => wra(g, opts.c, opts.max_iters, stream, &opts.config)?,
        BenchAlgo::Ga => greedy_ga(g)?,
        BenchAlgo::Oracle => brute_force_min_wfvs(g)?,
        BenchAlgo::RepeatedGuess => repeated_guess(g, opts.c, stream, &capped)?,
        BenchAlgo::RepeatedWGuessI => {
            // Size bound from the greedy set, which guarantees a feasible k.
            let k = greedy_ga(g)?.size().max(1);
            match repeated_wguess_i(g, opts.c, k, stream, &capped)? {
                WGuessVerdict::Found(r) => r,
                WGuessVerdict::KTooSmall { .. } => {
                    return Err(HarnessError::Unsupported(format!(
                        "no set of size <= {k} found"
                    )))
                }
            }
        }
    };
    Ok(Solved {
        weight: result.total_weight.as_f64(),
        iterations: result.trace.trials_run,
        members: result.members,
    })
}

fn solve_dag(
    d: &Dag,
    algo: BenchAlgo,
    stream: &RandomStream,
    opts: &BenchOptions,
) -> Result<Solved, HarnessError> {
    match algo {
        BenchAlgo::Oracle => {
            let r = brute_force_min_loop_cutset(d)?;
            Ok(Solved {
                members: r.members,
                weight: r.log2_weight,
                iterations: 0,
            })
        }
        BenchAlgo::RepeatedGuess => Err(HarnessError::Unsupported(
            "repeated_guess ignores weights and cannot produce loop cutsets".into(),
        )),
        _ => {
            let split = split_graph(d);
            let solved = solve_graph(&split.graph, algo, stream, opts)?;
            let members = split.psi(&solved.members).unwrap();
            Ok(Solved {
                weight: d.set_weight(&members).unwrap(),
                members,
                iterations: solved.iterations,
            })
        }
    }
}

fn bench_row(
    id: &str,
    instance: &Instance,
    index: usize,
    algo: BenchAlgo,
    opts: &BenchOptions,
) -> BenchRow {
    let stream = RandomStream {
        seed: opts.seed,
        stream_index: index as u64,
    }
    .substream(algo.slot());
    let start = Instant::now();
    let solved = match instance {
        Instance::Graph(g) => solve_graph(g, algo, &stream, opts),
        Instance::Dag(d) => solve_dag(d, algo, &stream, opts),
    };
    let elapsed_ms = if opts.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let mut row = BenchRow {
        instance_id: id.to_string(),
        n: instance.vertex_count(),
        m: instance.edge_count(),
        algo: algo.name().to_string(),
        seed: opts.seed,
        weight: None,
        size: None,
        iterations: 0,
        elapsed_ms,
        members: String::new(),
        error: String::new(),
    };
    match solved {
        Ok(s) => {
            row.weight = Some(s.weight);
            row.size = Some(s.members.len());
            row.iterations = s.iterations;
            row.members = s
                .members
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ");
        }
        Err(HarnessError::Oracle(e)) => row.error = format!("oracle-cap: {e}"),
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// One row per (instance, algorithm), instance-major. Instance `i` draws
/// from stream `(seed, i)` regardless of scheduling.
pub fn run_bench(
    instances: &[(String, Instance)],
    algos: &[BenchAlgo],
    opts: &BenchOptions,
) -> (Vec<BenchRow>, BenchSummary) {
    let per_instance = |(i, (id, inst)): (usize, &(String, Instance))| -> Vec<BenchRow> {
        algos
            .iter()
            .map(|&a| bench_row(id, inst, i, a, opts))
            .collect()
    };
    let rows: Vec<BenchRow> = if opts.config.parallel {
        instances
            .par_iter()
            .enumerate()
            .flat_map_iter(per_instance)
            .collect()
    } else {
        instances
            .iter()
            .enumerate()
            .flat_map(per_instance)
            .collect()
    };
    let summary = summarize(&rows, algos);
    (rows, summary)
}

/// Win/tie/loss counts for each ordered algorithm pair and per-algorithm
/// means. Depends only on the multiset of rows.
pub fn summarize(rows: &[BenchRow], algos: &[BenchAlgo]) -> BenchSummary {
    use std::collections::BTreeMap;
    let mut by_instance: BTreeMap<&str, BTreeMap<&str, &BenchRow>> = BTreeMap::new();
    for row in rows {
        by_instance
            .entry(&row.instance_id)
            .or_default()
            .insert(&row.algo, row);
    }
    let mut pairs = Vec::new();
    for (i, a) in algos.iter().enumerate() {
        for b in &algos[i + 1..] {
            let mut tally = PairTally {
                first: a.name().into(),
                second: b.name().into(),
                wins: 0,
                ties: 0,
                losses: 0,
            };
            for runs in by_instance.values() {
                let (Some(wa), Some(wb)) = (
                    runs.get(a.name()).and_then(|r| r.weight),
                    runs.get(b.name()).and_then(|r| r.weight),
                ) else {
                    continue;
                };
                if (wa - wb).abs() <= WEIGHT_TOLERANCE {
                    tally.ties += 1;
                } else if wa < wb {
                    tally.wins += 1;
                } else {
                    tally.losses += 1;
                }
            }
            pairs.push(tally);
        }
    }
    let means = algos
        .iter()
        .map(|a| {
            let solved: Vec<&BenchRow> = by_instance
                .values()
                .filter_map(|runs| runs.get(a.name()).copied())
                .filter(|r| r.weight.is_some())
                .collect();
            let count = solved.len() as f64;
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                (count > 0.0).then(|| solved.iter().map(|r| f(r)).sum::<f64>() / count)
            };
            AlgoMean {
                algo: a.name().into(),
                mean_weight: mean(&|r| r.weight.unwrap()),
                mean_size: mean(&|r| r.size.unwrap() as f64),
                solved: solved.len(),
            }
        })
        .collect();
    BenchSummary {
        instances: by_instance.len(),
        pairs,
        means,
    }
}

pub fn write_bench_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateEstimate {
    pub hit_rate: f64,
    /// Wilson score interval at 95%.
    pub ci95: (f64, f64),
    pub hits: u64,
    pub trials: u64,
    /// Minimum weight, or minimum size for unweighted algorithms.
    pub optimum: f64,
}

pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Fraction of independent runs whose output matches the oracle optimum.
/// Run `t` uses `stream.substream(t)`; failed guesses count as misses.
pub fn estimate_success_rate(
    g: &MultiGraph,
    algo: Algo,
    trials: u64,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<RateEstimate, HarnessError> {
    let unweighted = algo.is_unweighted();
    let optimum = if unweighted {
        brute_force_min_wfvs(&g.unit_weighted())?.size() as f64
    } else {
        brute_force_min_wfvs(g)?.total_weight.as_f64()
    };
    let hit = |t: u64| -> Result<bool, HarnessError> {
        Ok(match run_algo(g, algo, &stream.substream(t), config)? {
            None => false,
            Some(r) if unweighted => r.size() as f64 == optimum,
            Some(r) => (r.total_weight.as_f64() - optimum).abs() <= WEIGHT_TOLERANCE,
        })
    };
    let outcomes: Vec<bool> = if config.parallel {
        (0..trials)
            .into_par_iter()
            .map(hit)
            .collect::<Result<_, _>>()?
    } else {
        (0..trials).map(hit).collect::<Result<_, _>>()?
    };
    let hits = outcomes.iter().filter(|&&h| h).count() as u64;
    Ok(RateEstimate {
        hit_rate: if trials == 0 {
            0.0
        } else {
            hits as f64 / trials as f64
        },
        ci95: wilson_interval(hits, trials),
        hits,
        trials,
        optimum,
    })
}
