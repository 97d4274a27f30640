//! Randomized feedback vertex set algorithms.
//!
//! Every algorithm is a pure function of the graph, its parameters and a
//! [`RandomStream`]. Repeated algorithms give trial `i` its own substream, so
//! trials can run on any number of threads and still produce the same result
//! as the sequential loop.

use std::collections::BTreeSet;
use std::ops::{ControlFlow, Range};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{FvsResult, MultiGraph, Trace, VertexId, Weight};
use crate::reduce::{reduce_in_place, ReductionKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FvsError {
    #[error("no selectable vertex")]
    NoSelectableVertex,
    #[error("every feedback vertex set has infinite weight")]
    NoFiniteFvs,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Identifies a reproducible sequence of random draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            stream_index: 0,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// The `index`-th child stream. Children of distinct streams use distinct
    /// derived seeds, so nesting never aliases two streams.
    pub fn substream(&self, index: u64) -> RandomStream {
        RandomStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_index)),
            stream_index: index,
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMode {
    /// `p(v) = d(v) / Σ d(u)`
    DegreeProportional,
    /// `p(v) = (d(v)/w(v)) / Σ d(u)/w(u)`
    DegreeOverWeight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Upper bound on the trial count of one repetition block.
    pub trial_cap: u64,
    /// Run independent trials on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            trial_cap: 1 << 31,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WGuessVerdict {
    Found(FvsResult),
    /// No trial found a feedback vertex set of size at most `k`; with high
    /// probability the minimum weight one is larger than `k`.
    KTooSmall {
        trials_run: u64,
        budget_saturated: bool,
    },
}

fn score(g: &MultiGraph, v: VertexId, mode: SelectionMode) -> f64 {
    let degree = g.degree(v).unwrap() as f64;
    match mode {
        SelectionMode::DegreeProportional => degree,
        SelectionMode::DegreeOverWeight => degree / g.weight(v).unwrap().as_f64(),
    }
}

fn pool(
    g: &MultiGraph,
    mode: SelectionMode,
    finite_only: bool,
) -> Result<(Vec<VertexId>, Vec<f64>), FvsError> {
    let vertices: Vec<VertexId> = g
        .vertices()
        .filter(|&v| !finite_only || g.weight(v).unwrap().is_finite())
        .collect();
    if vertices.is_empty() {
        return Err(FvsError::NoSelectableVertex);
    }
    let mut scores: Vec<f64> = vertices.iter().map(|&v| score(g, v, mode)).collect();
    // All-isolated pools degenerate to a uniform choice.
    if scores.iter().all(|&s| s == 0.0) {
        scores.iter_mut().for_each(|s| *s = 1.0);
    }
    Ok((vertices, scores))
}

/// Exact selection probabilities over the finite-weight vertices of `g`.
pub fn selection_probabilities(
    g: &MultiGraph,
    mode: SelectionMode,
) -> Result<Vec<(VertexId, f64)>, FvsError> {
    let (vertices, scores) = pool(g, mode, true)?;
    let total: f64 = scores.iter().sum();
    Ok(vertices
        .into_iter()
        .zip(scores.into_iter().map(|s| s / total))
        .collect())
}

/// Draws a finite-weight vertex with the probability given by `mode`.
pub fn sample_vertex<R: Rng + ?Sized>(
    g: &MultiGraph,
    mode: SelectionMode,
    rng: &mut R,
) -> Result<VertexId, FvsError> {
    draw(g, mode, true, rng)
}

fn draw<R: Rng + ?Sized>(
    g: &MultiGraph,
    mode: SelectionMode,
    finite_only: bool,
    rng: &mut R,
) -> Result<VertexId, FvsError> {
    let (vertices, scores) = pool(g, mode, finite_only)?;
    let index = WeightedIndex::new(&scores).map_err(|_| FvsError::NoSelectableVertex)?;
    Ok(vertices[index.sample(rng)])
}

#[derive(Clone, Copy)]
struct Plan {
    reduction: ReductionKind,
    mode: SelectionMode,
    finite_only: bool,
}

const GUESS: Plan = Plan {
    reduction: ReductionKind::Rich,
    mode: SelectionMode::DegreeProportional,
    finite_only: false,
};

const WGUESS_I: Plan = Plan {
    reduction: ReductionKind::Branchy,
    mode: SelectionMode::DegreeProportional,
    finite_only: true,
};

const WGUESS_II: Plan = Plan {
    reduction: ReductionKind::Branchy,
    mode: SelectionMode::DegreeOverWeight,
    finite_only: true,
};

/// One reduce-and-pick run. `bound` caps |F|, forced vertices included;
/// `None` means run until the graph is exhausted.
fn trial<R: Rng + ?Sized>(
    g: &MultiGraph,
    plan: Plan,
    bound: Option<usize>,
    rng: &mut R,
) -> Result<Option<BTreeSet<VertexId>>, FvsError> {
    let mut work = g.clone();
    let mut chosen = BTreeSet::new();
    loop {
        reduce_in_place(&mut work, plan.reduction, &mut chosen);
        let over = |len: usize| bound.is_some_and(|k| len > k);
        if over(chosen.len()) {
            return Ok(None);
        }
        if work.is_empty() {
            return Ok(Some(chosen));
        }
        if over(chosen.len() + 1) {
            return Ok(None);
        }
        let v = draw(&work, plan.mode, plan.finite_only, rng)?;
        chosen.insert(v);
        work.remove_vertex(v).unwrap();
    }
}

fn check_c(c: f64) -> Result<(), FvsError> {
    if c.is_finite() && c >= 1.0 {
        Ok(())
    } else {
        Err(FvsError::InvalidParameter("c must be a finite real >= 1"))
    }
}

fn check_k(k: usize) -> Result<(), FvsError> {
    if k >= 1 {
        Ok(())
    } else {
        Err(FvsError::InvalidParameter("k must be at least 1"))
    }
}

/// Weighted algorithms never pick infinite-weight vertices, so they need the
/// infinite-weight vertices alone to induce a forest.
fn ensure_finite_fvs(g: &MultiGraph) -> Result<(), FvsError> {
    if g.is_forest_without(|v| g.weight(v).unwrap().is_finite()) {
        Ok(())
    } else {
        Err(FvsError::NoFiniteFvs)
    }
}

/// `⌈c·base^k⌉`, clipped at `cap`. The flag reports clipping.
pub fn trial_count(c: f64, base: f64, k: usize, cap: u64) -> (u64, bool) {
    let exact = (c * base.powf(k as f64)).ceil();
    if exact.is_finite() && exact <= cap as f64 {
        (exact as u64, false)
    } else {
        (cap, true)
    }
}

/// Feeds trial results to `consume` in index order until it breaks. In
/// parallel mode a batch of trials is computed ahead; results past the break
/// are discarded, so the outcome matches sequential execution.
fn drive<T, F, C>(range: Range<u64>, parallel: bool, run: F, mut consume: C)
where
    T: Send,
    F: Fn(u64) -> T + Sync,
    C: FnMut(u64, T) -> ControlFlow<()>,
{
    if !parallel {
        for i in range {
            if consume(i, run(i)).is_break() {
                return;
            }
        }
        return;
    }
    let batch = (rayon::current_num_threads() as u64 * 4).max(1);
    let mut start = range.start;
    while start < range.end {
        let end = range.end.min(start.saturating_add(batch));
        let results: Vec<T> = (start..end).into_par_iter().map(&run).collect();
        for (i, r) in (start..end).zip(results) {
            if consume(i, r).is_break() {
                return;
            }
        }
        start = end;
    }
}

fn single_trace(stream: &RandomStream, k: usize) -> Trace {
    Trace {
        trials_run: 1,
        k_reached: k,
        seed: stream.seed,
        ..Trace::default()
    }
}

/// One unweighted guess: rich reduction, then degree-proportional picks while
/// |F| stays within `k`. `None` means this trial overshot `k`, not that no
/// size-`k` set exists. Vertex weights are ignored while choosing.
pub fn single_guess(
    g: &MultiGraph,
    k: usize,
    stream: &RandomStream,
) -> Result<Option<FvsResult>, FvsError> {
    check_k(k)?;
    let found = trial(g, GUESS, Some(k), &mut stream.rng())?;
    Ok(found.map(|f| FvsResult::new(g, f, single_trace(stream, k))))
}

/// Sweeps `k = 1, 2, ...` running `⌈c·4^k⌉` guesses for each `k` and returns
/// the first success.
pub fn repeated_guess(
    g: &MultiGraph,
    c: f64,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<FvsResult, FvsError> {
    check_c(c)?;
    let mut next = 0u64;
    let mut saturated = false;
    for k in 1..=g.vertex_count().max(1) {
        let (count, clipped) = trial_count(c, 4.0, k, config.trial_cap);
        saturated |= clipped;
        let mut found = None;
        let mut error = None;
        drive(
            next..next + count,
            config.parallel,
            |i| trial(g, GUESS, Some(k), &mut stream.substream(i).rng()),
            |i, result| match result {
                Ok(Some(f)) => {
                    found = Some((i, f));
                    ControlFlow::Break(())
                }
                Ok(None) => ControlFlow::Continue(()),
                Err(e) => {
                    error = Some(e);
                    ControlFlow::Break(())
                }
            },
        );
        if let Some(e) = error {
            return Err(e);
        }
        if let Some((i, f)) = found {
            let trace = Trace {
                trials_run: i + 1,
                k_reached: k,
                seed: stream.seed,
                budget_saturated: saturated,
                incumbents: Vec::new(),
            };
            return Ok(FvsResult::new(g, f, trace));
        }
        next += count;
    }
    unreachable!("a guess bounded by |V| cannot fail")
}

/// Weighted guess, version I: branchy reduction and degree-proportional picks
/// over finite-weight vertices, bounded by `k`.
pub fn single_wguess_i(
    g: &MultiGraph,
    k: usize,
    stream: &RandomStream,
) -> Result<Option<FvsResult>, FvsError> {
    check_k(k)?;
    ensure_finite_fvs(g)?;
    let found = trial(g, WGUESS_I, Some(k), &mut stream.rng())?;
    Ok(found.map(|f| FvsResult::new(g, f, single_trace(stream, k))))
}

/// Weighted guess, version II: picks with probability proportional to
/// degree over weight and runs until the graph is exhausted.
pub fn single_wguess_ii(g: &MultiGraph, stream: &RandomStream) -> Result<FvsResult, FvsError> {
    ensure_finite_fvs(g)?;
    let f = trial(g, WGUESS_II, None, &mut stream.rng())?.expect("unbounded trial always succeeds");
    Ok(FvsResult::new(g, f, single_trace(stream, g.vertex_count())))
}

/// Runs `⌈c·6^k⌉` version-I guesses and keeps the lightest success; equal
/// weights go to the lower trial index.
pub fn repeated_wguess_i(
    g: &MultiGraph,
    c: f64,
    k: usize,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<WGuessVerdict, FvsError> {
    check_c(c)?;
    check_k(k)?;
    ensure_finite_fvs(g)?;
    let (count, saturated) = trial_count(c, 6.0, k, config.trial_cap);
    let mut best: Option<(Weight, u64, BTreeSet<VertexId>)> = None;
    let mut incumbents = Vec::new();
    let mut error = None;
    drive(
        0..count,
        config.parallel,
        |i| trial(g, WGUESS_I, Some(k), &mut stream.substream(i).rng()),
        |i, result| match result {
            Ok(Some(f)) => {
                let w = g.total_weight(&f).unwrap();
                if best.as_ref().is_none_or(|(bw, _, _)| w < *bw) {
                    incumbents.push((i, w.as_f64()));
                    best = Some((w, i, f));
                }
                ControlFlow::Continue(())
            }
            Ok(None) => ControlFlow::Continue(()),
            Err(e) => {
                error = Some(e);
                ControlFlow::Break(())
            }
        },
    );
    if let Some(e) = error {
        return Err(e);
    }
    Ok(match best {
        Some((_, _, f)) => {
            let trace = Trace {
                trials_run: count,
                k_reached: k,
                seed: stream.seed,
                budget_saturated: saturated,
                incumbents,
            };
            WGuessVerdict::Found(FvsResult::new(g, f, trace))
        }
        None => WGuessVerdict::KTooSmall {
            trials_run: count,
            budget_saturated: saturated,
        },
    })
}

/// `min(max_iters, c·6^w)`, saturating at `max_iters` when the power overflows.
pub fn wra_budget(c: f64, incumbent: Weight, max_iters: u64) -> f64 {
    let cap = max_iters as f64;
    match incumbent {
        Weight::Infinite => cap,
        Weight::Finite(w) => {
            let b = c * 6f64.powf(w);
            if b.is_finite() && b < cap {
                b
            } else {
                cap
            }
        }
    }
}

/// Repeats unbounded version-I guesses while the iteration counter stays
/// within `min(max_iters, c·6^{w(F)})`, where `F` is the lightest set so far.
/// A guess replaces the incumbent when it is no heavier.
pub fn wra(
    g: &MultiGraph,
    c: f64,
    max_iters: u64,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<FvsResult, FvsError> {
    check_c(c)?;
    if max_iters == 0 {
        return Err(FvsError::InvalidParameter("max_iters must be at least 1"));
    }
    ensure_finite_fvs(g)?;
    let run = |i: u64| -> Result<BTreeSet<VertexId>, FvsError> {
        Ok(trial(g, WGUESS_I, None, &mut stream.substream(i).rng())?
            .expect("unbounded trial always succeeds"))
    };

    let mut best = run(0)?;
    let mut best_weight = g.total_weight(&best).unwrap();
    let mut trace = Trace {
        trials_run: 1,
        k_reached: g.vertex_count(),
        seed: stream.seed,
        budget_saturated: false,
        incumbents: vec![(0, best_weight.as_f64())],
    };
    if best.is_empty() {
        // Nothing is lighter than the empty set.
        return Ok(FvsResult::new(g, best, trace));
    }

    let mut budget = wra_budget(c, best_weight, max_iters);
    let last = budget.floor() as u64;
    let mut error = None;
    drive(1..last + 1, config.parallel, run, |i, result| {
        if i as f64 > budget {
            return ControlFlow::Break(());
        }
        let f = match result {
            Ok(f) => f,
            Err(e) => {
                error = Some(e);
                return ControlFlow::Break(());
            }
        };
        trace.trials_run = i + 1;
        let w = g.total_weight(&f).unwrap();
        if w <= best_weight {
            best = f;
            best_weight = w;
            trace.incumbents.push((i, w.as_f64()));
            budget = wra_budget(c, w, max_iters);
        }
        ControlFlow::Continue(())
    });
    if let Some(e) = error {
        return Err(e);
    }
    trace.budget_saturated = budget >= max_iters as f64;
    Ok(FvsResult::new(g, best, trace))
}
