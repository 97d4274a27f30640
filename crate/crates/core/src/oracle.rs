//! Exact brute-force solvers and the greedy baseline.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::graph::{FvsResult, MultiGraph, Trace, VertexId, Weight};
use crate::loop_cutset::{split_graph, Dag, LoopCutset};
use crate::random_fvs::FvsError;
use crate::reduce::{reduce_in_place, ReductionKind};

pub const DEFAULT_GRAPH_CAP: usize = 20;
pub const DEFAULT_DAG_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for oracle: {size} candidates, cap is {cap}")]
    TooLarge { size: usize, cap: usize },
}

/// A partial subset of the candidate list, ordered by (weight, size, members).
#[derive(PartialEq, Eq)]
struct Subset {
    weight: Weight,
    members: Vec<usize>,
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .cmp(&other.weight)
            .then(self.members.len().cmp(&other.members.len()))
            .then_with(|| self.members.cmp(&other.members))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first search over subsets of `candidates` (ascending ids). A subset
/// only grows by candidates after its last member, so each subset is
/// generated once and children never sort before their parent; the first
/// feedback vertex set popped is the minimum under (weight, size, lex).
fn min_fvs_over(g: &MultiGraph, candidates: &[VertexId]) -> BTreeSet<VertexId> {
    let weights: Vec<Weight> = candidates.iter().map(|&v| g.weight(v).unwrap()).collect();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Subset {
        weight: Weight::ZERO,
        members: Vec::new(),
    }));
    while let Some(Reverse(state)) = heap.pop() {
        let chosen: BTreeSet<VertexId> = state.members.iter().map(|&i| candidates[i]).collect();
        if g.is_forest_without(|v| chosen.contains(&v)) {
            return chosen;
        }
        let next = state.members.last().map_or(0, |&i| i + 1);
        for (j, &w) in weights.iter().enumerate().skip(next) {
            let mut members = state.members.clone();
            members.push(j);
            heap.push(Reverse(Subset {
                weight: state.weight + w,
                members,
            }));
        }
    }
    unreachable!("removing every vertex leaves a forest")
}

pub fn brute_force_min_wfvs(g: &MultiGraph) -> Result<FvsResult, OracleError> {
    brute_force_min_wfvs_with_cap(g, DEFAULT_GRAPH_CAP)
}

/// Minimum-weight feedback vertex set; ties go to fewer members, then to the
/// lexicographically smallest id list.
pub fn brute_force_min_wfvs_with_cap(g: &MultiGraph, cap: usize) -> Result<FvsResult, OracleError> {
    let n = g.vertex_count();
    if n > cap {
        return Err(OracleError::TooLarge { size: n, cap });
    }
    let candidates: Vec<VertexId> = g.vertices().collect();
    Ok(FvsResult::new(
        g,
        min_fvs_over(g, &candidates),
        Trace::default(),
    ))
}

/// Minimum-cardinality feedback vertex set (weights ignored).
pub fn brute_force_min_fvs_size(g: &MultiGraph) -> Result<usize, OracleError> {
    Ok(brute_force_min_wfvs(&g.unit_weighted())?.size())
}

/// Minimum `log2`-weight loop cutset: the lightest set of out-copies whose
/// removal turns the splitting graph into a forest.
pub fn brute_force_min_loop_cutset(d: &Dag) -> Result<LoopCutset, OracleError> {
    let n = d.vertex_count();
    if n > DEFAULT_DAG_CAP {
        return Err(OracleError::TooLarge {
            size: n,
            cap: DEFAULT_DAG_CAP,
        });
    }
    let split = split_graph(d);
    let outs: Vec<VertexId> = d.vertices().map(|v| split.out_vertex(v).unwrap()).collect();
    let chosen = min_fvs_over(&split.graph, &outs);
    let members = split.psi(&chosen).unwrap();
    let log2_weight = d.set_weight(&members).unwrap();
    Ok(LoopCutset {
        members,
        log2_weight,
        trace: Trace::default(),
    })
}

/// Greedy baseline: branchy-reduce, take the finite-weight vertex with the
/// largest degree/weight ratio (lowest id on ties), repeat until empty.
pub fn greedy_ga(g: &MultiGraph) -> Result<FvsResult, FvsError> {
    if !g.is_forest_without(|v| g.weight(v).unwrap().is_finite()) {
        return Err(FvsError::NoFiniteFvs);
    }
    let mut work = g.clone();
    let mut chosen = BTreeSet::new();
    let mut picks = 0u64;
    loop {
        reduce_in_place(&mut work, ReductionKind::Branchy, &mut chosen);
        if work.is_empty() {
            break;
        }
        let mut best: Option<(f64, VertexId)> = None;
        for v in work.vertices() {
            let Weight::Finite(w) = work.weight(v).unwrap() else {
                continue;
            };
            let ratio = work.degree(v).unwrap() as f64 / w;
            if best.is_none_or(|(r, _)| ratio > r) {
                best = Some((ratio, v));
            }
        }
        let (_, v) = best.ok_or(FvsError::NoSelectableVertex)?;
        chosen.insert(v);
        work.remove_vertex(v).unwrap();
        picks += 1;
    }
    let trace = Trace {
        trials_run: 1,
        k_reached: picks as usize,
        ..Trace::default()
    };
    Ok(FvsResult::new(g, chosen, trace))
}
