//! Leaf removal and linkpoint bypassing.
//!
//! Two fixpoint pipelines share one driver. The rich pipeline bypasses every
//! degree-2 vertex; the branchy pipeline only bypasses a degree-2 vertex that
//! has a neighbor of equal or lighter weight. Vertices that end up carrying a
//! self-loop belong to every feedback vertex set and are moved to `forced`.
//!
//! Passes scan vertices in ascending id and repeat until nothing fires, so the
//! outcome is a deterministic function of the input graph.

use std::collections::BTreeSet;

use crate::graph::{MultiGraph, VertexId, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    Rich,
    Branchy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionOutcome {
    pub reduced: MultiGraph,
    /// Vertices that acquired a self-loop, in the input graph's ids.
    pub forced: BTreeSet<VertexId>,
    pub forced_weight: Weight,
}

pub fn reduce_to_rich(g: &MultiGraph) -> ReductionOutcome {
    reduce(g, ReductionKind::Rich)
}

pub fn reduce_to_branchy(g: &MultiGraph) -> ReductionOutcome {
    reduce(g, ReductionKind::Branchy)
}

pub fn reduce(g: &MultiGraph, kind: ReductionKind) -> ReductionOutcome {
    let mut reduced = g.clone();
    let mut forced = BTreeSet::new();
    reduce_in_place(&mut reduced, kind, &mut forced);
    let forced_weight = g
        .total_weight(&forced)
        .expect("forced vertices come from the input");
    ReductionOutcome {
        reduced,
        forced,
        forced_weight,
    }
}

/// Reduces `g` to a fixpoint, appending forced vertices to `forced`.
pub fn reduce_in_place(g: &mut MultiGraph, kind: ReductionKind, forced: &mut BTreeSet<VertexId>) {
    let looped: Vec<VertexId> = g
        .vertices()
        .filter(|&v| g.self_loops(v).unwrap() > 0)
        .collect();
    for v in looped {
        force(g, v, forced);
    }

    loop {
        let mut changed = false;
        let order: Vec<VertexId> = g.vertices().collect();
        for v in order {
            if !g.contains(v) {
                continue;
            }
            let degree = g.degree(v).unwrap();
            if degree <= 1 {
                g.remove_vertex(v).unwrap();
                changed = true;
            } else if degree == 2 && bypass_allowed(g, v, kind) {
                bypass(g, v, forced);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    debug_assert!(match kind {
        ReductionKind::Rich => is_rich(g),
        ReductionKind::Branchy => is_branchy(g),
    });
}

fn force(g: &mut MultiGraph, v: VertexId, forced: &mut BTreeSet<VertexId>) {
    g.remove_vertex(v).unwrap();
    forced.insert(v);
}

fn bypass_allowed(g: &MultiGraph, v: VertexId, kind: ReductionKind) -> bool {
    match kind {
        ReductionKind::Rich => true,
        ReductionKind::Branchy => {
            let w = g.weight(v).unwrap();
            g.neighbors(v)
                .unwrap()
                .any(|(u, _)| g.weight(u).unwrap() <= w)
        }
    }
}

/// Replaces the degree-2 vertex `v` by an edge between its neighbors. When
/// both edges lead to the same neighbor the new edge is a self-loop, so that
/// neighbor is forced instead.
fn bypass(g: &mut MultiGraph, v: VertexId, forced: &mut BTreeSet<VertexId>) {
    let ends: Vec<(VertexId, u32)> = g.neighbors(v).unwrap().collect();
    g.remove_vertex(v).unwrap();
    match ends[..] {
        [(u, 2)] => force(g, u, forced),
        [(u, 1), (w, 1)] => g.add_edge(u, w, 1).unwrap(),
        _ => unreachable!("degree-2 vertex without self-loops has these shapes"),
    }
}

/// Every vertex has degree at least 3 and no vertex has a self-loop.
pub fn is_rich(g: &MultiGraph) -> bool {
    g.vertices()
        .all(|v| g.self_loops(v).unwrap() == 0 && g.degree(v).unwrap() >= 3)
}

/// No leaves or self-loops, and each degree-2 vertex has only strictly
/// heavier neighbors (so no two linkpoints are adjacent).
pub fn is_branchy(g: &MultiGraph) -> bool {
    g.vertices().all(|v| {
        let degree = g.degree(v).unwrap();
        if g.self_loops(v).unwrap() > 0 || degree <= 1 {
            return false;
        }
        if degree > 2 {
            return true;
        }
        let w = g.weight(v).unwrap();
        g.neighbors(v)
            .unwrap()
            .all(|(u, _)| g.weight(u).unwrap() > w)
    })
}
