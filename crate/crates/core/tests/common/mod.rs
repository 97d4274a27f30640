#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use loopcut::harness::{gen_random_dag, CorpusSpec};
use loopcut::loop_cutset::{split_graph, Dag};
use loopcut::{MultiGraph, RandomStream, VertexId, Weight};
use rand::Rng;

pub fn ids(xs: &[u32]) -> BTreeSet<VertexId> {
    xs.iter().copied().map(VertexId).collect()
}

/// Center 0 (weight 6), vertex 1 (weight 3ε) and vertex 2 (weight 3m), each
/// outer vertex tied to the center by three parallel edges.
pub fn tripled_star(eps: f64, m: f64) -> MultiGraph {
    let mut g = MultiGraph::new();
    g.add_vertex(VertexId(0), Weight::Finite(6.0)).unwrap();
    g.add_vertex(VertexId(1), Weight::Finite(3.0 * eps))
        .unwrap();
    g.add_vertex(VertexId(2), Weight::Finite(3.0 * m)).unwrap();
    g.add_edge(VertexId(0), VertexId(1), 3).unwrap();
    g.add_edge(VertexId(0), VertexId(2), 3).unwrap();
    g
}

pub fn complete(n: u32) -> MultiGraph {
    let mut g = MultiGraph::with_unit_vertices(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(VertexId(u), VertexId(v), 1).unwrap();
        }
    }
    g
}

/// Random multigraph: `edges` endpoint pairs drawn uniformly, so repeats
/// become parallel edges; a drawn pair `(v, v)` becomes a self-loop only
/// when `self_loops` is set. Weights are integers in 1..=9 when `weighted`.
pub fn random_multigraph<R: Rng>(
    rng: &mut R,
    n: u32,
    edges: usize,
    weighted: bool,
    self_loops: bool,
) -> MultiGraph {
    let mut g = MultiGraph::new();
    for v in 0..n {
        let w = if weighted {
            Weight::Finite(rng.gen_range(1..=9) as f64)
        } else {
            Weight::ONE
        };
        g.add_vertex(VertexId(v), w).unwrap();
    }
    for _ in 0..edges {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v || self_loops {
            g.add_edge(VertexId(u), VertexId(v), 1).unwrap();
        }
    }
    g
}

/// Every feedback vertex set, by subset enumeration.
pub fn all_fvs(g: &MultiGraph) -> Vec<BTreeSet<VertexId>> {
    let vs: Vec<VertexId> = g.vertices().collect();
    assert!(vs.len() <= 16);
    (0u32..1 << vs.len())
        .map(|mask| {
            vs.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &v)| v)
                .collect::<BTreeSet<_>>()
        })
        .filter(|s| g.is_forest_without(|v| s.contains(&v)))
        .collect()
}

/// `(|E_X|, |E_{F,X}|)` counted with multiplicity, where `X = V \ F`.
pub fn edge_split(g: &MultiGraph, f: &BTreeSet<VertexId>) -> (usize, usize) {
    let mut inside = 0;
    let mut across = 0;
    for (u, v, m) in g.edges() {
        match (f.contains(&u), f.contains(&v)) {
            (false, false) => inside += m as usize,
            (true, false) | (false, true) => across += m as usize,
            _ => {}
        }
    }
    for v in g.vertices() {
        if !f.contains(&v) {
            inside += g.self_loops(v).unwrap() as usize;
        }
    }
    (inside, across)
}

pub fn degree_sum<'a>(g: &MultiGraph, vs: impl IntoIterator<Item = &'a VertexId>) -> usize {
    vs.into_iter().map(|&v| g.degree(v).unwrap()).sum()
}

pub fn random_dag(seed: u64, n: usize, arcs: usize, lo: u32, hi: u32) -> Dag {
    let spec = CorpusSpec {
        n_vertices: n,
        n_edges: arcs,
        domain_lo: lo,
        domain_hi: hi,
        n_instances: 1,
        seed,
    };
    gen_random_dag(&spec, &mut RandomStream::new(seed).rng()).unwrap()
}

pub type Adjacency = BTreeMap<u32, BTreeSet<u32>>;
pub type EdgeSet = Vec<(u32, u32)>;

/// Simple cycles (length ≥ 3) of a simple undirected graph, keyed by their
/// sorted edge list; the value is one traversal order of the cycle.
pub fn simple_cycles(adj: &Adjacency) -> BTreeMap<EdgeSet, Vec<u32>> {
    fn extend(
        adj: &Adjacency,
        start: u32,
        path: &mut Vec<u32>,
        out: &mut BTreeMap<EdgeSet, Vec<u32>>,
    ) {
        let last = *path.last().unwrap();
        for &next in &adj[&last] {
            if next == start && path.len() >= 3 {
                out.entry(cycle_edges(path)).or_insert_with(|| path.clone());
            } else if next > start && !path.contains(&next) {
                path.push(next);
                extend(adj, start, path, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeMap::new();
    for &s in adj.keys() {
        extend(adj, s, &mut vec![s], &mut out);
    }
    out
}

pub fn cycle_edges(path: &[u32]) -> EdgeSet {
    let mut edges: EdgeSet = (0..path.len())
        .map(|i| {
            let (a, b) = (path[i], path[(i + 1) % path.len()]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    edges
}

pub fn skeleton(d: &Dag) -> Adjacency {
    let mut adj: Adjacency = d.vertices().map(|v| (v.0, BTreeSet::new())).collect();
    for (p, c) in d.arcs() {
        adj.get_mut(&p.0).unwrap().insert(c.0);
        adj.get_mut(&c.0).unwrap().insert(p.0);
    }
    adj
}

pub fn graph_adjacency(g: &MultiGraph) -> Adjacency {
    let mut adj: Adjacency = g.vertices().map(|v| (v.0, BTreeSet::new())).collect();
    for (u, v, m) in g.edges() {
        assert_eq!(m, 1, "expected a simple graph");
        adj.get_mut(&u.0).unwrap().insert(v.0);
        adj.get_mut(&v.0).unwrap().insert(u.0);
    }
    adj
}

/// Loops of a DAG: traversal orders of the simple cycles of its skeleton.
pub fn dag_loops(d: &Dag) -> Vec<Vec<u32>> {
    simple_cycles(&skeleton(d)).into_values().collect()
}

fn has_arc(arcs: &BTreeSet<(u32, u32)>, p: u32, c: u32) -> bool {
    arcs.contains(&(p, c))
}

/// Vertices of a loop that are not sinks on it.
pub fn allowed_vertices(d: &Dag, lp: &[u32]) -> Vec<u32> {
    let arcs: BTreeSet<(u32, u32)> = d.arcs().map(|(p, c)| (p.0, c.0)).collect();
    let k = lp.len();
    (0..k)
        .filter(|&i| {
            let v = lp[i];
            let prev = lp[(i + k - 1) % k];
            let next = lp[(i + 1) % k];
            !(has_arc(&arcs, prev, v) && has_arc(&arcs, next, v))
        })
        .map(|i| lp[i])
        .collect()
}

/// Loop-cutset test straight from the definition: every loop contains a
/// member that is not a sink of that loop.
pub fn is_loop_cutset_by_definition(d: &Dag, s: &BTreeSet<VertexId>) -> bool {
    dag_loops(d).iter().all(|lp| {
        allowed_vertices(d, lp)
            .iter()
            .any(|v| s.contains(&VertexId(*v)))
    })
}

/// Edge set of the splitting-graph cycle a loop maps to: every arc `p→c`
/// becomes `p_out–c_in`, and every loop vertex entered through a parent and
/// left through a child also uses its `v_in–v_out` edge.
pub fn loop_image(d: &Dag, lp: &[u32]) -> EdgeSet {
    let split = split_graph(d);
    let arcs: BTreeSet<(u32, u32)> = d.arcs().map(|(p, c)| (p.0, c.0)).collect();
    let io = |v: u32| {
        (
            split.in_vertex(VertexId(v)).unwrap().0,
            split.out_vertex(VertexId(v)).unwrap().0,
        )
    };
    let k = lp.len();
    let mut edges = Vec::new();
    for i in 0..k {
        let (a, b) = (lp[i], lp[(i + 1) % k]);
        let (p, c) = if has_arc(&arcs, a, b) { (a, b) } else { (b, a) };
        let e = (io(p).1, io(c).0);
        edges.push((e.0.min(e.1), e.0.max(e.1)));
        let prev = lp[(i + k - 1) % k];
        let from_parent_prev = has_arc(&arcs, prev, a);
        let from_parent_next = has_arc(&arcs, b, a);
        if from_parent_prev != from_parent_next {
            let (i_v, o_v) = io(a);
            edges.push((i_v.min(o_v), i_v.max(o_v)));
        }
    }
    edges.sort_unstable();
    edges
}

pub fn split_cycles(d: &Dag) -> BTreeMap<EdgeSet, Vec<u32>> {
    simple_cycles(&graph_adjacency(&split_graph(d).graph))
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
