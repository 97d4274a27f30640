//! Loop cutsets of Bayesian network DAGs via the splitting graph.
//!
//! Each DAG vertex `v` becomes `v_in` (incoming arcs, infinite weight) and
//! `v_out` (outgoing arcs, weight `log2 |domain(v)|`) joined by one edge. A
//! vertex set hits a loop at an allowed vertex exactly when its out-copies
//! lie on the loop's image in the splitting graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{MultiGraph, Trace, VertexId, Weight};
use crate::random_fvs::{wra, FvsError, RandomStream, RunConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DagError {
    #[error("input is not a DAG")]
    NotADag,
    #[error("duplicate arc {0} -> {1}")]
    DuplicateArc(VertexId, VertexId),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("no such vertex: {0}")]
    NoSuchVertex(VertexId),
    #[error("domain size of vertex {0} is {1}; must be at least 2")]
    InvalidDomain(VertexId, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    domains: BTreeMap<VertexId, u32>,
    arcs: BTreeSet<(VertexId, VertexId)>,
}

impl Dag {
    /// Validates domain sizes, arc endpoints, duplicates and acyclicity.
    pub fn new(
        vertices: impl IntoIterator<Item = (VertexId, u32)>,
        arcs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Dag, DagError> {
        let mut domains = BTreeMap::new();
        for (v, size) in vertices {
            if size < 2 {
                return Err(DagError::InvalidDomain(v, size));
            }
            if domains.insert(v, size).is_some() {
                return Err(DagError::DuplicateVertex(v));
            }
        }
        let mut arc_set = BTreeSet::new();
        for (p, c) in arcs {
            for v in [p, c] {
                if !domains.contains_key(&v) {
                    return Err(DagError::NoSuchVertex(v));
                }
            }
            if p == c {
                return Err(DagError::NotADag);
            }
            if !arc_set.insert((p, c)) {
                return Err(DagError::DuplicateArc(p, c));
            }
        }
        let dag = Dag {
            domains,
            arcs: arc_set,
        };
        if dag.topological_order().len() != dag.domains.len() {
            return Err(DagError::NotADag);
        }
        Ok(dag)
    }

    /// Kahn's algorithm; shorter than `vertex_count` iff there is a cycle.
    fn topological_order(&self) -> Vec<VertexId> {
        let mut indegree: BTreeMap<VertexId, usize> =
            self.domains.keys().map(|&v| (v, 0)).collect();
        for &(_, c) in &self.arcs {
            *indegree.get_mut(&c).unwrap() += 1;
        }
        let mut ready: VecDeque<VertexId> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut order = Vec::with_capacity(self.domains.len());
        while let Some(v) = ready.pop_front() {
            order.push(v);
            for c in self.children(v) {
                let d = indegree.get_mut(&c).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push_back(c);
                }
            }
        }
        order
    }

    fn children(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.arcs
            .range((v, VertexId(0))..=(v, VertexId(u32::MAX)))
            .map(|&(_, c)| c)
    }

    pub fn vertex_count(&self) -> usize {
        self.domains.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.domains.keys().copied()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn domain_size(&self, v: VertexId) -> Option<u32> {
        self.domains.get(&v).copied()
    }

    /// `log2 |domain(v)|`.
    pub fn log_weight(&self, v: VertexId) -> Option<f64> {
        self.domain_size(v).map(|d| (d as f64).log2())
    }

    /// Total `log2` weight of a vertex set; the log of its joint state count.
    pub fn set_weight(&self, set: &BTreeSet<VertexId>) -> Result<f64, DagError> {
        set.iter()
            .map(|&v| self.log_weight(v).ok_or(DagError::NoSuchVertex(v)))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitGraph {
    pub graph: MultiGraph,
    origin: BTreeMap<VertexId, (VertexId, Side)>,
    copies: BTreeMap<VertexId, (VertexId, VertexId)>,
}

impl SplitGraph {
    pub fn origin(&self, x: VertexId) -> Option<(VertexId, Side)> {
        self.origin.get(&x).copied()
    }

    pub fn in_vertex(&self, v: VertexId) -> Option<VertexId> {
        self.copies.get(&v).map(|c| c.0)
    }

    pub fn out_vertex(&self, v: VertexId) -> Option<VertexId> {
        self.copies.get(&v).map(|c| c.1)
    }

    /// Collapses split vertices onto the DAG vertices they came from.
    pub fn psi(&self, x: &BTreeSet<VertexId>) -> Result<BTreeSet<VertexId>, DagError> {
        x.iter()
            .map(|&s| {
                self.origin(s)
                    .map(|(v, _)| v)
                    .ok_or(DagError::NoSuchVertex(s))
            })
            .collect()
    }
}

/// Builds the splitting graph. The `i`-th DAG vertex in id order gets split
/// ids `2i` (in) and `2i + 1` (out).
pub fn split_graph(d: &Dag) -> SplitGraph {
    let mut graph = MultiGraph::new();
    let mut origin = BTreeMap::new();
    let mut copies = BTreeMap::new();
    for (i, (&v, &size)) in d.domains.iter().enumerate() {
        let vin = VertexId(2 * i as u32);
        let vout = VertexId(2 * i as u32 + 1);
        graph.add_vertex(vin, Weight::Infinite).unwrap();
        graph
            .add_vertex(vout, Weight::finite((size as f64).log2()).unwrap())
            .unwrap();
        graph.add_edge(vin, vout, 1).unwrap();
        origin.insert(vin, (v, Side::In));
        origin.insert(vout, (v, Side::Out));
        copies.insert(v, (vin, vout));
    }
    for &(p, c) in &d.arcs {
        graph.add_edge(copies[&p].1, copies[&c].0, 1).unwrap();
    }
    SplitGraph {
        graph,
        origin,
        copies,
    }
}

pub fn psi(x: &BTreeSet<VertexId>, s: &SplitGraph) -> Result<BTreeSet<VertexId>, DagError> {
    s.psi(x)
}

/// True iff every loop of `d` contains a member of `s` that is not a sink of
/// that loop. Checked as a forest test on the splitting graph with the
/// members' out-copies removed.
pub fn verify_loop_cutset(d: &Dag, s: &BTreeSet<VertexId>) -> Result<bool, DagError> {
    let split = split_graph(d);
    let mut removed = BTreeSet::new();
    for &v in s {
        removed.insert(split.out_vertex(v).ok_or(DagError::NoSuchVertex(v))?);
    }
    Ok(split.graph.is_forest_without(|x| removed.contains(&x)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopCutset {
    pub members: BTreeSet<VertexId>,
    pub log2_weight: f64,
    pub trace: Trace,
}

/// Splits `d`, runs WRA on the splitting graph and maps the result back.
pub fn rlc(
    d: &Dag,
    c: f64,
    max_iters: u64,
    stream: &RandomStream,
    config: &RunConfig,
) -> Result<LoopCutset, FvsError> {
    let split = split_graph(d);
    let fvs = wra(&split.graph, c, max_iters, stream, config)?;
    let members = split.psi(&fvs.members).expect("WRA returns split vertices");
    let log2_weight = d.set_weight(&members).unwrap();
    Ok(LoopCutset {
        members,
        log2_weight,
        trace: fvs.trace,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::graph::fixtures::ids;

    #[test]
    fn dag_validation() {
        assert_eq!(
            Dag::new(
                [(VertexId(0), 2), (VertexId(1), 2)],
                [(VertexId(0), VertexId(1)), (VertexId(1), VertexId(0))]
            ),
            Err(DagError::NotADag)
        );
        assert_eq!(
            Dag::new(
                [(VertexId(0), 2), (VertexId(1), 2)],
                [(VertexId(0), VertexId(1)), (VertexId(0), VertexId(1))]
            ),
            Err(DagError::DuplicateArc(VertexId(0), VertexId(1)))
        );
        assert_eq!(
            Dag::new([(VertexId(0), 1)], []),
            Err(DagError::InvalidDomain(VertexId(0), 1))
        );
        assert_eq!(
            Dag::new([(VertexId(0), 2)], [(VertexId(0), VertexId(0))]),
            Err(DagError::NotADag)
        );
        assert_eq!(
            Dag::new([(VertexId(0), 2)], [(VertexId(0), VertexId(4))]),
            Err(DagError::NoSuchVertex(VertexId(4)))
        );
    }

    #[test]
    fn split_graph_shapes() {
        let single = split_graph(&dag(&[2], &[]));
        assert_eq!(single.graph.vertex_count(), 2);
        assert_eq!(single.graph.edge_count(), 1);
        assert!(single.graph.is_forest());

        let chain = split_graph(&dag(&[2, 2, 2], &[(0, 1), (1, 2)]));
        assert_eq!(chain.graph.vertex_count(), 6);
        assert_eq!(chain.graph.edge_count(), 5);
        assert!(chain.graph.is_forest());

        let tri = split_graph(&triangle([2, 2, 2]));
        assert_eq!(tri.graph.edge_count(), 6);
        // The single cycle is a_out - b_in - b_out - c_in - a_out; a_in and c_out hang off it.
        let (a_in, a_out) = (
            tri.in_vertex(VertexId(0)).unwrap(),
            tri.out_vertex(VertexId(0)).unwrap(),
        );
        let (b_in, c_in) = (
            tri.in_vertex(VertexId(1)).unwrap(),
            tri.in_vertex(VertexId(2)).unwrap(),
        );
        let c_out = tri.out_vertex(VertexId(2)).unwrap();
        assert_eq!(tri.graph.degree(a_in).unwrap(), 1);
        assert_eq!(tri.graph.degree(c_out).unwrap(), 1);
        assert_eq!(tri.graph.multiplicity(a_out, b_in).unwrap(), 1);
        assert_eq!(tri.graph.multiplicity(a_out, c_in).unwrap(), 1);
        assert!(!tri.graph.is_forest());
        assert!(tri.graph.verify_fvs(&[a_out].into()).unwrap());

        for x in tri.graph.vertices() {
            let (_, side) = tri.origin(x).unwrap();
            assert_eq!(tri.graph.weight(x).unwrap().is_infinite(), side == Side::In);
        }
    }

    #[test]
    fn psi_collapses_copies() {
        let s = split_graph(&diamond());
        assert!(psi(&BTreeSet::new(), &s).unwrap().is_empty());
        let a_out = s.out_vertex(VertexId(0)).unwrap();
        let a_in = s.in_vertex(VertexId(0)).unwrap();
        assert_eq!(psi(&[a_out].into(), &s).unwrap(), ids(&[0]));
        assert_eq!(psi(&[a_in, a_out].into(), &s).unwrap(), ids(&[0]));
        assert_eq!(
            psi(&ids(&[99]), &s),
            Err(DagError::NoSuchVertex(VertexId(99)))
        );
    }

    #[test]
    fn loop_cutset_verification() {
        let chain = dag(&[2, 2, 2], &[(0, 1), (1, 2)]);
        assert!(verify_loop_cutset(&chain, &BTreeSet::new()).unwrap());
        let d = diamond();
        assert!(!verify_loop_cutset(&d, &ids(&[3])).unwrap());
        for v in 0..3 {
            assert!(verify_loop_cutset(&d, &ids(&[v])).unwrap());
        }
        assert!(verify_loop_cutset(&d, &ids(&[7])).is_err());
    }

    #[test]
    fn rlc_examples() {
        let cfg = RunConfig::default();
        let s = RandomStream::new(17);
        let tree = dag(&[2, 3, 4, 2], &[(0, 1), (0, 2), (2, 3)]);
        let r = rlc(&tree, 1.0, 300, &s, &cfg).unwrap();
        assert!(r.members.is_empty());
        assert_eq!(r.log2_weight, 0.0);

        let r = rlc(&diamond(), 1.0, 300, &s, &cfg).unwrap();
        assert_eq!(r.members.len(), 1);
        assert!(!r.members.contains(&VertexId(3)));
        assert_eq!(r.log2_weight, 1.0);

        let r = rlc(&triangle([2, 4, 2]), 1.0, 300, &s, &cfg).unwrap();
        assert_eq!(r.members, ids(&[0]));
        assert_eq!(r.log2_weight, 1.0);
    }
}
