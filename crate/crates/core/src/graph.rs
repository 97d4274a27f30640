//! Undirected vertex-weighted multigraphs.
//!
//! Parallel edges are stored as multiplicities and self-loops as per-vertex
//! counts. Vertex ids are stable for the lifetime of a graph: removing a
//! vertex never renumbers the others.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("no such vertex: {0}")]
    NoSuchVertex(VertexId),
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("invalid weight {0}: finite weights must be strictly positive")]
    InvalidWeight(f64),
    #[error("edge multiplicity must be at least 1")]
    ZeroMultiplicity,
}

/// A vertex weight, or the total weight of a vertex set.
///
/// Vertex weights are strictly positive; sums may be zero (the empty set).
/// `Infinite` is larger than every finite value and absorbs addition.
#[derive(Clone, Copy, Debug)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub const ZERO: Weight = Weight::Finite(0.0);
    pub const ONE: Weight = Weight::Finite(1.0);

    /// A vertex weight; rejects zero, negative, NaN and non-finite values.
    pub fn finite(value: f64) -> Result<Weight, GraphError> {
        if value.is_finite() && value > 0.0 {
            Ok(Weight::Finite(value))
        } else {
            Err(GraphError::InvalidWeight(value))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Weight::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    /// The weight as a float, `f64::INFINITY` for `Infinite`.
    pub fn as_f64(self) -> f64 {
        match self {
            Weight::Finite(x) => x,
            Weight::Infinite => f64::INFINITY,
        }
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Weight {}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Weight::Finite(a), Weight::Finite(b)) => a.total_cmp(b),
            (Weight::Finite(_), Weight::Infinite) => Ordering::Less,
            (Weight::Infinite, Weight::Finite(_)) => Ordering::Greater,
            (Weight::Infinite, Weight::Infinite) => Ordering::Equal,
        }
    }
}

impl Add for Weight {
    type Output = Weight;

    fn add(self, rhs: Weight) -> Weight {
        match (self, rhs) {
            (Weight::Finite(a), Weight::Finite(b)) => Weight::Finite(a + b),
            _ => Weight::Infinite,
        }
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::ZERO, Add::add)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(x) => write!(f, "{x}"),
            Weight::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Node {
    weight: Weight,
    adjacency: BTreeMap<VertexId, u32>,
    self_loops: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiGraph {
    nodes: BTreeMap<VertexId, Node>,
    edges: usize,
}

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vertices `0..n`, all of weight 1, no edges.
    pub fn with_unit_vertices(n: u32) -> Self {
        let mut g = Self::new();
        for v in 0..n {
            g.insert_node(VertexId(v), Weight::ONE);
        }
        g
    }

    fn insert_node(&mut self, v: VertexId, weight: Weight) {
        self.nodes.insert(
            v,
            Node {
                weight,
                adjacency: BTreeMap::new(),
                self_loops: 0,
            },
        );
    }

    pub fn add_vertex(&mut self, v: VertexId, weight: Weight) -> Result<(), GraphError> {
        if self.nodes.contains_key(&v) {
            return Err(GraphError::DuplicateVertex(v));
        }
        if let Weight::Finite(x) = weight {
            Weight::finite(x)?;
        }
        self.insert_node(v, weight);
        Ok(())
    }

    /// Adds `multiplicity` parallel edges between `u` and `v`; `u == v` adds self-loops.
    pub fn add_edge(
        &mut self,
        u: VertexId,
        v: VertexId,
        multiplicity: u32,
    ) -> Result<(), GraphError> {
        if multiplicity == 0 {
            return Err(GraphError::ZeroMultiplicity);
        }
        self.check(u)?;
        self.check(v)?;
        if u == v {
            self.node_mut(u).self_loops += multiplicity;
        } else {
            *self.node_mut(u).adjacency.entry(v).or_insert(0) += multiplicity;
            *self.node_mut(v).adjacency.entry(u).or_insert(0) += multiplicity;
        }
        self.edges += multiplicity as usize;
        Ok(())
    }

    pub fn add_self_loops(&mut self, v: VertexId, count: u32) -> Result<(), GraphError> {
        self.add_edge(v, v, count)
    }

    pub fn set_weight(&mut self, v: VertexId, weight: Weight) -> Result<(), GraphError> {
        self.check(v)?;
        if let Weight::Finite(x) = weight {
            Weight::finite(x)?;
        }
        self.node_mut(v).weight = weight;
        Ok(())
    }

    /// Deletes `v` together with its incident edges and self-loops.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        let node = self.nodes.remove(&v).ok_or(GraphError::NoSuchVertex(v))?;
        let mut removed = node.self_loops as usize;
        for (u, m) in node.adjacency {
            self.node_mut(u).adjacency.remove(&v);
            removed += m as usize;
        }
        self.edges -= removed;
        Ok(())
    }

    /// A copy of the graph with `v` removed.
    pub fn without_vertex(&self, v: VertexId) -> Result<MultiGraph, GraphError> {
        let mut g = self.clone();
        g.remove_vertex(v)?;
        Ok(g)
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if self.nodes.contains_key(&v) {
            Ok(())
        } else {
            Err(GraphError::NoSuchVertex(v))
        }
    }

    fn node(&self, v: VertexId) -> Result<&Node, GraphError> {
        self.nodes.get(&v).ok_or(GraphError::NoSuchVertex(v))
    }

    fn node_mut(&mut self, v: VertexId) -> &mut Node {
        self.nodes.get_mut(&v).expect("vertex checked by caller")
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.nodes.contains_key(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of edges, counting every parallel copy and every self-loop.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn weight(&self, v: VertexId) -> Result<Weight, GraphError> {
        Ok(self.node(v)?.weight)
    }

    /// Neighbor multiplicities sum plus two per self-loop.
    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        let node = self.node(v)?;
        Ok(node.adjacency.values().map(|&m| m as usize).sum::<usize>()
            + 2 * node.self_loops as usize)
    }

    pub fn self_loops(&self, v: VertexId) -> Result<u32, GraphError> {
        Ok(self.node(v)?.self_loops)
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> Result<u32, GraphError> {
        self.check(v)?;
        if u == v {
            return self.self_loops(u);
        }
        Ok(self.node(u)?.adjacency.get(&v).copied().unwrap_or(0))
    }

    /// Distinct neighbors of `v` with their edge multiplicities, ascending by id.
    pub fn neighbors(
        &self,
        v: VertexId,
    ) -> Result<impl Iterator<Item = (VertexId, u32)> + '_, GraphError> {
        Ok(self.node(v)?.adjacency.iter().map(|(&u, &m)| (u, m)))
    }

    /// Each distinct unordered pair `u < v` once, with its multiplicity.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, u32)> + '_ {
        self.nodes.iter().flat_map(|(&u, node)| {
            node.adjacency
                .range(u..)
                .filter(move |(&v, _)| v != u)
                .map(move |(&v, &m)| (u, v, m))
        })
    }

    /// A copy with every vertex weight set to 1.
    pub fn unit_weighted(&self) -> MultiGraph {
        let mut g = self.clone();
        for node in g.nodes.values_mut() {
            node.weight = Weight::ONE;
        }
        g
    }

    pub fn total_weight<'a>(
        &self,
        set: impl IntoIterator<Item = &'a VertexId>,
    ) -> Result<Weight, GraphError> {
        set.into_iter().map(|&v| self.weight(v)).sum()
    }

    /// True iff the graph has no cycle. A self-loop or a doubled edge is a cycle.
    pub fn is_forest(&self) -> bool {
        self.is_forest_without(|_| false)
    }

    /// Forest test on the subgraph induced by the vertices for which
    /// `excluded` returns false. Does not copy the graph.
    pub fn is_forest_without(&self, excluded: impl Fn(VertexId) -> bool) -> bool {
        let ids: Vec<VertexId> = self.nodes.keys().copied().collect();
        let index = |v: VertexId| ids.binary_search(&v).expect("vertex present");
        let mut dsu = DisjointSets::new(ids.len());
        for (&u, node) in &self.nodes {
            if excluded(u) {
                continue;
            }
            if node.self_loops > 0 {
                return false;
            }
            for (&v, &m) in node.adjacency.range(u..) {
                if v == u || excluded(v) {
                    continue;
                }
                if m > 1 || !dsu.union(index(u), index(v)) {
                    return false;
                }
            }
        }
        true
    }

    /// True iff removing `set` (and incident edges) leaves a forest.
    pub fn verify_fvs(&self, set: &BTreeSet<VertexId>) -> Result<bool, GraphError> {
        if let Some(&v) = set.iter().find(|v| !self.contains(**v)) {
            return Err(GraphError::NoSuchVertex(v));
        }
        Ok(self.is_forest_without(|v| set.contains(&v)))
    }

    /// Checks adjacency symmetry and the edge-count identity. Used by tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut endpoint_sum = 0usize;
        let mut loops = 0usize;
        for (&u, node) in &self.nodes {
            loops += node.self_loops as usize;
            for (&v, &m) in &node.adjacency {
                if m == 0 {
                    return Err(format!("zero multiplicity stored for {u}-{v}"));
                }
                if v == u {
                    return Err(format!("self-loop stored as adjacency at {u}"));
                }
                let back = self
                    .nodes
                    .get(&v)
                    .ok_or_else(|| format!("{u} points at missing vertex {v}"))?
                    .adjacency
                    .get(&u)
                    .copied()
                    .unwrap_or(0);
                if back != m {
                    return Err(format!("asymmetric multiplicity {u}-{v}: {m} vs {back}"));
                }
                endpoint_sum += m as usize;
            }
        }
        if endpoint_sum / 2 + loops != self.edges {
            return Err(format!(
                "edge count {} does not match adjacency ({} + {loops})",
                self.edges,
                endpoint_sum / 2
            ));
        }
        Ok(())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Bookkeeping attached to every algorithm result.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    pub trials_run: u64,
    /// Largest size bound `k` that was attempted.
    pub k_reached: usize,
    pub seed: u64,
    /// Set when a trial count had to be clipped at the configured cap.
    pub budget_saturated: bool,
    /// `(trial index, weight)` each time the incumbent was replaced.
    pub incumbents: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FvsResult {
    pub members: BTreeSet<VertexId>,
    pub total_weight: Weight,
    pub trace: Trace,
}

impl FvsResult {
    pub fn new(g: &MultiGraph, members: BTreeSet<VertexId>, trace: Trace) -> Self {
        let total_weight = g
            .total_weight(&members)
            .expect("members come from the graph");
        FvsResult {
            members,
            total_weight,
            trace,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}
