//! Minimum-weight feedback vertex sets of undirected multigraphs and minimum
//! loop cutsets of Bayesian network DAGs, computed with randomized
//! reduce-and-guess algorithms.

pub mod format;
pub mod graph;
pub mod harness;
pub mod loop_cutset;
pub mod oracle;
pub mod random_fvs;
pub mod reduce;

pub use graph::{FvsResult, GraphError, MultiGraph, Trace, VertexId, Weight};
pub use loop_cutset::{rlc, verify_loop_cutset, Dag, LoopCutset};
pub use random_fvs::{FvsError, RandomStream, RunConfig};
