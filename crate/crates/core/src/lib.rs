//! Upper bounds on the stability number α(G) of a graph.
//!
//! The crate computes the Lovász theta function θ(G) through two SDP
//! formulations — the extended one with a matrix variable of order n+1 and
//! the trace-normalized one of order n — and strengthens either of them with
//! exact subgraph constraints: for a vertex subset I the submatrix X_I is
//! forced into the squared stable set polytope STAB²(G_I) (or its scaled
//! variant SSTAB²). Adding all constraints of a fixed subgraph order yields
//! the levels of the exact subgraph hierarchy (ESH), its compressed variant
//! on the smaller formulation (CESH), and the scaled variant (SESH).
//!
//! Everything needed is self-contained:
//! * deterministic graph generators and DIMACS/JSON graph I/O ([`graph`]),
//! * stable set enumeration and an exact branch-and-bound for α ([`stable_sets`]),
//! * facet enumeration of STAB² of edgeless graphs by the double description
//!   method in exact integer arithmetic, plus projection oracles ([`polytope`]),
//! * block-structured SDP model construction and SDPA file export ([`model`]),
//! * a primal–dual interior-point solver ([`solver`]),
//! * bound computation, hierarchy levels and a violated-subgraph
//!   cutting-plane search ([`hierarchy`]).

pub mod graph;
pub mod hierarchy;
pub mod linalg;
pub mod model;
pub mod polytope;
pub mod rng;
pub mod sdpa;
pub mod solver;
pub mod stable_sets;

pub use graph::{Graph, GraphError, VertexSubset};
pub use hierarchy::{BoundReport, Hierarchy, SearchConfig};
pub use model::{EscMode, EscSelection, SdpProblem};
pub use solver::{solve, SolveStatus, SolverSettings};
