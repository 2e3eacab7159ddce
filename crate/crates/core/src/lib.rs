//! Exact solvers for the k disjoint shortest paths problem on unit-length undirected graphs.
//!
//! Every vertex gets a position: its vector of BFS distances to the k sources. Shortest
//! paths become monotone curves in that embedding, and the solvers work with the 2D
//! projections of these curves.

pub mod dsp2;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod instances;
pub mod kdsp;
pub mod layered_dag;
pub mod oracle;

pub use dsp2::{solve_dsp2, solve_dsp2_traced};
pub use error::{InputError, SolveError};
pub use graph::{
    bfs_distances, compute_positions, format_solution, parse_instance, parse_solution,
    read_instance, verify_solution, DistanceMatrix, Graph, Instance, Path, PositionTable, Solution,
    Violation, UNREACHABLE,
};
pub use kdsp::{solve_kdsp, KdspAnswer, KdspConfig, KdspOutcome};
pub use oracle::{oracle_solve, EnumLimits, OracleResult};
