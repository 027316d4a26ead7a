//! Complete DCOP solving by hybridizing depth-first branch-and-bound over a
//! pseudo tree with iterative, context-based bounded inference.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: problem instances, assignments, the brute-force oracle and a
//!   reproducible random generator.
//! * [`tree`]: DFS pseudo trees, separators and induced width.
//! * [`table`]: dense cost hypercubes with join, min-projection and slicing.
//! * [`preprocess`]: the memory-bounded bottom-up utility pass that seeds the
//!   initial lower bounds.
//! * [`context`]: frequency counters, context pattern selection and
//!   context-based utility computation.
//! * [`runtime`]: a deterministic tick-based message-passing simulator that
//!   accounts message count, network load and NCLOs.
//! * [`search`]: the hybrid agent (search part + inference part).
//! * [`dpop`]: the exact DPOP baseline.
//! * [`solver`]: one entry point over all algorithms.
//! * [`bench`]: instance sweeps and CSV output used by the CLI.

pub mod bench;
pub mod context;
pub mod dpop;
pub mod error;
pub mod fixtures;
pub mod message;
pub mod model;
pub mod preprocess;
pub mod runtime;
pub mod search;
pub mod solver;
pub mod table;
pub mod tree;

pub use error::{Error, Result};
pub use model::{AgentId, Assignment, Cost, Problem, SolveResult};
pub use solver::{solve, Algorithm, RunResult, SolverConfig, ThresholdSpec};
pub use table::UtilityTable;
pub use tree::PseudoTree;
