//! A satisfiability tool built on constraint propagation over the clausal
//! partition: clauses are grouped by variable triple into 8-bit constraint
//! vectors, exclusions flow across shared-variable edges to a fixpoint, and
//! a backtracking pass over the reduced space extracts witnesses.
//!
//! The fixpoint alone refutes formulas soundly but can leave unsatisfiable
//! ones looking like candidates, so positive answers are only ever reported
//! after a witness verifies against the original formula; everything else
//! is UNKNOWN or proven UNSAT by exhaustion.

pub mod cli;
pub mod extract;
pub mod formula;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod propagate;
pub mod solver;

pub use extract::{SolveOutcome, UnknownReason, VertexOrder};
pub use formula::{parse_dimacs, reduce_to_3sat, verify_assignment, Assignment, CnfFormula};
pub use propagate::OrderMode;
pub use solver::{solve_formula, RunReport, SolveConfig, SolveRun};
