//! End-to-end pipeline: reduce, partition, build the graph, propagate to
//! fixpoint, optionally extract and verify a witness, and assemble a
//! machine-readable report with the size/work bound checks.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::extract::{part_b_extract, ExtractConfig, ExtractError, SolveOutcome, UnknownReason, VertexOrder};
use crate::formula::{reduce_to_3sat, CnfFormula, FormulaError};
use crate::graph::{build_graph, InstanceGraph};
use crate::partition::{assert_initial_constraints, build_partition, Partition, PartitionError};
use crate::propagate::{classify, Classification, Engine, EngineConfig, OrderMode};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub order: OrderMode,
    pub vertex_order: VertexOrder,
    /// Run the extraction search after a candidate fixpoint.
    pub extract: bool,
    pub max_backtracks: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            order: OrderMode::WorklistFifo,
            vertex_order: VertexOrder::AscendingKey,
            extract: false,
            max_backtracks: 10_000,
        }
    }
}

/// Combinatorial bound checks computed from the run's counters. These hold
/// by construction; a failure means a regression in the core.
#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct BoundReport {
    /// initial + inserted constraint bits within the 8 * |elements| capacity.
    pub bits_within_capacity: bool,
    /// Element count within C(n,3) plus the short-clause elements.
    pub elements_within_bound: bool,
    /// Fixpoint implication count within the order-specific work bound.
    pub implications_within_bound: bool,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.bits_within_capacity && self.elements_within_bound && self.implications_within_bound
    }
}

/// Flat, JSON-stable run summary. The counter fields are present for every
/// outcome and every flag combination.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub outcome: String,
    pub unknown_reason: Option<String>,
    /// Signed literals over the original variables, when verified.
    pub witness: Option<Vec<i64>>,
    /// Fixpoint status: `candidate` or `unsat`.
    pub status: String,
    pub num_vars: u32,
    pub reduced_vars: u32,
    pub clauses: usize,
    pub tautologies_dropped: usize,
    pub elements: usize,
    pub short_elements: usize,
    pub padding_vars: u32,
    pub edges: usize,
    pub max_degree: usize,
    pub sweeps: u64,
    pub implications: u64,
    pub initial_bits: u64,
    pub bits_inserted: u64,
    pub backtracks: u64,
    pub pins: u64,
    pub wall_time_ms: f64,
    pub bounds: BoundReport,
}

/// Typed outcome plus the serializable report.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub outcome: SolveOutcome,
    pub report: RunReport,
}

/// Reduction and element/graph construction shared by the solver and the
/// debug dump path.
pub fn prepare(f: &CnfFormula) -> Result<(CnfFormula, Partition, InstanceGraph), SolveError> {
    let reduced = reduce_to_3sat(f);
    let mut partition = build_partition(&reduced)?;
    for element in partition.elements_mut() {
        assert_initial_constraints(element);
    }
    let graph = build_graph(&partition);
    Ok((reduced, partition, graph))
}

fn binomial3(n: u64) -> u64 {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Drive the full pipeline on an original formula.
pub fn solve_formula(f: &CnfFormula, config: &SolveConfig) -> Result<SolveRun, SolveError> {
    let start = Instant::now();
    let (reduced, partition, graph) = prepare(f)?;

    let engine_config = EngineConfig {
        order: config.order,
        stop_on_empty: true,
        record_trace: false,
    };
    let mut engine = Engine::new(&partition, &graph, engine_config);
    let fixpoint = engine.propagate_to_fixpoint();
    let part_a_stats = fixpoint.stats;

    let (outcome, extract_stats) = match classify(&fixpoint) {
        Classification::Unsat => (SolveOutcome::Unsat, Default::default()),
        Classification::Candidate => {
            if config.extract {
                let extract_config = ExtractConfig {
                    vertex_order: config.vertex_order,
                    max_backtracks: config.max_backtracks,
                };
                part_b_extract(&mut engine, &partition, f, &extract_config)?
            } else {
                // A candidate alone is not an answer; only a verified
                // witness upgrades it.
                (SolveOutcome::Unknown(UnknownReason::CandidateNotSearched), Default::default())
            }
        }
    };

    let graph_stats = graph.stats();
    let d = partition.len() as u64;
    let beta = graph_stats.edge_count as u64;
    let max_degree = graph_stats.max_degree as u64;
    let implications_within_bound = match config.order {
        OrderMode::WorklistFifo | OrderMode::WorklistLifo => {
            part_a_stats.implications <= 2 * beta + part_a_stats.bits_inserted * max_degree
        }
        OrderMode::Sweep | OrderMode::ShuffledSweep(_) => {
            part_a_stats.implications <= (part_a_stats.bits_inserted + 2) * 2 * beta
        }
    };
    let bounds = BoundReport {
        bits_within_capacity: part_a_stats.initial_bits + part_a_stats.bits_inserted <= 8 * d,
        elements_within_bound: d <= binomial3(u64::from(reduced.num_vars())) + partition.short_elements() as u64,
        implications_within_bound,
    };

    let (outcome_str, unknown_reason, witness) = match &outcome {
        SolveOutcome::Unsat => ("UNSAT", None, None),
        SolveOutcome::SatVerified(assignment) => {
            ("SAT-VERIFIED", None, Some(assignment.to_dimacs_literals()))
        }
        SolveOutcome::Unknown(reason) => ("UNKNOWN", Some(reason.as_str().to_string()), None),
    };
    let report = RunReport {
        outcome: outcome_str.to_string(),
        unknown_reason,
        witness,
        status: match classify(&fixpoint) {
            Classification::Unsat => "unsat".to_string(),
            Classification::Candidate => "candidate".to_string(),
        },
        num_vars: f.num_vars(),
        reduced_vars: reduced.num_vars(),
        clauses: f.clauses().len(),
        tautologies_dropped: f.stats().tautologies_dropped,
        elements: partition.len(),
        short_elements: partition.short_elements(),
        padding_vars: partition.num_padding_vars(),
        edges: graph_stats.edge_count,
        max_degree: graph_stats.max_degree,
        sweeps: part_a_stats.sweeps,
        implications: part_a_stats.implications,
        initial_bits: part_a_stats.initial_bits,
        bits_inserted: part_a_stats.bits_inserted,
        backtracks: extract_stats.backtracks,
        pins: extract_stats.pins,
        wall_time_ms: start.elapsed().as_secs_f64() * 1000.0,
        bounds,
    };
    Ok(SolveRun { outcome, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_dimacs, verify_assignment, worked_example, Assignment};

    #[test]
    fn worked_example_end_to_end() {
        let f = worked_example();
        let run = solve_formula(
            &f,
            &SolveConfig {
                extract: true,
                ..SolveConfig::default()
            },
        )
        .unwrap();
        match &run.outcome {
            SolveOutcome::SatVerified(witness) => {
                assert!(verify_assignment(&f, witness).unwrap());
            }
            other => panic!("expected verification, got {other:?}"),
        }
        assert_eq!(run.report.outcome, "SAT-VERIFIED");
        assert_eq!(run.report.status, "candidate");
        assert_eq!(run.report.elements, 3);
        assert_eq!(run.report.edges, 3);
        assert!(run.report.bounds.all_hold());
        assert_eq!(run.report.witness, Some(vec![1, -2, -3, 4, 5]));
    }

    #[test]
    fn contradiction_is_unsat() {
        let f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        let run = solve_formula(&f, &SolveConfig::default()).unwrap();
        assert_eq!(run.outcome, SolveOutcome::Unsat);
        assert_eq!(run.report.outcome, "UNSAT");
        assert_eq!(run.report.status, "unsat");
    }

    #[test]
    fn candidate_without_extraction_is_unknown() {
        let f = worked_example();
        let run = solve_formula(&f, &SolveConfig::default()).unwrap();
        assert_eq!(
            run.outcome,
            SolveOutcome::Unknown(UnknownReason::CandidateNotSearched)
        );
        assert_eq!(run.report.unknown_reason.as_deref(), Some("candidate_not_searched"));
        assert!(run.report.witness.is_none());
    }

    #[test]
    fn long_clauses_are_reduced_and_projected_back() {
        let f = parse_dimacs("p cnf 6 2\n1 2 3 4 5 6 0\n-1 -2 -3 0\n").unwrap();
        let run = solve_formula(
            &f,
            &SolveConfig {
                extract: true,
                ..SolveConfig::default()
            },
        )
        .unwrap();
        match &run.outcome {
            SolveOutcome::SatVerified(witness) => {
                assert_eq!(witness.len(), 6);
                assert!(verify_assignment(&f, witness).unwrap());
            }
            other => panic!("expected verification, got {other:?}"),
        }
        assert!(run.report.reduced_vars > 6);
    }

    #[test]
    fn report_serializes_with_all_counter_fields() {
        let run = solve_formula(&worked_example(), &SolveConfig::default()).unwrap();
        let json = serde_json::to_value(&run.report).unwrap();
        for field in [
            "elements",
            "edges",
            "sweeps",
            "implications",
            "bits_inserted",
            "status",
            "outcome",
            "backtracks",
            "wall_time_ms",
        ] {
            assert!(json.get(field).is_some(), "missing field {field}");
        }
    }

    #[test]
    fn empty_clause_is_detected_downstream() {
        // An empty clause parses fine and must surface as UNSAT through the
        // pipeline, not as a parse error.
        let f = parse_dimacs("p cnf 2 2\n1 2 0\n0\n").unwrap();
        let run = solve_formula(&f, &SolveConfig::default()).unwrap();
        assert_eq!(run.outcome, SolveOutcome::Unsat);
    }

    #[test]
    fn empty_formula_is_vacuously_sat() {
        let f = parse_dimacs("p cnf 3 0\n").unwrap();
        let run = solve_formula(
            &f,
            &SolveConfig {
                extract: true,
                ..SolveConfig::default()
            },
        )
        .unwrap();
        assert_eq!(
            run.outcome,
            SolveOutcome::SatVerified(Assignment::all_false(3))
        );
    }
}
