//! Witness extraction: pin one admissible assignment per element,
//! re-propagate, and backtrack chronologically on conflict. A propagation
//! fixpoint with no empty element is only a candidate, so every extracted
//! assignment must pass verification against the original formula before it
//! is reported; exhausting the whole reduced space proves unsatisfiability.

use thiserror::Error;

use crate::formula::{verify_assignment, Assignment, CnfFormula, FormulaError};
use crate::partition::{AssignmentIndex, Partition};
use crate::propagate::{Engine, Snapshot, SteadyStatus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("extraction requires a candidate fixpoint (some element is already empty)")]
    NotCandidate,
    #[error("index {index} is already constrained in element {vertex}")]
    IndexAlreadyConstrained { vertex: usize, index: u8 },
    #[error("element {0} is not pinned to a single assignment")]
    ElementNotPinned(usize),
    #[error("elements disagree on the value of shared variable {0}")]
    SharedVariableConflict(u32),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Why a solve ended without a definite answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// Propagation found a candidate but extraction was not requested.
    CandidateNotSearched,
    /// The backtracking budget ran out before the search concluded.
    BudgetExhausted,
    /// An extracted assignment failed verification (never reported as SAT).
    VerificationFailed,
}

impl UnknownReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UnknownReason::CandidateNotSearched => "candidate_not_searched",
            UnknownReason::BudgetExhausted => "budget_exhausted",
            UnknownReason::VerificationFailed => "verification_failed",
        }
    }
}

/// Final answer for one formula. `SatVerified` always carries an assignment
/// that passed `verify_assignment` on the original formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Unsat,
    SatVerified(Assignment),
    Unknown(UnknownReason),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtractStats {
    /// Snapshot restores forced by conflicts or exhausted vertices.
    pub backtracks: u64,
    /// Pin attempts, including retried ones.
    pub pins: u64,
}

/// Order in which vertices are selected for pinning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrder {
    /// Ascending element key (deterministic baseline).
    AscendingKey,
    /// Fewest admissible indices first, recomputed at each selection.
    MostConstrainedFirst,
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractConfig {
    pub vertex_order: VertexOrder,
    /// Backtracks allowed before giving up with `Unknown`.
    pub max_backtracks: u64,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            vertex_order: VertexOrder::AscendingKey,
            max_backtracks: 10_000,
        }
    }
}

/// Pin a vertex to one admissible index: constrain everything else, leaving
/// a single satisfying assignment. Propagation is then seeded from the
/// vertex's incident edges by the caller. Idempotent on re-pinning.
pub fn select_and_pin(
    engine: &mut Engine,
    vertex: usize,
    index: AssignmentIndex,
) -> Result<bool, ExtractError> {
    if engine.constraint_vectors()[vertex] & index.bit() != 0 {
        return Err(ExtractError::IndexAlreadyConstrained {
            vertex,
            index: index.get(),
        });
    }
    Ok(engine.pin(vertex, index))
}

/// Read the assignment encoded by a fully pinned engine state. Shared
/// variables are checked for cross-element agreement rather than assumed;
/// padding ids are dropped from the result.
pub fn read_off_assignment(r: &[u8], partition: &Partition) -> Result<Assignment, ExtractError> {
    let total_vars = partition.num_formula_vars() + partition.num_padding_vars();
    let mut values: Vec<Option<bool>> = vec![None; total_vars as usize];
    for (slot, element) in partition.elements().iter().enumerate() {
        let admissible = !r[slot];
        if admissible.count_ones() != 1 {
            return Err(ExtractError::ElementNotPinned(slot));
        }
        let index = AssignmentIndex::new(admissible.trailing_zeros() as u8);
        for (pos, var) in element.key().vars().into_iter().enumerate() {
            let value = index.value_at(pos + 1);
            match values[var as usize - 1] {
                None => values[var as usize - 1] = Some(value),
                Some(existing) if existing != value => {
                    return Err(ExtractError::SharedVariableConflict(var));
                }
                Some(_) => {}
            }
        }
    }
    Ok(Assignment::new(
        values
            .into_iter()
            .take(partition.num_formula_vars() as usize)
            .map(|v| v.unwrap_or(false))
            .collect(),
    ))
}

struct Frame {
    vertex: usize,
    remaining: std::vec::IntoIter<AssignmentIndex>,
    snapshot: Snapshot,
}

/// Search the reduced space left by propagation: snapshot, pin the next
/// admissible index, re-propagate, and backtrack chronologically when an
/// element empties. Each vertex is pinned exactly once per branch.
///
/// Returns `SatVerified` only for assignments that verify against the
/// original formula; a fully exhausted search proves the formula
/// unsatisfiable, and an exceeded budget yields `Unknown`.
pub fn part_b_extract(
    engine: &mut Engine,
    partition: &Partition,
    original: &CnfFormula,
    config: &ExtractConfig,
) -> Result<(SolveOutcome, ExtractStats), ExtractError> {
    if engine.constraint_vectors().contains(&0xFF) {
        return Err(ExtractError::NotCandidate);
    }
    let total = engine.graph().vertex_count();
    let mut pinned = vec![false; total];
    let mut frames: Vec<Frame> = Vec::new();
    let mut stats = ExtractStats::default();

    enum Step {
        Select,
        TryIndex,
    }
    let mut step = Step::Select;
    loop {
        match step {
            Step::Select => {
                if frames.len() == total {
                    match read_off_assignment(engine.constraint_vectors(), partition) {
                        Ok(reduced_assignment) => {
                            let witness = reduced_assignment.truncated(original.num_vars());
                            if verify_assignment(original, &witness)? {
                                return Ok((SolveOutcome::SatVerified(witness), stats));
                            }
                            return Ok((SolveOutcome::Unknown(UnknownReason::VerificationFailed), stats));
                        }
                        Err(_) => {
                            // Path inconsistency surfaced only at read-off:
                            // treat like any other conflict.
                            stats.backtracks += 1;
                            if stats.backtracks > config.max_backtracks {
                                return Ok((SolveOutcome::Unknown(UnknownReason::BudgetExhausted), stats));
                            }
                            step = Step::TryIndex;
                        }
                    }
                } else {
                    let vertex= next_vertex(engine, &pinned, config.vertex_order);
                    pinned[vertex] = true;
                    frames.push(Frame {
                        vertex,
                        remaining: engine.admissible_indices(vertex).into_iter(),
                        snapshot: engine.snapshot(),
                    });
                    step = Step::TryIndex;
                }
            }
            Step::TryIndex => {
                let Some(frame) = frames.last_mut() else {
                    // Every branch of the reduced space is exhausted.
                    return Ok((SolveOutcome::Unsat, stats));
                };
                match frame.remaining.next() {
                    Some(index) => {
                        engine.restore(&frame.snapshot);
                        let vertex = frame.vertex;
                        select_and_pin(engine, vertex, index)?;
                        stats.pins += 1;
                        let report = engine.propagate_from(vertex);
                        if report.status == SteadyStatus::SomeElementEmpty {
                            stats.backtracks += 1;
                            if stats.backtracks > config.max_backtracks {
                                return Ok((SolveOutcome::Unknown(UnknownReason::BudgetExhausted), stats));
                            }
                            step = Step::TryIndex;
                        } else {
                            step = Step::Select;
                        }
                    }
                    None => {
                        let exhausted = frames.pop().expect("frame exists");
                        pinned[exhausted.vertex] = false;
                        engine.restore(&exhausted.snapshot);
                        if frames.is_empty() {
                            return Ok((SolveOutcome::Unsat, stats));
                        }
                        stats.backtracks += 1;
                        if stats.backtracks > config.max_backtracks {
                            return Ok((SolveOutcome::Unknown(UnknownReason::BudgetExhausted), stats));
                        }
                        step = Step::TryIndex;
                    }
                }
            }
        }
    }
}

fn next_vertex(engine: &Engine, pinned: &[bool], order: VertexOrder) -> usize {
    match order {
        VertexOrder::AscendingKey => pinned
            .iter()
            .position(|&p| !p)
            .expect("an unpinned vertex exists"),
        VertexOrder::MostConstrainedFirst => (0..pinned.len())
            .filter(|&v| !pinned[v])
            .min_by_key(|&v| (engine.admissible_indices(v).len(), v))
            .expect("an unpinned vertex exists"),
    }
}
