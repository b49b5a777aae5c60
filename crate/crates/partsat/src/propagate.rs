//! The implication operator and the fixpoint engine. Constraints flow
//! across edges until no application can change any element: a pattern over
//! an edge's shared variables whose extensions are all constrained in the
//! source element has all its extensions constrained in the target element.
//!
//! Constraint vectors only ever gain bits, so the loop terminates after at
//! most `8 * |elements|` insertions regardless of processing order, and the
//! fixpoint is order-independent.

use std::collections::VecDeque;

use crate::graph::{EdgeLink, InstanceGraph};
use crate::oracle::Lcg64;
use crate::partition::{AssignmentIndex, Partition};

/// Processing order for directed edge applications. All orders reach the
/// same fixpoint; the worklist orders do far less work than sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    WorklistFifo,
    WorklistLifo,
    /// Full passes over all directed edges, grouped by source vertex, until
    /// a pass changes nothing.
    Sweep,
    /// Sweep over a seeded shuffle of the directed edge list.
    ShuffledSweep(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub order: OrderMode,
    /// Stop as soon as some element becomes fully constrained. Disable to
    /// reach the true fixpoint (required when comparing processing orders).
    pub stop_on_empty: bool,
    /// Record `(element, old, new)` for every constraint-vector change.
    pub record_trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            order: OrderMode::WorklistFifo,
            stop_on_empty: true,
            record_trace: false,
        }
    }
}

/// Work counters across an engine's lifetime.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationStats {
    /// Full passes performed (sweep orders only).
    pub sweeps: u64,
    /// Directed-edge implication applications.
    pub implications: u64,
    /// Constraint bits present after the initial explicit assertion.
    pub initial_bits: u64,
    /// Constraint bits inserted by implication applications.
    pub bits_inserted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStatus {
    AllElementsNonEmpty,
    SomeElementEmpty,
}

/// Outcome of one propagation run.
#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    pub status: SteadyStatus,
    /// Admissible assignment count per element (8 minus constrained bits).
    pub admissible_counts: Vec<u8>,
    pub stats: PropagationStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Unsat,
    /// No element is empty. Not a satisfiability certificate: extraction
    /// plus verification must confirm any positive answer.
    Candidate,
}

/// Unsatisfiable iff some element admits nothing; everything else is only a
/// candidate.
pub fn classify(report: &SteadyStateReport) -> Classification {
    match report.status {
        SteadyStatus::SomeElementEmpty => Classification::Unsat,
        SteadyStatus::AllElementsNonEmpty => Classification::Candidate,
    }
}

/// Shared-variable patterns fully excluded by the source element: bit `p`
/// is set iff every source index extending pattern `p` is constrained.
pub fn project_inadmissible(r_src: u8, edge: &EdgeLink, a_is_source: bool) -> u8 {
    let mut patterns = 0u8;
    for p in 0..edge.pattern_count() {
        let (source_mask, _) = edge.masks(p, a_is_source);
        if source_mask & !r_src == 0 {
            patterns |= 1 << p;
        }
    }
    patterns
}

/// One implication application: the destination vector grows by the target
/// extensions of every pattern the source fully excludes.
pub fn implication(r_src: u8, r_dst: u8, edge: &EdgeLink, a_is_source: bool) -> u8 {
    let mut new_dst = r_dst;
    for p in 0..edge.pattern_count() {
        let (source_mask, target_mask) = edge.masks(p, a_is_source);
        if source_mask & !r_src == 0 {
            new_dst |= target_mask;
        }
    }
    new_dst
}

/// Bitwise-exact copy of all constraint vectors; restoring one rewinds the
/// engine to the captured state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    r: Vec<u8>,
}

/// All constraint vectors plus the worklist machinery and counters.
/// Single-writer: one engine drives one solve.
#[derive(Debug)]
pub struct Engine<'g> {
    graph: &'g InstanceGraph,
    r: Vec<u8>,
    config: EngineConfig,
    stats: PropagationStats,
    trace: Vec<(usize, u8, u8)>,
    /// Whether every element's clause bits were asserted into its vector;
    /// implication presumes explicit constraints are in place.
    explicit_asserted: bool,
}

impl<'g> Engine<'g> {
    /// Start from a partition's current constraint vectors.
    pub fn new(partition: &Partition, graph: &'g InstanceGraph, config: EngineConfig) -> Self {
        let r: Vec<u8> = partition.elements().iter().map(|e| e.constraint_bits()).collect();
        let explicit_asserted = partition
            .elements()
            .iter()
            .all(|e| e.clause_bits() & !e.constraint_bits() == 0);
        let initial_bits = r.iter().map(|b| u64::from(b.count_ones())).sum();
        Engine {
            graph,
            r,
            config,
            stats: PropagationStats {
                initial_bits,
                ..PropagationStats::default()
            },
            trace: Vec::new(),
            explicit_asserted,
        }
    }

    pub fn constraint_vectors(&self) -> &[u8] {
        &self.r
    }

    pub fn stats(&self) -> PropagationStats {
        self.stats
    }

    pub fn trace(&self) -> &[(usize, u8, u8)] {
        &self.trace
    }

    pub fn graph(&self) -> &'g InstanceGraph {
        self.graph
    }

    pub fn admissible_indices(&self, vertex: usize) -> Vec<AssignmentIndex> {
        AssignmentIndex::all()
            .filter(|i| self.r[vertex] & i.bit() == 0)
            .collect()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { r: self.r.clone() }
    }

    pub fn restore(&mut self, snapshot: &Snapshot) {
        assert_eq!(snapshot.r.len(), self.r.len());
        self.r.copy_from_slice(&snapshot.r);
    }

    /// Pin a vertex to one admissible index: its vector becomes everything
    /// except that index. Returns whether the vector changed.
    pub(crate) fn pin(&mut self, vertex: usize, index: AssignmentIndex) -> bool {
        let new = !index.bit();
        let old = self.r[vertex];
        debug_assert_eq!(old & index.bit(), 0, "pinned index must be admissible");
        debug_assert_eq!(old & !new, 0, "pinning is monotone");
        if old == new {
            return false;
        }
        if self.config.record_trace {
            self.trace.push((vertex, old, new));
        }
        self.r[vertex] = new;
        true
    }

    /// Run the configured order until steady state (no application changes
    /// any vector), seeding from every directed edge.
    pub fn propagate_to_fixpoint(&mut self) -> SteadyStateReport {
        debug_assert!(self.explicit_asserted, "explicit constraints must be asserted first");
        let status = match self.config.order {
            OrderMode::WorklistFifo => self.run_worklist(self.all_directed_edges(), false),
            OrderMode::WorklistLifo => self.run_worklist(self.all_directed_edges(), true),
            OrderMode::Sweep => {
                let order = self.all_directed_edges();
                self.run_sweep(&order)
            }
            OrderMode::ShuffledSweep(seed) => {
                let mut order = self.all_directed_edges();
                let mut rng = Lcg64::new(seed);
                for i in (1..order.len()).rev() {
                    order.swap(i, rng.next_below(i as u64 + 1) as usize);
                }
                self.run_sweep(&order)
            }
        };
        self.report(status)
    }

    /// Re-propagate after a local change, seeding from the vertex's
    /// outgoing edges (FIFO worklist regardless of configured order).
    pub fn propagate_from(&mut self, vertex: usize) -> SteadyStateReport {
        let seeds: Vec<u32> = self.graph.outgoing(vertex).to_vec();
        let status = self.run_worklist(seeds, false);
        self.report(status)
    }

    fn all_directed_edges(&self) -> Vec<u32> {
        (0..self.graph.vertex_count())
            .flat_map(|v| self.graph.outgoing(v).iter().copied())
            .collect()
    }

    fn report(&self, status: SteadyStatus) -> SteadyStateReport {
        SteadyStateReport {
            status,
            admissible_counts: self.r.iter().map(|b| 8 - b.count_ones() as u8).collect(),
            stats: self.stats,
        }
    }

    fn current_status(&self) -> SteadyStatus {
        if self.r.contains(&0xFF) {
            SteadyStatus::SomeElementEmpty
        } else {
            SteadyStatus::AllElementsNonEmpty
        }
    }

    /// Apply one directed edge; returns the destination vertex when its
    /// vector changed.
    fn apply_directed(&mut self, id: u32, run_inserted: &mut u64) -> Option<usize> {
        self.stats.implications += 1;
        let (edge, a_is_source) = self.graph.directed(id);
        let (src, dst) = self.graph.directed_endpoints(id);
        let old = self.r[dst];
        let new = implication(self.r[src], old, edge, a_is_source);
        if new == old {
            return None;
        }
        debug_assert_eq!(old & !new, 0);
        let inserted = u64::from((new & !old).count_ones());
        self.stats.bits_inserted += inserted;
        *run_inserted += inserted;
        // Monotone 8-bit vectors cannot absorb more than 8 bits each; more
        // insertions than that in one run means a broken invariant.
        assert!(
            *run_inserted <= 8 * self.r.len() as u64,
            "insertion cap exceeded: propagation is not monotone"
        );
        if self.config.record_trace {
            self.trace.push((dst, old, new));
        }
        self.r[dst] = new;
        Some(dst)
    }

    fn run_worklist(&mut self, seeds: Vec<u32>, lifo: bool) -> SteadyStatus {
        let mut queue: VecDeque<u32> = VecDeque::new();
        let mut queued = vec![false; self.graph.directed_edge_count()];
        for id in seeds {
            if !queued[id as usize] {
                queued[id as usize] = true;
                queue.push_back(id);
            }
        }
        let mut run_inserted = 0u64;
        while let Some(id) = if lifo { queue.pop_back() } else { queue.pop_front() } {
            queued[id as usize] = false;
            if let Some(dst) = self.apply_directed(id, &mut run_inserted) {
                if self.config.stop_on_empty && self.r[dst] == 0xFF {
                    return SteadyStatus::SomeElementEmpty;
                }
                for &out in self.graph.outgoing(dst) {
                    if !queued[out as usize] {
                        queued[out as usize] = true;
                        queue.push_back(out);
                    }
                }
            }
        }
        self.current_status()
    }

    fn run_sweep(&mut self, order: &[u32]) -> SteadyStatus {
        let mut run_inserted = 0u64;
        loop {
            self.stats.sweeps += 1;
            let mut changed_any = false;
            for &id in order {
                if let Some(dst) = self.apply_directed(id, &mut run_inserted) {
                    changed_any = true;
                    if self.config.stop_on_empty && self.r[dst] == 0xFF {
                        return SteadyStatus::SomeElementEmpty;
                    }
                }
            }
            if !changed_any {
                return self.current_status();
            }
        }
    }
}
