//! The clausal partition: clauses grouped by their distinct-variable triple,
//! with 8-bit clause-pattern and constraint-set encodings per element.
//!
//! Bit conventions, fixed once and reused everywhere:
//!
//! * An assignment `(v1, v2, v3)` to an element's triple maps to index
//!   `4*[v1=F] + 2*[v2=F] + [v3=F]`, so `(T,T,T) = 0` and `(F,F,F) = 7`.
//! * Bit `i` of a vector refers to index `i`, least significant bit to the
//!   right. Under this convention the per-position value masks come out as
//!   `T = 0x0F / 0x33 / 0x55` for positions 1..3; they are derived from the
//!   index arithmetic below rather than written out by hand.
//! * The constraint set `R` collects inadmissible indices; the satisfying
//!   set `S` is always its complement and is never stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Clause, CnfFormula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("clause has {0} distinct variables; reduction to 3SAT must run first")]
    ClauseTooWide(usize),
    #[error("clause variable {0} does not occur in the element triple")]
    VariableNotInTriple(u32),
}

/// Index of one assignment to an element's variable triple, in `0..8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AssignmentIndex(u8);

impl AssignmentIndex {
    pub fn new(index: u8) -> Self {
        assert!(index < 8);
        AssignmentIndex(index)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Bit mask selecting this index in an 8-bit vector.
    pub fn bit(self) -> u8 {
        1 << self.0
    }

    pub fn all() -> impl Iterator<Item = AssignmentIndex> {
        (0..8).map(AssignmentIndex)
    }

    /// Value of the triple position (1..=3) under this index.
    pub fn value_at(self, position: usize) -> bool {
        assert!((1..=3).contains(&position));
        self.0 >> (3 - position) & 1 == 0
    }

    /// Inverse of `pattern_index`.
    pub fn values(self) -> (bool, bool, bool) {
        (self.value_at(1), self.value_at(2), self.value_at(3))
    }
}

/// Map a triple assignment to its index: `4*[v1=F] + 2*[v2=F] + [v3=F]`.
pub fn pattern_index(values: (bool, bool, bool)) -> AssignmentIndex {
    let (v1, v2, v3) = values;
    AssignmentIndex(4 * u8::from(!v1) + 2 * u8::from(!v2) + u8::from(!v3))
}

/// All indices where triple position `position` (1..=3) takes `value`.
/// Always a 4-bit mask; derived by enumeration, never hand-written.
pub fn position_value_mask(position: usize, value: bool) -> u8 {
    AssignmentIndex::all()
        .filter(|i| i.value_at(position) == value)
        .fold(0, |acc, i| acc | i.bit())
}

/// Insert one constraint bit: the current state OR'd with the bit being set.
pub fn impose_constraint_bit(state: u8, bit: u8) -> u8 {
    assert!(bit < 8);
    state | (1 << bit)
}

/// Strictly ascending variable triple identifying one partition element.
/// Trailing positions may hold padding ids for short-clause elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripleKey {
    vars: [u32; 3],
}

impl TripleKey {
    pub fn new(vars: [u32; 3]) -> Self {
        assert!(vars[0] < vars[1] && vars[1] < vars[2], "key must be strictly ascending");
        TripleKey { vars }
    }

    pub fn vars(&self) -> [u32; 3] {
        self.vars
    }

    /// Position (1..=3) of `var` within the triple, if present.
    pub fn position_of(&self, var: u32) -> Option<usize> {
        self.vars.iter().position(|&v| v == var).map(|p| p + 1)
    }

    pub fn contains(&self, var: u32) -> bool {
        self.vars.contains(&var)
    }
}

/// Admissible value set for one variable position of an element. Transitions
/// only ever shrink: `{T,F} -> {T} | {F} -> empty`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableDomain {
    Both,
    OnlyTrue,
    OnlyFalse,
    Empty,
}

impl VariableDomain {
    pub fn contains(self, value: bool) -> bool {
        match self {
            VariableDomain::Both => true,
            VariableDomain::OnlyTrue => value,
            VariableDomain::OnlyFalse => !value,
            VariableDomain::Empty => false,
        }
    }

    /// True iff `self` admits no value outside `other` (automaton ordering).
    pub fn shrinks_from(self, other: VariableDomain) -> bool {
        [true, false]
            .iter()
            .all(|&v| !self.contains(v) || other.contains(v))
    }
}

/// One clausal-partition element: a variable triple, the 8-bit set of clause
/// patterns present on it, and the 8-bit constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseElement {
    key: TripleKey,
    clause_bits: u8,
    constraint_bits: u8,
}

impl ClauseElement {
    pub fn new(key: TripleKey) -> Self {
        ClauseElement {
            key,
            clause_bits: 0,
            constraint_bits: 0,
        }
    }

    pub fn key(&self) -> TripleKey {
        self.key
    }

    pub fn clause_bits(&self) -> u8 {
        self.clause_bits
    }

    pub fn constraint_bits(&self) -> u8 {
        self.constraint_bits
    }

    /// Satisfying set, derived as the complement of the constraint set.
    pub fn satisfying_bits(&self) -> u8 {
        !self.constraint_bits
    }

    /// Value domain of one triple position given the current constraints:
    /// a value drops out once all four indices carrying it are constrained.
    pub fn variable_domain(&self, position: usize) -> VariableDomain {
        domain_of_bits(self.constraint_bits, position)
    }
}

/// Domain of triple position `position` under constraint vector `r`.
pub fn domain_of_bits(r: u8, position: usize) -> VariableDomain {
    let t_excluded = position_value_mask(position, true) & !r == 0;
    let f_excluded = position_value_mask(position, false) & !r == 0;
    match (t_excluded, f_excluded) {
        (false, false) => VariableDomain::Both,
        (false, true) => VariableDomain::OnlyTrue,
        (true, false) => VariableDomain::OnlyFalse,
        (true, true) => VariableDomain::Empty,
    }
}

/// Constraint bits a clause asserts on an element triple: the indices of
/// every triple assignment that falsifies the clause. A clause on all three
/// variables sets one bit; on two variables, two bits; on one, four; an
/// empty clause constrains everything.
pub fn clause_constraint_bits(clause: &Clause, key: &TripleKey) -> Result<u8, PartitionError> {
    // Falsifying value per occupied position.
    let mut fixed: [Option<bool>; 3] = [None; 3];
    for lit in clause.literals() {
        let pos = key
            .position_of(lit.var())
            .ok_or(PartitionError::VariableNotInTriple(lit.var()))?;
        fixed[pos - 1] = Some(lit.falsifying_value());
    }
    let mut bits = 0u8;
    for index in AssignmentIndex::all() {
        let matches = (1..=3).all(|pos| match fixed[pos - 1] {
            Some(v) => index.value_at(pos) == v,
            None => true,
        });
        if matches {
            bits |= index.bit();
        }
    }
    Ok(bits)
}

/// The clausal partition of a formula plus the padding-variable bookkeeping
/// for short-clause elements.
#[derive(Debug, Clone)]
pub struct Partition {
    elements: Vec<ClauseElement>,
    num_formula_vars: u32,
    num_padding_vars: u32,
    short_elements: usize,
}

impl Partition {
    pub fn elements(&self) -> &[ClauseElement] {
        &self.elements
    }

    pub fn elements_mut(&mut self) -> &mut [ClauseElement] {
        &mut self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Variables of the formula the partition was built from; padding ids
    /// live strictly above this.
    pub fn num_formula_vars(&self) -> u32 {
        self.num_formula_vars
    }

    pub fn num_padding_vars(&self) -> u32 {
        self.num_padding_vars
    }

    pub fn is_padding_var(&self, var: u32) -> bool {
        var > self.num_formula_vars
    }

    /// Elements whose key needed padding (clauses with fewer than 3 distinct
    /// variables).
    pub fn short_elements(&self) -> usize {
        self.short_elements
    }

    /// One line per element: `(v1,v2,v3) C=0xXX R=0xXX S=0xXX`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.elements {
            let [a, b, c] = e.key().vars();
            let _ = writeln!(
                out,
                "({},{},{}) C=0x{:02X} R=0x{:02X} S=0x{:02X}",
                a,
                b,
                c,
                e.clause_bits(),
                e.constraint_bits(),
                e.satisfying_bits()
            );
        }
        out
    }
}

/// Group clauses by their distinct-variable set, ignoring polarity. Clauses
/// with fewer than 3 distinct variables share an element padded with fresh
/// ids above the formula's variable range; padding ids occur in exactly one
/// element, so they never induce graph edges. Constraint bits stay zero
/// here; `assert_initial_constraints` imposes the explicit baseline.
pub fn build_partition(f: &CnfFormula) -> Result<Partition, PartitionError> {
    let mut groups: BTreeMap<Vec<u32>, Vec<&Clause>> = BTreeMap::new();
    for clause in f.clauses() {
        let vars: Vec<u32> = clause.distinct_vars().into_iter().collect();
        if vars.len() > 3 {
            return Err(PartitionError::ClauseTooWide(vars.len()));
        }
        groups.entry(vars).or_default().push(clause);
    }

    let mut next_padding = f.num_vars();
    let mut elements = Vec::with_capacity(groups.len());
    let mut short_elements = 0;
    for (vars, clauses) in groups {
        let mut key_vars = vars.clone();
        if key_vars.len() < 3 {
            short_elements += 1;
            while key_vars.len() < 3 {
                next_padding += 1;
                key_vars.push(next_padding);
            }
        }
        key_vars.sort_unstable();
        let key = TripleKey::new([key_vars[0], key_vars[1], key_vars[2]]);
        let mut element = ClauseElement::new(key);
        for clause in clauses {
            element.clause_bits |= clause_constraint_bits(clause, &key)?;
        }
        elements.push(element);
    }
    // BTreeMap iteration gives ascending var-set order; padded keys cannot
    // collide with real triples because padding ids are globally fresh.
    elements.sort_by_key(|e| e.key());
    Ok(Partition {
        elements,
        num_formula_vars: f.num_vars(),
        num_padding_vars: next_padding - f.num_vars(),
        short_elements,
    })
}

/// Impose the explicit constraints: every clause pattern present in the
/// element marks its falsifying assignments inadmissible.
pub fn assert_initial_constraints(element: &mut ClauseElement) {
    element.constraint_bits |= element.clause_bits;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_dimacs, worked_example, Literal};
    use proptest::prelude::*;

    fn clause(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&l| Literal::from_dimacs(l).unwrap()).collect())
    }

    #[test]
    fn pattern_index_goldens() {
        assert_eq!(pattern_index((true, true, true)).get(), 0);
        assert_eq!(pattern_index((false, false, false)).get(), 7);
        assert_eq!(pattern_index((false, true, true)).get(), 4);
    }

    #[test]
    fn pattern_index_is_a_bijection() {
        for index in AssignmentIndex::all() {
            assert_eq!(pattern_index(index.values()), index);
        }
    }

    #[test]
    fn position_masks_match_published_encoding() {
        assert_eq!(position_value_mask(1, true), 0b0000_1111);
        assert_eq!(position_value_mask(1, false), 0b1111_0000);
        assert_eq!(position_value_mask(2, true), 0b0011_0011);
        assert_eq!(position_value_mask(2, false), 0b1100_1100);
        assert_eq!(position_value_mask(3, true), 0b0101_0101);
        assert_eq!(position_value_mask(3, false), 0b1010_1010);
    }

    #[test]
    fn constraint_bit_full_clause() {
        let key = TripleKey::new([1, 2, 3]);
        // (x1 | ~x2 | ~x3) is falsified exactly by (F,T,T).
        assert_eq!(clause_constraint_bits(&clause(&[1, -2, -3]), &key).unwrap(), 1 << 4);
        let key2 = TripleKey::new([2, 3, 4]);
        assert_eq!(clause_constraint_bits(&clause(&[-2, -3, -4]), &key2).unwrap(), 1 << 0);
    }

    #[test]
    fn constraint_bits_unit_clause_in_padded_key() {
        let key = TripleKey::new([1, 6, 7]);
        // (x1): all four extensions of x1 = F are constrained.
        assert_eq!(
            clause_constraint_bits(&clause(&[1]), &key).unwrap(),
            0b1111_0000
        );
    }

    #[test]
    fn constraint_bits_reject_foreign_variable() {
        let key = TripleKey::new([1, 2, 3]);
        assert_eq!(
            clause_constraint_bits(&clause(&[4]), &key).unwrap_err(),
            PartitionError::VariableNotInTriple(4)
        );
    }

    #[test]
    fn worked_example_partition() {
        let p = build_partition(&worked_example()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.short_elements(), 0);
        assert_eq!(p.elements()[0].key().vars(), [1, 2, 3]);
        assert_eq!(p.elements()[1].key().vars(), [2, 3, 4]);
        assert_eq!(p.elements()[2].key().vars(), [3, 4, 5]);
        for e in p.elements() {
            assert_eq!(e.clause_bits().count_ones(), 3);
            assert_eq!(e.constraint_bits(), 0);
        }
    }

    #[test]
    fn worked_example_initial_constraints() {
        let mut p = build_partition(&worked_example()).unwrap();
        for e in p.elements_mut() {
            assert_initial_constraints(e);
        }
        assert_eq!(p.elements()[0].constraint_bits(), 0x16);
        assert_eq!(p.elements()[1].constraint_bits(), 0x13);
        assert_eq!(p.elements()[2].constraint_bits(), 0x0B);
    }

    #[test]
    fn duplicate_clauses_set_one_bit() {
        let f = parse_dimacs("p cnf 3 2\n1 2 3 0\n1 2 3 0\n").unwrap();
        let p = build_partition(&f).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.elements()[0].clause_bits().count_ones(), 1);
    }

    #[test]
    fn opposite_polarity_clauses_share_an_element() {
        let f = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n").unwrap();
        let p = build_partition(&f).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.elements()[0].clause_bits().count_ones(), 2);
    }

    #[test]
    fn short_clauses_grouped_and_padded() {
        // (a | b) and (~a | b) share one padded element; (a) gets its own.
        let f = parse_dimacs("p cnf 2 3\n1 2 0\n-1 2 0\n1 0\n").unwrap();
        let p = build_partition(&f).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.short_elements(), 2);
        assert_eq!(p.num_padding_vars(), 3);
        let padded_pair = p.elements().iter().find(|e| e.key().contains(2)).unwrap();
        assert_eq!(padded_pair.clause_bits().count_ones(), 4);
    }

    #[test]
    fn contradictory_units_fill_the_element() {
        let f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        let mut p = build_partition(&f).unwrap();
        assert_eq!(p.len(), 1);
        for e in p.elements_mut() {
            assert_initial_constraints(e);
        }
        assert_eq!(p.elements()[0].constraint_bits(), 0xFF);
    }

    #[test]
    fn empty_clause_constrains_everything() {
        let f = parse_dimacs("p cnf 2 1\n0\n").unwrap();
        let mut p = build_partition(&f).unwrap();
        for e in p.elements_mut() {
            assert_initial_constraints(e);
        }
        assert_eq!(p.elements()[0].constraint_bits(), 0xFF);
    }

    #[test]
    fn partition_rejects_wide_clauses() {
        let f = parse_dimacs("p cnf 4 1\n1 2 3 4 0\n").unwrap();
        assert_eq!(
            build_partition(&f).unwrap_err(),
            PartitionError::ClauseTooWide(4)
        );
    }

    #[test]
    fn element_without_clauses_stays_unconstrained() {
        let mut e = ClauseElement::new(TripleKey::new([1, 2, 3]));
        assert_initial_constraints(&mut e);
        assert_eq!(e.constraint_bits(), 0x00);
    }

    #[test]
    fn impose_bit_goldens() {
        assert_eq!(impose_constraint_bit(47, 6), 111);
        assert_eq!(impose_constraint_bit(47, 0), 47);
        assert_eq!(impose_constraint_bit(0x00, 7), 0x80);
    }

    #[test]
    fn state_machine_is_or_for_all_cells() {
        // The full 256x8 transition table collapses to `state | bit`.
        for state in 0..=255u8 {
            for bit in 0..8u8 {
                let next = impose_constraint_bit(state, bit);
                assert_eq!(next, state | (1 << bit));
                assert_eq!(impose_constraint_bit(next, bit), next);
                assert!(next.count_ones() >= state.count_ones());
            }
        }
    }

    #[test]
    fn variable_domain_goldens() {
        let mut e = ClauseElement::new(TripleKey::new([1, 2, 3]));
        e.constraint_bits = 0x0F;
        assert_eq!(e.variable_domain(1), VariableDomain::OnlyFalse);
        e.constraint_bits = 0xFF;
        for pos in 1..=3 {
            assert_eq!(e.variable_domain(pos), VariableDomain::Empty);
        }
        e.constraint_bits = 0x00;
        for pos in 1..=3 {
            assert_eq!(e.variable_domain(pos), VariableDomain::Both);
        }
    }

    #[test]
    fn domain_automaton_only_shrinks_under_imposition() {
        for state in 0..=255u8 {
            for bit in 0..8u8 {
                let next = impose_constraint_bit(state, bit);
                for pos in 1..=3 {
                    assert!(domain_of_bits(next, pos).shrinks_from(domain_of_bits(state, pos)));
                }
            }
        }
    }

    #[test]
    fn dump_format() {
        let mut p = build_partition(&worked_example()).unwrap();
        for e in p.elements_mut() {
            assert_initial_constraints(e);
        }
        let dump = p.dump();
        let first = dump.lines().next().unwrap();
        assert_eq!(first, "(1,2,3) C=0x16 R=0x16 S=0xE9");
    }

    proptest! {
        #[test]
        fn explicit_constraints_match_naive_falsification(seed in 0u64..300) {
            let cfg = crate::oracle::GeneratorConfig::new(seed, 4 + (seed % 7) as u32, 5 + (seed % 25) as usize);
            let f = crate::oracle::gen_random_3sat(&cfg).unwrap();
            let mut p = build_partition(&f).unwrap();
            for e in p.elements_mut() {
                assert_initial_constraints(e);
            }
            for e in p.elements() {
                // Collect the element's own clauses.
                let clauses: Vec<&Clause> = f
                    .clauses()
                    .iter()
                    .filter(|c| {
                        c.distinct_vars().iter().all(|&v| e.key().contains(v))
                            && c.distinct_vars().len() == 3
                    })
                    .collect();
                for index in AssignmentIndex::all() {
                    let falsifies_some = clauses.iter().any(|c| {
                        c.literals().iter().all(|lit| {
                            let pos = e.key().position_of(lit.var()).unwrap();
                            !lit.evaluate(index.value_at(pos))
                        })
                    });
                    let constrained = e.constraint_bits() & index.bit() != 0;
                    prop_assert_eq!(falsifies_some, constrained);
                }
            }
        }

        #[test]
        fn clause_bits_imply_constraint_bits(seed in 0u64..100) {
            let cfg = crate::oracle::GeneratorConfig::new(seed, 5, 12);
            let f = crate::oracle::gen_random_3sat(&cfg).unwrap();
            let mut p = build_partition(&f).unwrap();
            for e in p.elements_mut() {
                assert_initial_constraints(e);
            }
            for e in p.elements() {
                prop_assert_eq!(e.clause_bits() & !e.constraint_bits(), 0);
                prop_assert_eq!(e.satisfying_bits(), !e.constraint_bits());
            }
        }
    }
}
