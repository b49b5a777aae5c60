//! CNF data model: DIMACS ingestion/emission, reduction to 3SAT form, and
//! assignment verification against the original clause list.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("missing or garbled DIMACS header (expected `p cnf <vars> <clauses>`)")]
    BadHeader,
    #[error("literal {literal} references variable beyond declared count {num_vars}")]
    VariableOutOfRange { literal: i64, num_vars: u32 },
    #[error("unexpected token `{0}` in clause section")]
    BadToken(String),
    #[error("unterminated final clause (missing trailing 0)")]
    UnterminatedClause,
    #[error("assignment does not cover variable {0}")]
    IncompleteAssignment(u32),
    #[error("literal variable id must be >= 1")]
    ZeroVariable,
}

/// A signed occurrence of a variable. Variable ids start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: u32, negated: bool) -> Self {
        assert!(var >= 1, "variable ids start at 1");
        Literal { var, negated }
    }

    pub fn positive(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn negative(var: u32) -> Self {
        Literal::new(var, true)
    }

    pub fn from_dimacs(lit: i64) -> Result<Self, FormulaError> {
        if lit == 0 {
            return Err(FormulaError::ZeroVariable);
        }
        let var = u32::try_from(lit.unsigned_abs()).map_err(|_| FormulaError::VariableOutOfRange {
            literal: lit,
            num_vars: u32::MAX,
        })?;
        Ok(Literal::new(var, lit < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var);
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn var(self) -> u32 {
        self.var
    }

    pub fn negated(self) -> bool {
        self.negated
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn evaluate(self, value: bool) -> bool {
        value != self.negated
    }

    /// The variable value that makes this literal false.
    pub fn falsifying_value(self) -> bool {
        self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. May be empty (trivially unsatisfiable).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Distinct variable ids, ascending.
    pub fn distinct_vars(&self) -> BTreeSet<u32> {
        self.literals.iter().map(|l| l.var).collect()
    }

    /// True iff the clause contains both polarities of some variable.
    pub fn is_tautology(&self) -> bool {
        let set: BTreeSet<Literal> = self.literals.iter().copied().collect();
        set.iter().any(|l| set.contains(&Literal::new(l.var, !l.negated)))
    }

    /// Drop repeated identical literals, keeping first-occurrence order.
    fn dedup(&mut self) -> usize {
        let mut seen = BTreeSet::new();
        let before = self.literals.len();
        self.literals.retain(|l| seen.insert(*l));
        before - self.literals.len()
    }
}

/// Whether a formula is the user's input or the 3SAT form derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original,
    /// Reduced form; auxiliary variables occupy ids above `original_num_vars`.
    Reduced { original_num_vars: u32 },
}

/// Bookkeeping from normalization, reported alongside parse results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeStats {
    pub tautologies_dropped: usize,
    pub duplicate_literals_dropped: usize,
    /// Clause count declared in the DIMACS header, when parsed from text.
    pub declared_clauses: Option<usize>,
}

/// A CNF formula over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Clause>,
    origin: Origin,
    stats: NormalizeStats,
}

impl CnfFormula {
    /// Build a normalized formula: duplicate literals removed per clause and
    /// tautological clauses dropped (they constrain nothing).
    pub fn new(num_vars: u32, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        Self::with_stats(num_vars, clauses, NormalizeStats::default())
    }

    fn with_stats(
        num_vars: u32,
        clauses: Vec<Clause>,
        mut stats: NormalizeStats,
    ) -> Result<Self, FormulaError> {
        let mut normalized = Vec::with_capacity(clauses.len());
        for mut clause in clauses {
            for lit in clause.literals() {
                if lit.var > num_vars {
                    return Err(FormulaError::VariableOutOfRange {
                        literal: lit.to_dimacs(),
                        num_vars,
                    });
                }
            }
            if clause.is_tautology() {
                stats.tautologies_dropped += 1;
                continue;
            }
            stats.duplicate_literals_dropped += clause.dedup();
            normalized.push(clause);
        }
        Ok(CnfFormula {
            num_vars,
            clauses: normalized,
            origin: Origin::Original,
            stats,
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn stats(&self) -> &NormalizeStats {
        &self.stats
    }

    /// Number of variables of the formula this one was reduced from, or its
    /// own count when it is an original.
    pub fn original_num_vars(&self) -> u32 {
        match self.origin {
            Origin::Original => self.num_vars,
            Origin::Reduced { original_num_vars } => original_num_vars,
        }
    }

    pub fn contains_empty_clause(&self) -> bool {
        self.clauses.iter().any(|c| c.is_empty())
    }

    /// DIMACS text with a header reflecting post-normalization counts.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for clause in &self.clauses {
            for lit in clause.literals() {
                out.push_str(&format!("{} ", lit.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// A total assignment over variables `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all_false(num_vars: u32) -> Self {
        Assignment {
            values: vec![false; num_vars as usize],
        }
    }

    /// Decode variable `v`'s value from bit `v-1` of `bits`.
    pub fn from_bits(bits: u32, num_vars: u32) -> Self {
        Assignment {
            values: (0..num_vars).map(|i| bits & (1 << i) != 0).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.values.get((var as usize).checked_sub(1)?).copied()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// Keep only the first `num_vars` variables.
    pub fn truncated(&self, num_vars: u32) -> Assignment {
        Assignment {
            values: self.values[..num_vars as usize].to_vec(),
        }
    }

    /// Signed-literal DIMACS representation (`v` line payload).
    pub fn to_dimacs_literals(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let id = (i + 1) as i64;
                if v {
                    id
                } else {
                    -id
                }
            })
            .collect()
    }
}

/// Parse DIMACS CNF text: `c` comment lines, a `p cnf <vars> <clauses>`
/// header, then zero-terminated clauses. An empty clause is legal input and
/// yields a trivially unsatisfiable formula, not a parse error.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, FormulaError> {
    let mut lines = text.lines();
    let mut header: Option<(u32, usize)> = None;
    let mut body_tokens: Vec<&str> = Vec::new();

    for line in &mut lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('p') {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(FormulaError::BadHeader);
            }
            let num_vars = fields[1].parse::<u32>().map_err(|_| FormulaError::BadHeader)?;
            let num_clauses = fields[2].parse::<usize>().map_err(|_| FormulaError::BadHeader)?;
            header = Some((num_vars, num_clauses));
            break;
        }
        return Err(FormulaError::BadHeader);
    }
    let (num_vars, declared_clauses) = header.ok_or(FormulaError::BadHeader)?;

    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        body_tokens.extend(trimmed.split_whitespace());
    }

    let mut clauses = Vec::with_capacity(declared_clauses);
    let mut current: Vec<Literal> = Vec::new();
    let mut open = false;
    for token in body_tokens {
        let value: i64 = token
            .parse()
            .map_err(|_| FormulaError::BadToken(token.to_string()))?;
        if value == 0 {
            clauses.push(Clause::new(std::mem::take(&mut current)));
            open = false;
            continue;
        }
        if value.unsigned_abs() > u64::from(num_vars) {
            return Err(FormulaError::VariableOutOfRange {
                literal: value,
                num_vars,
            });
        }
        current.push(Literal::from_dimacs(value)?);
        open = true;
    }
    if open {
        return Err(FormulaError::UnterminatedClause);
    }

    CnfFormula::with_stats(
        num_vars,
        clauses,
        NormalizeStats {
            declared_clauses: Some(declared_clauses),
            ..NormalizeStats::default()
        },
    )
}

/// Split every clause with more than 3 literals into a chain of 3-literal
/// clauses over fresh auxiliary variables. The result is equisatisfiable
/// with the input; auxiliary ids are appended after the original ids.
pub fn reduce_to_3sat(f: &CnfFormula) -> CnfFormula {
    let mut next_aux = f.num_vars;
    let mut clauses = Vec::with_capacity(f.clauses.len());
    for clause in &f.clauses {
        let lits = clause.literals();
        if lits.len() <= 3 {
            clauses.push(clause.clone());
            continue;
        }
        // (l1 l2 x1) (~x1 l3 x2) ... (~xk l_{n-1} l_n)
        next_aux += 1;
        let mut link = next_aux;
        clauses.push(Clause::new(vec![lits[0], lits[1], Literal::positive(link)]));
        for &lit in &lits[2..lits.len() - 2] {
            next_aux += 1;
            clauses.push(Clause::new(vec![
                Literal::negative(link),
                lit,
                Literal::positive(next_aux),
            ]));
            link = next_aux;
        }
        clauses.push(Clause::new(vec![
            Literal::negative(link),
            lits[lits.len() - 2],
            lits[lits.len() - 1],
        ]));
    }
    CnfFormula {
        num_vars: next_aux,
        clauses,
        origin: Origin::Reduced {
            original_num_vars: f.original_num_vars(),
        },
        stats: f.stats,
    }
}

/// True iff every clause of `f` has at least one literal true under `a`.
/// The assignment must cover every variable of `f`.
pub fn verify_assignment(f: &CnfFormula, a: &Assignment) -> Result<bool, FormulaError> {
    if (a.len() as u32) < f.num_vars {
        return Err(FormulaError::IncompleteAssignment(a.len() as u32 + 1));
    }
    Ok(f.clauses.iter().all(|clause| {
        clause
            .literals()
            .iter()
            .any(|lit| lit.evaluate(a.get(lit.var()).unwrap()))
    }))
}

/// The worked 9-clause example instance over five variables, used as a
/// fixture across the test suite.
pub fn worked_example() -> CnfFormula {
    let c = |lits: &[i64]| Clause::new(lits.iter().map(|&l| Literal::from_dimacs(l).unwrap()).collect());
    CnfFormula::new(
        5,
        vec![
            c(&[1, -2, -3]),
            c(&[-1, 2, -3]),
            c(&[-1, -2, 3]),
            c(&[2, -3, -4]),
            c(&[-2, -3, 4]),
            c(&[-2, -3, -4]),
            c(&[-3, 4, 5]),
            c(&[-3, -4, 5]),
            c(&[-3, -4, -5]),
        ],
    )
    .unwrap()
}
