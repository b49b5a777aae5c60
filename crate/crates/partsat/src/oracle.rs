//! Desk-scale ground truth: exhaustive model enumeration and a seeded
//! random 3SAT generator. Every soundness and completeness property in the
//! test suite is anchored here.

use std::fmt::Write as _;

use thiserror::Error;

use crate::formula::{Assignment, Clause, CnfFormula, FormulaError, Literal};

/// Enumeration beyond this many variables is refused outright.
pub const MAX_ORACLE_VARS: u32 = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("refusing to enumerate {0} variables (limit {MAX_ORACLE_VARS})")]
    TooManyVariables(u32),
    #[error("generator requires at least 3 variables, got {0}")]
    TooFewVariables(u32),
    #[error("generator requires at least 1 clause")]
    NoClauses,
    #[error("manifest line {0} is malformed: `{1}`")]
    BadManifestLine(usize, String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// 64-bit linear congruential stream (Knuth MMIX multiplier). The generator
/// is pinned to this exact recurrence so that batteries regenerate
/// byte-identically across runs and reimplementations:
///
///   state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
///
/// `next_u64` returns the updated state; `next_below(k)` reduces the upper
/// 32 bits modulo `k`.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    const MULTIPLIER: u64 = 6364136223846793005;
    const INCREMENT: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    /// Per-instance stream: `base XOR (index+1) * 0x9E3779B97F4A7C15`, then
    /// one warm-up step so nearby indices decorrelate.
    pub fn split(base_seed: u64, index: u64) -> Self {
        let mut rng = Lcg64::new(base_seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15));
        rng.next_u64();
        rng
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(Self::MULTIPLIER)
            .wrapping_add(Self::INCREMENT);
        self.state
    }

    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        (self.next_u64() >> 32) % bound
    }
}

/// The full satisfying set of a formula, materialized as variable bitmasks
/// (bit `v-1` holds variable `v`).
#[derive(Debug, Clone)]
pub struct ModelSet {
    num_vars: u32,
    models: Vec<u32>,
}

impl ModelSet {
    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn count(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn contains_bits(&self, bits: u32) -> bool {
        self.models.binary_search(&bits).is_ok()
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        let mut bits = 0u32;
        for (i, &v) in a.values().iter().enumerate().take(self.num_vars as usize) {
            if v {
                bits |= 1 << i;
            }
        }
        self.contains_bits(bits)
    }

    pub fn bits(&self) -> &[u32] {
        &self.models
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.models.iter().map(|&bits| Assignment::from_bits(bits, self.num_vars))
    }
}

/// Exact model set by full 2^n enumeration. Clause evaluation uses bitmask
/// arithmetic, deliberately independent of `verify_assignment`.
pub fn enumerate_models(f: &CnfFormula) -> Result<ModelSet, OracleError> {
    let n = f.num_vars();
    if n > MAX_ORACLE_VARS {
        return Err(OracleError::TooManyVariables(n));
    }
    // Clause satisfied by bits `a` iff it has a positive literal set in `a`
    // or a negative literal clear in `a`.
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|clause| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for lit in clause.literals() {
                let bit = 1u32 << (lit.var() - 1);
                if lit.negated() {
                    neg |= bit;
                } else {
                    pos |= bit;
                }
            }
            (pos, neg)
        })
        .collect();

    let mut models = Vec::new();
    for bits in 0..(1u64 << n) {
        let bits = bits as u32;
        if masks.iter().all(|&(pos, neg)| (bits & pos) != 0 || (!bits & neg) != 0) {
            models.push(bits);
        }
    }
    Ok(ModelSet { num_vars: n, models })
}

/// Parameters for one random 3SAT instance. Identical configs generate
/// identical formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub num_vars: u32,
    pub num_clauses: usize,
}

impl GeneratorConfig {
    pub fn new(seed: u64, num_vars: u32, num_clauses: usize) -> Self {
        GeneratorConfig {
            seed,
            num_vars,
            num_clauses,
        }
    }
}

/// Uniform random 3SAT: each clause draws 3 distinct variables (rejection
/// sampling) and 3 independent polarities from the seeded stream.
pub fn gen_random_3sat(cfg: &GeneratorConfig) -> Result<CnfFormula, OracleError> {
    if cfg.num_vars < 3 {
        return Err(OracleError::TooFewVariables(cfg.num_vars));
    }
    if cfg.num_clauses == 0 {
        return Err(OracleError::NoClauses);
    }
    let mut rng = Lcg64::new(cfg.seed);
    let mut clauses = Vec::with_capacity(cfg.num_clauses);
    for _ in 0..cfg.num_clauses {
        let mut vars = [0u32; 3];
        let mut filled = 0;
        while filled < 3 {
            let v = 1 + rng.next_below(u64::from(cfg.num_vars)) as u32;
            if !vars[..filled].contains(&v) {
                vars[filled] = v;
                filled += 1;
            }
        }
        let lits = vars
            .iter()
            .map(|&v| Literal::new(v, rng.next_below(2) == 1))
            .collect();
        clauses.push(Clause::new(lits));
    }
    Ok(CnfFormula::new(cfg.num_vars, clauses)?)
}

/// One oracle-labeled battery entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifestEntry {
    pub seed: u64,
    pub num_vars: u32,
    pub num_clauses: usize,
    pub expected_sat: bool,
}

impl ManifestEntry {
    pub fn instance_file_name(&self) -> String {
        format!("s{}_n{}_m{}.cnf", self.seed, self.num_vars, self.num_clauses)
    }
}

/// Serialize manifest lines: `seed n m expected={sat|unsat}`.
pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(
            out,
            "{} {} {} expected={}",
            e.seed,
            e.num_vars,
            e.num_clauses,
            if e.expected_sat { "sat" } else { "unsat" }
        );
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, OracleError> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let bad = || OracleError::BadManifestLine(idx + 1, trimmed.to_string());
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(bad());
        }
        let seed = fields[0].parse().map_err(|_| bad())?;
        let num_vars = fields[1].parse().map_err(|_| bad())?;
        let num_clauses = fields[2].parse().map_err(|_| bad())?;
        let expected_sat = match fields[3] {
            "expected=sat" => true,
            "expected=unsat" => false,
            _ => return Err(bad()),
        };
        entries.push(ManifestEntry {
            seed,
            num_vars,
            num_clauses,
            expected_sat,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_dimacs, worked_example};

    #[test]
    fn contradiction_has_no_models() {
        let f = parse_dimacs("p cnf 1 2\n1 0\n-1 0\n").unwrap();
        assert_eq!(enumerate_models(&f).unwrap().count(), 0);
    }

    #[test]
    fn empty_formula_has_all_models() {
        let f = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(enumerate_models(&f).unwrap().count(), 8);
    }

    #[test]
    fn worked_example_model_set() {
        let models = enumerate_models(&worked_example()).unwrap();
        assert_eq!(models.count(), 13);
        assert!(models.contains(&Assignment::new(vec![false; 5])));
        assert!(models.contains(&Assignment::new(vec![true, false, false, false, false])));
    }

    #[test]
    fn oracle_refuses_large_formulas() {
        let f = CnfFormula::new(26, vec![]).unwrap();
        assert_eq!(
            enumerate_models(&f).unwrap_err(),
            OracleError::TooManyVariables(26)
        );
    }

    #[test]
    fn generator_is_deterministic() {
        let cfg = GeneratorConfig::new(99, 8, 34);
        let a = gen_random_3sat(&cfg).unwrap();
        let b = gen_random_3sat(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.clauses().len(), 34);
    }

    #[test]
    fn generator_with_three_vars_uses_the_only_triple() {
        let cfg = GeneratorConfig::new(5, 3, 10);
        let f = gen_random_3sat(&cfg).unwrap();
        for clause in f.clauses() {
            assert_eq!(clause.distinct_vars().into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
        }
    }

    #[test]
    fn generator_never_emits_tautologies_or_repeats() {
        for seed in 0..50 {
            let f = gen_random_3sat(&GeneratorConfig::new(seed, 6, 25)).unwrap();
            assert_eq!(f.stats().tautologies_dropped, 0);
            for clause in f.clauses() {
                assert_eq!(clause.distinct_vars().len(), 3);
            }
        }
    }

    #[test]
    fn generator_rejects_bad_configs() {
        assert!(gen_random_3sat(&GeneratorConfig::new(1, 2, 5)).is_err());
        assert!(gen_random_3sat(&GeneratorConfig::new(1, 4, 0)).is_err());
    }

    #[test]
    fn manifest_roundtrip() {
        let entries = vec![
            ManifestEntry {
                seed: 7,
                num_vars: 10,
                num_clauses: 42,
                expected_sat: true,
            },
            ManifestEntry {
                seed: 8,
                num_vars: 5,
                num_clauses: 30,
                expected_sat: false,
            },
        ];
        let text = write_manifest(&entries);
        assert_eq!(text, "7 10 42 expected=sat\n8 5 30 expected=unsat\n");
        assert_eq!(parse_manifest(&text).unwrap(), entries);
    }

    #[test]
    fn manifest_rejects_garbage() {
        assert!(parse_manifest("7 10 expected=sat\n").is_err());
        assert!(parse_manifest("7 10 42 expected=maybe\n").is_err());
    }
}
