//! Command implementations behind the binary: solve a DIMACS file, generate
//! oracle-labeled instance batteries, and cross-check a battery end to end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::extract::{SolveOutcome, VertexOrder};
use crate::formula::parse_dimacs;
use crate::oracle::{
    enumerate_models, gen_random_3sat, parse_manifest, write_manifest, GeneratorConfig, Lcg64,
    ManifestEntry, OracleError,
};
use crate::propagate::OrderMode;
use crate::solver::{prepare, solve_formula, SolveConfig, SolveError, SolveRun};

/// Exit codes for `solve`: what is proven, nothing more.
pub const EXIT_SAT_VERIFIED: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 30;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_SOUNDNESS_VIOLATION: i32 = 2;

/// Density grid used by sweep-mode generation.
pub const DENSITY_GRID: [f64; 6] = [2.0, 3.0, 4.0, 4.26, 5.0, 6.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Parse(#[from] crate::formula::FormulaError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("instance `{0}` referenced by manifest is missing or unreadable")]
    MissingInstance(PathBuf),
    #[error("instance `{path}` does not match its manifest line ({detail})")]
    InstanceMismatch { path: PathBuf, detail: String },
    #[error("gen needs either --sweep or both --n and --m")]
    IncompleteGenArgs,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub extract: bool,
    pub json: bool,
    pub order: OrderMode,
    pub vertex_order: VertexOrder,
    pub max_backtracks: u64,
    pub dump_elements: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            extract: false,
            json: false,
            order: OrderMode::WorklistFifo,
            vertex_order: VertexOrder::AscendingKey,
            max_backtracks: 10_000,
            dump_elements: false,
        }
    }
}

fn print_text_report(run: &SolveRun) {
    let r = &run.report;
    println!("outcome: {}", r.outcome);
    if let Some(reason) = &r.unknown_reason {
        println!("reason: {reason}");
    }
    println!("status: {} (fixpoint)", r.status);
    println!(
        "vars={} reduced_vars={} clauses={} tautologies_dropped={}",
        r.num_vars, r.reduced_vars, r.clauses, r.tautologies_dropped
    );
    println!(
        "elements={} short_elements={} padding_vars={} edges={} max_degree={}",
        r.elements, r.short_elements, r.padding_vars, r.edges, r.max_degree
    );
    println!(
        "sweeps={} implications={} initial_bits={} bits_inserted={} backtracks={} pins={}",
        r.sweeps, r.implications, r.initial_bits, r.bits_inserted, r.backtracks, r.pins
    );
    println!(
        "bounds: bits<=8*|D| {}; |D|<=C(n,3)+short {}; implications bound {}",
        pass_fail(r.bounds.bits_within_capacity),
        pass_fail(r.bounds.elements_within_bound),
        pass_fail(r.bounds.implications_within_bound)
    );
    if let Some(witness) = &r.witness {
        let lits: Vec<String> = witness.iter().map(|l| l.to_string()).collect();
        println!("v {} 0", lits.join(" "));
    }
    println!("wall_time_ms={:.3}", r.wall_time_ms);
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Solve one DIMACS file; the returned code is the process exit code.
pub fn cmd_solve(path: &Path, options: &SolveOptions) -> Result<i32, CliError> {
    let text = fs::read_to_string(path)?;
    let formula = parse_dimacs(&text)?;
    if options.dump_elements {
        let (_, partition, _) = prepare(&formula)?;
        print!("{}", partition.dump());
    }
    let config = SolveConfig {
        order: options.order,
        vertex_order: options.vertex_order,
        extract: options.extract,
        max_backtracks: options.max_backtracks,
    };
    let run = solve_formula(&formula, &config)?;
    if options.json {
        println!("{}", serde_json::to_string_pretty(&run.report).expect("report serializes"));
    } else {
        print_text_report(&run);
    }
    Ok(match run.outcome {
        SolveOutcome::SatVerified(_) => EXIT_SAT_VERIFIED,
        SolveOutcome::Unsat => EXIT_UNSAT,
        SolveOutcome::Unknown(_) => EXIT_UNKNOWN,
    })
}

#[derive(Debug, Clone)]
pub struct GenOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub num_vars: Option<u32>,
    pub num_clauses: Option<usize>,
    pub count: usize,
    /// Emit the full density grid over `n_min..=n_max` instead of one cell.
    pub sweep: bool,
    pub n_min: u32,
    pub n_max: u32,
}

/// Generate instances plus an oracle-labeled manifest. Instance seeds come
/// from one seeded stream, so regeneration is byte-identical.
pub fn cmd_gen(options: &GenOptions) -> Result<Vec<ManifestEntry>, CliError> {
    let mut cells: Vec<(u32, usize)> = Vec::new();
    if options.sweep {
        for n in options.n_min..=options.n_max {
            for density in DENSITY_GRID {
                let m = ((f64::from(n) * density).round() as usize).max(1);
                cells.push((n, m));
            }
        }
    } else {
        let (Some(n), Some(m)) = (options.num_vars, options.num_clauses) else {
            return Err(CliError::IncompleteGenArgs);
        };
        cells.push((n, m));
    }

    fs::create_dir_all(&options.out_dir)?;
    let mut seed_stream = Lcg64::new(options.seed);
    let mut entries = Vec::new();
    for (n, m) in cells {
        for _ in 0..options.count {
            let instance_seed = seed_stream.next_u64();
            let formula = gen_random_3sat(&GeneratorConfig::new(instance_seed, n, m))?;
            let expected_sat = !enumerate_models(&formula)?.is_empty();
            let entry = ManifestEntry {
                seed: instance_seed,
                num_vars: n,
                num_clauses: m,
                expected_sat,
            };
            fs::write(options.out_dir.join(entry.instance_file_name()), formula.to_dimacs())?;
            entries.push(entry);
        }
    }
    fs::write(options.out_dir.join("manifest.txt"), write_manifest(&entries))?;
    Ok(entries)
}

/// Roll-up of one battery cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub total: usize,
    pub expected_sat: usize,
    pub expected_unsat: usize,
    /// Solver said UNSAT on an oracle-SAT instance. Must stay empty.
    pub false_negatives: Vec<String>,
    /// Solver reported SAT on an oracle-UNSAT instance, or an unverifiable
    /// witness. Must stay empty.
    pub unverified_sat: Vec<String>,
    pub sat_verified: usize,
    pub unknown_on_sat: usize,
    /// Oracle-UNSAT instances the fixpoint failed to refute, by final fate.
    pub candidate_on_unsat: usize,
    pub candidate_unsat_ended_unknown: usize,
    pub candidate_unsat_reclassified_unsat: usize,
    pub buckets: Vec<DensityBucket>,
    pub backtrack_histogram: Vec<(String, usize)>,
}

/// Heuristic quality per clause density m/n.
#[derive(Debug, Clone, Serialize)]
pub struct DensityBucket {
    pub density: String,
    pub instances: usize,
    pub unsat_instances: usize,
    /// Part A said candidate although the oracle proves UNSAT.
    pub false_positive_candidates: usize,
    /// false_positive_candidates / unsat_instances (0 when no UNSAT mass).
    pub false_positive_rate: f64,
}

impl CheckSummary {
    pub fn is_sound(&self) -> bool {
        self.false_negatives.is_empty() && self.unverified_sat.is_empty()
    }
}

struct InstanceResult {
    entry: ManifestEntry,
    run: SolveRun,
    witness_ok: bool,
}

/// Run the solver over every manifest instance, enforce the soundness
/// gates, and measure the fixpoint's false-positive behavior per density.
pub fn run_check(manifest_path: &Path, dir: &Path) -> Result<CheckSummary, CliError> {
    let manifest_text = fs::read_to_string(manifest_path)?;
    let entries = parse_manifest(&manifest_text)?;

    let results: Result<Vec<InstanceResult>, CliError> = entries
        .par_iter()
        .map(|entry| {
            let path = dir.join(entry.instance_file_name());
            let text = fs::read_to_string(&path).map_err(|_| CliError::MissingInstance(path.clone()))?;
            let formula = parse_dimacs(&text).map_err(|e| CliError::InstanceMismatch {
                path: path.clone(),
                detail: e.to_string(),
            })?;
            if formula.num_vars() != entry.num_vars
                || formula.stats().declared_clauses != Some(entry.num_clauses)
            {
                return Err(CliError::InstanceMismatch {
                    path,
                    detail: format!(
                        "expected n={} m={}, file declares n={} m={:?}",
                        entry.num_vars,
                        entry.num_clauses,
                        formula.num_vars(),
                        formula.stats().declared_clauses
                    ),
                });
            }
            let budget = 1u64 << entry.num_vars.min(20);
            let config = SolveConfig {
                extract: true,
                max_backtracks: budget,
                ..SolveConfig::default()
            };
            let run = solve_formula(&formula, &config)?;
            let witness_ok = match &run.outcome {
                SolveOutcome::SatVerified(witness) => {
                    crate::formula::verify_assignment(&formula, witness).unwrap_or(false)
                }
                _ => true,
            };
            Ok(InstanceResult {
                entry: *entry,
                run,
                witness_ok,
            })
        })
        .collect();
    let results = results?;

    let mut summary = CheckSummary {
        total: results.len(),
        expected_sat: 0,
        expected_unsat: 0,
        false_negatives: Vec::new(),
        unverified_sat: Vec::new(),
        sat_verified: 0,
        unknown_on_sat: 0,
        candidate_on_unsat: 0,
        candidate_unsat_ended_unknown: 0,
        candidate_unsat_reclassified_unsat: 0,
        buckets: Vec::new(),
        backtrack_histogram: Vec::new(),
    };
    let mut buckets: BTreeMap<String, DensityBucket> = BTreeMap::new();
    let mut histogram = [0usize; 5];
    for result in &results {
        let entry = &result.entry;
        let name = entry.instance_file_name();
        let density = format!("{:.2}", entry.num_clauses as f64 / f64::from(entry.num_vars));
        let bucket = buckets.entry(density.clone()).or_insert_with(|| DensityBucket {
            density,
            instances: 0,
            unsat_instances: 0,
            false_positive_candidates: 0,
            false_positive_rate: 0.0,
        });
        bucket.instances += 1;

        let is_sat_outcome = matches!(result.run.outcome, SolveOutcome::SatVerified(_));
        let is_unsat_outcome = matches!(result.run.outcome, SolveOutcome::Unsat);
        let fixpoint_candidate = result.run.report.status == "candidate";

        if entry.expected_sat {
            summary.expected_sat += 1;
            if is_unsat_outcome {
                summary.false_negatives.push(name.clone());
            }
            if is_sat_outcome {
                summary.sat_verified += 1;
            } else if !is_unsat_outcome {
                summary.unknown_on_sat += 1;
            }
        } else {
            summary.expected_unsat += 1;
            bucket.unsat_instances += 1;
            if is_sat_outcome {
                summary.unverified_sat.push(name.clone());
            }
            if fixpoint_candidate {
                bucket.false_positive_candidates += 1;
                summary.candidate_on_unsat += 1;
                if is_unsat_outcome {
                    summary.candidate_unsat_reclassified_unsat += 1;
                } else if !is_sat_outcome {
                    summary.candidate_unsat_ended_unknown += 1;
                }
            }
        }
        if is_sat_outcome && !result.witness_ok {
            summary.unverified_sat.push(name);
        }

        let b = result.run.report.backtracks;
        let slot = match b {
            0 => 0,
            1..=10 => 1,
            11..=100 => 2,
            101..=1000 => 3,
            _ => 4,
        };
        histogram[slot] += 1;
    }
    for bucket in buckets.values_mut() {
        bucket.false_positive_rate = if bucket.unsat_instances == 0 {
            0.0
        } else {
            bucket.false_positive_candidates as f64 / bucket.unsat_instances as f64
        };
    }
    summary.buckets = buckets.into_values().collect();
    summary.backtrack_histogram = ["0", "1-10", "11-100", "101-1000", ">1000"]
        .iter()
        .zip(histogram)
        .map(|(label, count)| (label.to_string(), count))
        .collect();
    Ok(summary)
}

pub fn print_check_summary(summary: &CheckSummary) {
    println!(
        "checked {} instances ({} sat, {} unsat by oracle)",
        summary.total, summary.expected_sat, summary.expected_unsat
    );
    println!(
        "soundness: false_negatives={} unverified_sat={}",
        summary.false_negatives.len(),
        summary.unverified_sat.len()
    );
    println!(
        "sat_verified={} unknown_on_sat={}",
        summary.sat_verified, summary.unknown_on_sat
    );
    println!(
        "candidate_on_unsat={} (ended unknown={}, reclassified unsat by exhaustion={})",
        summary.candidate_on_unsat,
        summary.candidate_unsat_ended_unknown,
        summary.candidate_unsat_reclassified_unsat
    );
    println!("density  instances  unsat  fp_candidates  fp_rate");
    for bucket in &summary.buckets {
        println!(
            "{:>7}  {:>9}  {:>5}  {:>13}  {:>7.4}",
            bucket.density,
            bucket.instances,
            bucket.unsat_instances,
            bucket.false_positive_candidates,
            bucket.false_positive_rate
        );
    }
    println!("backtracks histogram:");
    for (label, count) in &summary.backtrack_histogram {
        println!("  {label:>8}: {count}");
    }
    for name in &summary.false_negatives {
        println!("FALSE NEGATIVE: {name}");
    }
    for name in &summary.unverified_sat {
        println!("UNSOUND SAT CLAIM: {name}");
    }
}

/// Check a battery; nonzero exit on any soundness violation.
pub fn cmd_check(manifest_path: &Path, dir: Option<&Path>, json: bool) -> Result<i32, CliError> {
    let dir = dir
        .map(Path::to_path_buf)
        .or_else(|| manifest_path.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let summary = run_check(manifest_path, &dir)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    } else {
        print_check_summary(&summary);
    }
    Ok(if summary.is_sound() {
        0
    } else {
        EXIT_SOUNDNESS_VIOLATION
    })
}
