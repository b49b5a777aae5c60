//! Binary-level tests: exit-code contract, JSON report shape, generator
//! determinism, and the checker's soundness gate.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const WORKED_EXAMPLE: &str = "p cnf 5 9\n1 -2 -3 0\n-1 2 -3 0\n-1 -2 3 0\n2 -3 -4 0\n-2 -3 4 0\n-2 -3 -4 0\n-3 4 5 0\n-3 -4 5 0\n-3 -4 -5 0\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_partsat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_worked_example(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("worked.cnf");
    fs::write(&path, WORKED_EXAMPLE).unwrap();
    path
}

#[test]
fn solve_with_extract_exits_10_and_prints_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_worked_example(dir.path());
    let output = run(&["solve", path.to_str().unwrap(), "--extract"]);
    assert_eq!(output.status.code(), Some(10));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("outcome: SAT-VERIFIED"));
    let v_line = stdout
        .lines()
        .find(|l| l.starts_with("v "))
        .expect("witness line");
    assert!(v_line.ends_with(" 0"));
    assert_eq!(v_line.split_whitespace().count(), 7); // v + 5 literals + 0
}

#[test]
fn solve_unsat_exits_20() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unsat.cnf");
    fs::write(&path, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let output = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(20));
}

#[test]
fn candidate_without_extract_exits_30() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_worked_example(dir.path());
    let output = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(30));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("UNKNOWN"));
}

#[test]
fn unreadable_or_garbled_input_exits_1() {
    let output = run(&["solve", "/nonexistent/path.cnf"]);
    assert_eq!(output.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbled.cnf");
    fs::write(&path, "not a dimacs file\n").unwrap();
    let output = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8(output.stderr).unwrap().contains("error:"));
}

#[test]
fn json_report_is_schema_stable_across_flags() {
    let dir = tempfile::tempdir().unwrap();
    let sat_path = write_worked_example(dir.path());
    let unsat_path = dir.path().join("unsat.cnf");
    fs::write(&unsat_path, "p cnf 1 2\n1 0\n-1 0\n").unwrap();

    let mut keys = Vec::new();
    for (path, extra) in [
        (&sat_path, vec!["--extract"]),
        (&sat_path, vec![]),
        (&unsat_path, vec![]),
        (&sat_path, vec!["--extract", "--order", "sweep"]),
    ] {
        let mut args = vec!["solve", path.to_str().unwrap(), "--json"];
        args.extend(extra);
        let output = run(&args);
        let json: serde_json::Value =
            serde_json::from_slice(&output.stdout).expect("stdout parses as JSON");
        for field in [
            "outcome",
            "status",
            "elements",
            "edges",
            "sweeps",
            "implications",
            "bits_inserted",
            "backtracks",
            "wall_time_ms",
            "bounds",
        ] {
            assert!(json.get(field).is_some(), "missing {field}");
        }
        let mut names: Vec<String> = json.as_object().unwrap().keys().cloned().collect();
        names.sort();
        keys.push(names);
    }
    assert!(keys.windows(2).all(|w| w[0] == w[1]), "schema drifted across flags");
}

#[test]
fn sweep_order_reaches_the_same_answer() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_worked_example(dir.path());
    for order in ["worklist", "sweep", "shuffle"] {
        let output = run(&["solve", path.to_str().unwrap(), "--extract", "--order", order, "--seed", "3"]);
        assert_eq!(output.status.code(), Some(10), "order {order}");
    }
}

#[test]
fn dump_elements_prints_the_partition() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_worked_example(dir.path());
    let output = run(&["solve", path.to_str().unwrap(), "--dump-elements"]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("(1,2,3) C=0x16 R=0x16 S=0xE9"));
    assert!(stdout.contains("(3,4,5) C=0x0B R=0x0B S=0xF4"));
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let output = run(&[
            "gen",
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            "7",
            "--n",
            "10",
            "--m",
            "42",
            "--count",
            "3",
        ]);
        assert_eq!(output.status.code(), Some(0));
    }
    let manifest_a = fs::read(dir_a.path().join("manifest.txt")).unwrap();
    let manifest_b = fs::read(dir_b.path().join("manifest.txt")).unwrap();
    assert_eq!(manifest_a, manifest_b);
    assert_eq!(String::from_utf8_lossy(&manifest_a).lines().count(), 3);

    for entry in fs::read_dir(dir_a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let a = fs::read(dir_a.path().join(&name)).unwrap();
        let b = fs::read(dir_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "file {name:?} differs between runs");
    }
}

#[test]
fn check_passes_on_a_clean_battery() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "gen",
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "11",
        "--sweep",
        "--n-min",
        "4",
        "--n-max",
        "5",
        "--count",
        "2",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let manifest = dir.path().join("manifest.txt");
    let output = run(&["check", manifest.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("density"));
    assert!(stdout.contains("fp_rate"));
    assert!(stdout.contains("false_negatives=0"));
}

#[test]
fn check_flags_an_injected_false_negative() {
    // Label an oracle-UNSAT instance as expected=sat; the checker must see
    // the solver's UNSAT answer as a (simulated) false negative and fail.
    let dir = tempfile::tempdir().unwrap();
    let cnf = "p cnf 3 8\n1 2 3 0\n1 2 -3 0\n1 -2 3 0\n1 -2 -3 0\n-1 2 3 0\n-1 2 -3 0\n-1 -2 3 0\n-1 -2 -3 0\n";
    fs::write(dir.path().join("s99_n3_m8.cnf"), cnf).unwrap();
    fs::write(dir.path().join("manifest.txt"), "99 3 8 expected=sat\n").unwrap();
    let manifest = dir.path().join("manifest.txt");
    let output = run(&["check", manifest.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("FALSE NEGATIVE"));
}

#[test]
fn check_rejects_missing_instances() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("manifest.txt"), "5 4 9 expected=sat\n").unwrap();
    let manifest = dir.path().join("manifest.txt");
    let output = run(&["check", manifest.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn json_check_summary_parses() {
    let dir = tempfile::tempdir().unwrap();
    run(&[
        "gen",
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "13",
        "--n",
        "5",
        "--m",
        "21",
        "--count",
        "4",
    ]);
    let manifest = dir.path().join("manifest.txt");
    let output = run(&["check", manifest.to_str().unwrap(), "--json"]);
    let json: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    for field in ["total", "buckets", "backtrack_histogram", "candidate_on_unsat"] {
        assert!(json.get(field).is_some(), "missing {field}");
    }
}
