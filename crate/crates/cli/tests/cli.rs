//! End-to-end tests driving the compiled binary: JSON documents, CSV
//! shapes, exit codes, configuration plumbing, and byte-level determinism.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_estermann"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_text(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

fn json_doc(output: &Output) -> Value {
    serde_json::from_str(&stdout_text(output)).expect("one JSON document")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn dedekind_document_is_exact_and_stamped() {
    let out = run(&["eval", "dedekind", "--a", "1", "--q", "3"]);
    assert_eq!(code(&out), 0);
    let doc = json_doc(&out);
    assert_eq!(doc["value"], "1/18");
    assert_eq!(doc["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn cf_document_uses_the_trailing_one_convention() {
    let out = run(&["eval", "cf", "--a", "5", "--q", "7"]);
    assert_eq!(code(&out), 0);
    let doc = json_doc(&out);
    assert_eq!(doc["quotients"], serde_json::json!([1, 2, 1]));
    assert_eq!(doc["trailing_one"], serde_json::json!(true));
    assert_eq!(doc["depth"], serde_json::json!(3));
}

#[test]
fn estermann_document_matches_the_reference_value() {
    let out = run(&["eval", "estermann", "--s", "0.5", "--a", "1", "--q", "5"]);
    assert_eq!(code(&out), 0);
    let doc = json_doc(&out);
    let re = doc["value"]["re"].as_f64().unwrap();
    let im = doc["value"]["im"].as_f64().unwrap();
    assert!((re - 1.348_065_060_868_430_2).abs() < 1e-9, "re {re}");
    assert!((im - 0.704_791_335_808_374_6).abs() < 1e-9, "im {im}");
}

#[test]
fn lvalue_table_has_one_entry_per_character() {
    let out = run(&["eval", "lvalue", "--q", "7"]);
    assert_eq!(code(&out), 0);
    let doc = json_doc(&out);
    assert_eq!(doc["count"], serde_json::json!(6));
    assert_eq!(doc["values"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_axe_passes_and_reports_per_residue() {
    let out = run(&["verify", "axe", "--q", "11"]);
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "suite,case,residual,bound,pass");
    assert_eq!(lines.len(), 11, "header plus ten residues");
    for line in &lines[1..] {
        assert!(line.starts_with("axe,"), "{line}");
        assert!(line.ends_with(",true"), "{line}");
    }
}

#[test]
fn verify_gfar_small_trial_count_passes() {
    let out = run(&["verify", "gfar", "--trials", "3"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn study_tinc_reports_both_signs_per_prime() {
    let out = run(&["study", "tinc", "--primes", "101,1009"]);
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5, "header plus 2 primes x 2 signs: {text}");
    assert!(lines[1].starts_with("tinc,101,3,1,+,"));
    assert!(lines[2].starts_with("tinc,101,3,1,-,"));
    assert!(lines[3].starts_with("tinc,1009,3,1,+,"));
    // the ratio column is populated: split and check field 10 (ratio_re)
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert!(!fields[10].is_empty() && fields[10].parse::<f64>().is_ok());
}

#[test]
fn study_json_format_carries_rows_and_stamp() {
    let out = run(&["study", "fourth-moment", "--primes", "101", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc = json_doc(&out);
    assert_eq!(doc["study"], "fourth-moment");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["q"], serde_json::json!(101));
    assert!(rows[0]["ratio"]["re"].as_f64().unwrap() > 0.0);
    assert!(rows[0].get("elapsed").is_none(), "no timing column by default");
    assert!(doc["config_hash"].is_string());
}

#[test]
fn config_file_supplies_primes_and_unknown_keys_are_fatal() {
    let dir = tempfile::tempdir().unwrap();

    let empty = dir.path().join("empty.json");
    std::fs::File::create(&empty)
        .unwrap()
        .write_all(b"{\"primes\": []}")
        .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_estermann"))
        .args(["study", "tinc", "--config", empty.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_text(&out).lines().count(), 1, "header only");

    let bad = dir.path().join("bad.json");
    std::fs::File::create(&bad)
        .unwrap()
        .write_all(b"{\"primos\": [101]}")
        .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_estermann"))
        .args(["study", "tinc", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid config"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::File::create(&cfg)
        .unwrap()
        .write_all(b"{\"primes\": [101], \"timings\": true}")
        .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_estermann"))
        .args(["study", "tinc", "--config", cfg.to_str().unwrap(), "--primes", "11", "--sign", "+"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].ends_with(",elapsed"), "config timings honored: {}", lines[0]);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("tinc,11,"), "primes flag wins: {}", lines[1]);
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &["study", "tinc", "--primes", "101", "--format", "json"][..],
        &["verify", "weil", "--lmax", "12", "--trials", "3"][..],
        &["eval", "lvalue", "--q", "11"][..],
    ] {
        let first = run(args);
        let second = run(args);
        assert_eq!(code(&first), 0);
        assert_eq!(first.stdout, second.stdout, "args {args:?}");
    }
}

#[test]
fn seed_changes_random_suites_but_not_their_verdict() {
    let base = run(&["verify", "weil", "--lmax", "10", "--trials", "2"]);
    let seeded = run(&["verify", "weil", "--lmax", "10", "--trials", "2", "--seed", "9"]);
    assert_eq!(code(&base), 0);
    assert_eq!(code(&seeded), 0);
    assert_ne!(base.stdout, seeded.stdout);
}

#[test]
fn output_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_estermann"))
        .args(["verify", "beta", "--output", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("suite,case,residual,bound,pass\n"));
    assert!(text.lines().count() > 4);
}

#[test]
fn argument_errors_exit_two() {
    let missing = run(&["eval", "dedekind", "--q", "3"]);
    assert_eq!(code(&missing), 2);

    let unknown = run(&["study", "nonsense"]);
    assert_eq!(code(&unknown), 2);

    let bad_complex = run(&["eval", "estermann", "--s", "fish", "--a", "1", "--q", "5"]);
    assert_eq!(code(&bad_complex), 2);

    let bad_modulus = run(&["eval", "lvalue", "--q", "12"]);
    assert_eq!(code(&bad_modulus), 2);
}

#[test]
fn study_where_every_prime_fails_exits_one() {
    let out = run(&["study", "fourth-moment", "--primes", "100"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_text(&out).lines().count(), 1, "header only");
    assert!(String::from_utf8_lossy(&out.stderr).contains("every prime failed"));
}

#[test]
fn verify_failure_exits_one_with_the_case_on_stderr() {
    // q = 12 is not prime: every residue errors, each an infinite residual
    let out = run(&["verify", "axe", "--q", "12"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("verify axe"), "stderr: {err}");
    assert!(stdout_text(&out).lines().count() > 1, "cases still reported");
}
