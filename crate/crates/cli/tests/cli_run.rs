//! Integration tests for the command layer and the binary itself.

use hamkit::commands::{run, run_reproduce, Command, RunOptions, REPRODUCE_CONFIG};
use hamkit::config::parse_config;
use hamkit::report::render_text;
use std::process::Command as Process;

const EXAMPLE_CONFIG: &str = REPRODUCE_CONFIG;

#[test]
fn certify_command_reports_a_satisfied_certificate() {
    let outcome = run(Command::Certify, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let report = &outcome.report;
    assert!(report.assertion_holds);
    let cert = report.certificate.as_ref().unwrap();
    assert!(cert.satisfied);
    assert!(report.split_check.as_ref().unwrap().passed);
    assert!(report.corollary.as_ref().unwrap().passed);
    assert!(outcome.solution.is_none());
}

#[test]
fn certify_command_rejects_oversized_growth() {
    // f_up ≡ 100 violates condition (2): 100 > 384/5.
    let config = EXAMPLE_CONFIG.replace("f_up = 1 + x/2", "f_up = 100");
    let outcome = run(Command::Certify, &config, &RunOptions::default()).unwrap();
    assert!(!outcome.report.assertion_holds);
    let cert = outcome.report.certificate.as_ref().unwrap();
    assert!(!cert.satisfied);
    assert!(cert.margins[1] < 0.0);
}

#[test]
fn hypotheses_command_passes_the_symmetric_required_set() {
    let outcome = run(Command::Hypotheses, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let report = &outcome.report;
    assert!(report.assertion_holds);
    let hyp = report.hypotheses.as_ref().unwrap();
    assert!(hyp.required_pass);
    // H2 fails for this kernel but is not required by the symmetric variant.
    let h2 = hyp
        .reports
        .iter()
        .find(|r| r.hypothesis == hamkit_core::hypotheses::Hypothesis::H2)
        .unwrap();
    assert!(!h2.passed && h2.witness.is_some());
}

#[test]
fn hypotheses_command_fails_the_general_required_set_on_this_kernel() {
    let config = EXAMPLE_CONFIG.replace("variant = symmetric", "variant = general");
    let outcome = run(Command::Hypotheses, &config, &RunOptions::default()).unwrap();
    assert!(!outcome.report.assertion_holds);
}

#[test]
fn solve_command_produces_solution_and_validation() {
    let outcome = run(Command::Solve, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let report = &outcome.report;
    assert!(report.assertion_holds);
    assert!(report.solution.as_ref().unwrap().converged);
    assert!(report.validation.as_ref().unwrap().membership.passed);
    let result = outcome.solution.as_ref().unwrap();
    assert!(result.residual <= 1e-10);
}

#[test]
fn report_config_echo_round_trips() {
    let outcome = run(Command::Certify, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let original = parse_config(EXAMPLE_CONFIG).unwrap();
    let echoed = parse_config(&outcome.report.config).unwrap();
    assert_eq!(original, echoed);
}

#[test]
fn report_serializes_to_json_with_exact_rationals() {
    let outcome = run(Command::Certify, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let json = outcome.report.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["tool"], "hamkit");
    assert_eq!(value["thresholds"]["exact"]["i2"], "5/384");
    assert_eq!(value["thresholds"]["exact"]["i3"], "277/49152");
    assert_eq!(value["certificate"]["exact_bounds"][1], "384/5");
    assert_eq!(value["certificate"]["exact_bounds"][2], "12288/277");
    // Stable key order: two serializations agree byte for byte.
    assert_eq!(json, outcome.report.to_json());
}

#[test]
fn text_report_renders_every_section() {
    let outcome = run_reproduce(&RunOptions::default()).unwrap();
    let text = render_text(&outcome.report);
    for needle in [
        "kernel hypotheses",
        "thresholds",
        "certificate",
        "corollary relations",
        "solution validation",
        "pinned reproduction checks",
        "primary assertion: PASS",
    ] {
        assert!(text.contains(needle), "missing section: {needle}");
    }
}

#[test]
fn exit_status_is_a_pure_function_of_the_report() {
    let sat = run(Command::Certify, EXAMPLE_CONFIG, &RunOptions::default()).unwrap();
    let config = EXAMPLE_CONFIG.replace("f_up = 1 + x/2", "f_up = 100");
    let unsat = run(Command::Certify, &config, &RunOptions::default()).unwrap();
    assert!(sat.report.assertion_holds);
    assert!(!unsat.report.assertion_holds);
}

fn hamkit_binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_hamkit"))
}

#[test]
fn binary_reproduce_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let output = hamkit_binary()
        .args(["reproduce", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("reproduction PASS"));
    for file in ["report.txt", "report.json", "solution.tsv", "residuals.tsv"] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    // Solution table: two tab-separated columns, 17 significant digits.
    let table = std::fs::read_to_string(dir.path().join("solution.tsv")).unwrap();
    let first_row = table.lines().nth(1).unwrap();
    let fields: Vec<&str> = first_row.split('\t').collect();
    assert_eq!(fields.len(), 2);
    assert!(fields[1].contains('e'));
    let mantissa = fields[1].split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 17);
}

#[test]
fn binary_certify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(&good, EXAMPLE_CONFIG).unwrap();
    let status = hamkit_binary()
        .args(["certify", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));

    let bad = dir.path().join("unsat.cfg");
    std::fs::write(&bad, EXAMPLE_CONFIG.replace("f_up = 1 + x/2", "f_up = 100")).unwrap();
    let status = hamkit_binary()
        .args(["certify", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn binary_rejects_broken_configs_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.cfg");
    std::fs::write(&broken, "[problem]\nvariant = sideways\n").unwrap();
    let output = hamkit_binary()
        .args(["certify", "--config"])
        .arg(&broken)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error"));

    let output = hamkit_binary()
        .args(["certify", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn binary_reports_parse_errors_with_positions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("badexpr.cfg");
    std::fs::write(
        &cfg,
        EXAMPLE_CONFIG.replace("f_up = 1 + x/2", "f_up = exp(-x) + sin("),
    )
    .unwrap();
    let output = hamkit_binary()
        .args(["certify", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("unclosed"), "stderr: {stderr}");
}
