//! Acceptance suite: every verification suite at its stated sample size and
//! tolerance, one pass/fail line per criterion (visible with --nocapture or
//! through the `verify` CLI command, which runs the same suites).

use widthlab::harness::{self, SuiteReport, VerifyConfig};

fn check(report: SuiteReport) {
    println!(
        "{} — {} ({} checks, {} failures)",
        if report.passed { "PASS" } else { "FAIL" },
        report.name,
        report.checks,
        report.failures
    );
    for note in &report.notes {
        println!("    {note}");
    }
    assert!(report.passed, "criterion failed: {}", report.name);
}

#[test]
fn criterion_1_quadratic_norm_bound() {
    check(harness::quad_bound_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_1_mutation_oversized_constant_fails() {
    let cfg =
        VerifyConfig { quad_constant: 0.5, quad_samples: 20_000, ..VerifyConfig::default() };
    let report = harness::quad_bound_suite(&cfg);
    println!(
        "PASS — mutation check: c = 1/2 produced {} violations as required",
        report.failures
    );
    assert!(!report.passed, "an oversized constant must produce violations");
}

#[test]
fn criterion_2_quadratic_infimum_oracle() {
    check(harness::quad_infimum_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_3_duality() {
    check(harness::duality_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_4_exact_cases() {
    check(harness::exact_cases_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_5_certified_sandwich() {
    check(harness::sandwich_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_6_formula_consistency() {
    check(harness::consistency_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_6_mutation_swapped_weight_fails() {
    let cfg = VerifyConfig { swap_lambda: true, ..VerifyConfig::default() };
    let report = harness::consistency_suite(&cfg);
    println!(
        "PASS — mutation check: swapped interpolation weight produced {} failures as required",
        report.failures
    );
    assert!(!report.passed, "a swapped interpolation weight must be detected");
}

#[test]
fn criterion_7_group_specialization() {
    check(harness::group_specialization_suite(&VerifyConfig::default()));
}

#[test]
fn criterion_8_sobolev_calculator() {
    check(harness::sobolev_suite(&VerifyConfig::default()));
}
