//! The thirteen acceptance criteria, one test each. Every test prints a
//! single PASS/FAIL line to stderr, bypassing the test harness capture.

use std::io::Write;

use csf_core::fleet::{run_criterion, FleetOptions, CRITERIA};

fn check(name: &str) {
    let out = run_criterion(name, &FleetOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
    let mut text = format!("{}  [{:.1} s]\n", out.line(), out.seconds);
    for r in out.reports.iter().filter(|r| !r.passed) {
        text.push_str(&format!("      failed check {} margin {:.3e} tol {:.3e}\n", r.name, r.margin, r.tol()));
    }
    let _ = std::io::stderr().lock().write_all(text.as_bytes());
    assert!(out.passed, "{}", out.line());
}

#[test]
fn manifest_is_complete() {
    assert_eq!(CRITERIA.len(), 13);
    for (i, c) in CRITERIA.iter().enumerate() {
        assert_eq!(c.id as usize, i + 1);
    }
}

#[test]
fn criterion_01_oracle_convergence() {
    check("oracle-convergence");
}

#[test]
fn criterion_02_circle_extinction() {
    check("circle-extinction");
}

#[test]
fn criterion_03_harnack_inequality() {
    check("harnack-inequality");
}

#[test]
fn criterion_04_harnack_parabola() {
    check("harnack-parabola");
}

#[test]
fn criterion_05_l1_growth_law() {
    check("l1-growth-law");
}

#[test]
fn criterion_06_delayed_spike_family() {
    check("delayed-spike-family");
}

#[test]
fn criterion_07_sharpness_trend() {
    check("sharpness-trend");
}

#[test]
fn criterion_08_global_height() {
    check("global-height");
}

#[test]
fn criterion_09_mass_drift() {
    check("mass-drift");
}

#[test]
fn criterion_10_measure_pipeline() {
    check("measure-pipeline");
}

#[test]
fn criterion_11_initial_trace() {
    check("initial-trace");
}

#[test]
fn criterion_12_intersections() {
    check("intersections");
}

#[test]
fn criterion_13_truncation_level() {
    check("truncation-level");
}
