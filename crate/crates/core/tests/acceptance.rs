//! Acceptance suite: every numbered criterion runs at its pinned tolerance
//! and prints one pass/fail line (visible with `cargo test -- --nocapture`).

use std::time::Instant;

use orbitflux::flow::IntegratorConfig;
use orbitflux::verify::{self, CheckResult};

fn report(criterion: &str, checks: &[CheckResult]) -> bool {
    let ok = verify::all_pass(checks);
    println!(
        "acceptance {criterion}: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    for c in checks {
        let op = match c.op {
            verify::Comparison::Le => "<=",
            verify::Comparison::Ge => ">=",
            verify::Comparison::Gt => ">",
        };
        println!(
            "    [{}] {}: {:.3e} {} {:.3e} ({})",
            if c.pass { "ok" } else { "FAIL" },
            c.id,
            c.measured,
            op,
            c.tolerance,
            c.description
        );
    }
    ok
}

#[test]
fn criterion_01_identity_suite() {
    let start = Instant::now();
    let checks = verify::identity_suite(42, 10_000, 1_000, None).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = report("criterion 1 (identity suite)", &checks);
    println!("    runtime {elapsed:.2} s (budget 5 s)");
    assert!(ok, "{checks:#?}");
    assert!(elapsed < 5.0, "identity suite took {elapsed:.2} s");
}

#[test]
fn criterion_02_descent_suite() {
    let checks = verify::descent_suite(42, 2, 100, 1e-12, false).unwrap();
    assert!(
        report("criterion 2 (descent suite)", &checks),
        "{checks:#?}"
    );
}

#[test]
fn criterion_03_and_04_periods() {
    let cfg = IntegratorConfig::default();
    let checks = verify::period_suite(&cfg).unwrap();
    assert!(
        report("criteria 3-4 (W and X periods)", &checks),
        "{checks:#?}"
    );
}

#[test]
fn criterion_05_length_blowup() {
    let cfg = IntegratorConfig::default();
    let suite = verify::length_suite(&cfg).unwrap();
    let ok = report("criterion 5 (length blow-up)", &suite.checks);
    for row in &suite.rows {
        println!(
            "    u = {:.3}: T = {:.4}, length = {:.4}",
            row.u, row.period, row.length
        );
    }
    assert!(ok, "{:#?}", suite.checks);
}

#[test]
fn criterion_06_stokes_with_refinement() {
    let cfg = IntegratorConfig::default();
    let suite = verify::flux_suite(0.3, 0.5, 200, 400, &cfg, true, "shallow").unwrap();
    let ok = report("criterion 6 (Stokes residual and order)", &suite.checks);
    println!(
        "    flux {:.6}, boundary difference {:.6}",
        suite.report.flux,
        suite.report.boundary_end - suite.report.boundary_start
    );
    assert!(ok, "{:#?}", suite.checks);
}

#[test]
fn criterion_07_normalized_flux() {
    let cfg = IntegratorConfig::default();
    let suite = verify::flux_suite(0.5, 0.05, 256, 64, &cfg, false, "deep").unwrap();
    let ok = report("criterion 7 (normalized flux near 2π)", &suite.checks);
    println!(
        "    normalized flux {:.6} vs 2π = {:.6} (n = {})",
        suite.report.normalized_flux,
        2.0 * std::f64::consts::PI,
        suite.report.normalization
    );
    assert!(
        suite
            .checks
            .iter()
            .any(|c| c.id.ends_with("normalized-two-pi")),
        "deep scan must include the 2π check"
    );
    assert!(ok, "{:#?}", suite.checks);
}

#[test]
fn criterion_08_strongly_adapted_probe() {
    let checks = verify::adapted_suite(42, 1_000, 1e-8).unwrap();
    assert!(
        report("criterion 8 (strongly-adapted probe)", &checks),
        "{checks:#?}"
    );
}

#[test]
fn criterion_09_wadsley_pipeline() {
    let checks = verify::wadsley_pipeline_suite(42, 64, 100).unwrap();
    assert!(
        report("criterion 9 (averaging pipeline)", &checks),
        "{checks:#?}"
    );
}

#[test]
fn criterion_10_curl() {
    let checks = verify::curl_suite(42, 1_000, 100).unwrap();
    assert!(
        report("criterion 10 (curl identities)", &checks),
        "{checks:#?}"
    );
}

#[test]
fn criterion_11_property_suites() {
    let start = Instant::now();
    let mut checks = verify::property_suite(42, None).unwrap();
    checks.extend(verify::positivity_suite(&IntegratorConfig::default()).unwrap());
    let elapsed = start.elapsed().as_secs_f64();
    let ok = report("criterion 11 (exterior-calculus property suites)", &checks);
    println!("    runtime {elapsed:.2} s (budget 60 s)");
    assert!(ok, "{checks:#?}");
    assert!(elapsed < 60.0, "property suites took {elapsed:.2} s");
}
