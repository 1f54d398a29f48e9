//! One test per acceptance criterion. Each prints a single line
//!
//! `criterion N <name>: PASS|FAIL (...)`
//!
//! and then asserts on the same outcome, so `cargo test --test acceptance
//! -- --nocapture` doubles as the scorecard.

use std::time::{Duration, Instant};

use fedosov_core::verification::{Check, Status, VerificationReport, DEFAULT_SEED};

fn criterion(n: u32, name: &str, checks: &[Check], limit: Duration) {
    let start = Instant::now();
    let reports: Vec<VerificationReport> = checks.iter().map(|c| c.run(DEFAULT_SEED)).collect();
    let elapsed = start.elapsed();
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.status != Status::Pass)
        .map(|r| {
            let parts: Vec<String> = r
                .params
                .get("parts")
                .and_then(|p| p.as_array())
                .map(|ps| {
                    ps.iter()
                        .filter(|p| p["status"] != "pass")
                        .map(|p| format!("{} {}/{}", p["id"].as_str().unwrap_or("?"), p["max_error"], p["tolerance"]))
                        .collect()
                })
                .unwrap_or_default();
            if parts.is_empty() {
                format!("{} {:e}/{:e}", r.id, r.max_error, r.tolerance)
            } else {
                format!("{}: {}", r.id, parts.join("; "))
            }
        })
        .collect();
    let in_time = elapsed <= limit;
    let pass = failed.is_empty() && in_time;
    let errors: Vec<String> = reports.iter().map(|r| format!("{} {:.3e}/{:.1e}", r.id, r.max_error, r.tolerance)).collect();
    println!(
        "criterion {n} {name}: {} ({}; {:.2}s of {}s){}",
        if pass { "PASS" } else { "FAIL" },
        errors.join(", "),
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if failed.is_empty() { String::new() } else { format!(" failing: {}", failed.join(" | ")) }
    );
    assert!(failed.is_empty(), "criterion {n} failing checks: {failed:?}");
    assert!(in_time, "criterion {n} took {elapsed:?}, limit {limit:?}");
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn criterion_01_connection_transport() {
    criterion(1, "connection transport", &[Check::ConnectionTransport], secs(1));
}

#[test]
fn criterion_02_fedosov_moyal_equivalence() {
    criterion(2, "fedosov-moyal equivalence", &[Check::FedosovMoyal], secs(30));
}

#[test]
fn criterion_03_operator_derivation() {
    criterion(3, "operator derivation", &[Check::OperatorDerivation], secs(60));
}

#[test]
fn criterion_04_pde_residuals() {
    criterion(4, "pde residuals", &[Check::PdeReduced, Check::PdeFull, Check::PdeCross, Check::OdeB1B2], secs(60));
}

#[test]
fn criterion_05_marginals() {
    criterion(5, "marginals", &[Check::Marginal], secs(60));
}

#[test]
fn criterion_06_hermiticity_and_reduction() {
    criterion(6, "hermiticity and reduction", &[Check::Hermiticity], secs(1));
}

#[test]
fn criterion_07_identity_suite() {
    criterion(7, "identity suite", &[Check::IdentitySuite], secs(30));
}

#[test]
fn criterion_08_jacobi_anger() {
    criterion(8, "jacobi-anger oracle", &[Check::JacobiAnger], secs(10));
}

#[test]
fn criterion_09_reconstruction() {
    criterion(9, "weak-form reconstruction", &[Check::Reconstruction], secs(300));
}

#[test]
fn criterion_10_chart_integrity() {
    criterion(10, "chart integrity", &[Check::ChartIntegrity], secs(5));
}
