//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line regardless of output capture.

use std::process::{Command, ExitCode};
use std::time::Instant;

use clairaut_core::verify::{run_suite, SUITES};

fn suite(id: u32) -> bool {
    let out = run_suite(id).expect("known suite");
    println!(
        "criterion {id:>2} [{}] {}: {} ({:.1} s)",
        if out.passed { "PASS" } else { "FAIL" },
        out.name,
        out.detail,
        out.elapsed.as_secs_f64()
    );
    out.passed
}

fn verify_command() -> bool {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_clairaut"))
        .arg("verify")
        .output()
        .expect("run clairaut verify");
    let secs = start.elapsed().as_secs_f64();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or_default();
    let code = out.status.code();
    let passed = code == Some(0) && report["results"]["failed"] == 0 && secs <= 300.0;
    println!(
        "criterion 11 [{}] verify command: exit {:?}, {} suites passed, {:.1} s",
        if passed { "PASS" } else { "FAIL" },
        code,
        report["results"]["passed"],
        secs
    );
    if !passed {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    passed
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for (id, _) in SUITES {
        failed += usize::from(!suite(id));
    }
    failed += usize::from(!verify_command());
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
