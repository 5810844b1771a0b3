//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.
//!
//! `cargo test -p bdstein-suite --test acceptance -- 7` runs only criterion 7.

use std::process::ExitCode;

use bdstein::Exec;
use bdstein_suite::run_criterion;

fn main() -> ExitCode {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<u8> = (1..=8).filter(|id| only.is_empty() || only.contains(id)).collect();
    let mut failed = Vec::new();
    for id in ids {
        let out = run_criterion(id, Exec::Parallel).expect("known criterion");
        println!("{}", out.line());
        for n in &out.notes {
            println!("    note: {n}");
        }
        for f in out.failures.iter().take(10) {
            println!("    failure: {f}");
        }
        if !out.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: criteria {failed:?} failed");
        ExitCode::FAILURE
    }
}
