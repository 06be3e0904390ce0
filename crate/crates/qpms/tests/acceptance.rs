//! Acceptance suite as a plain binary: one pass/fail line per criterion,
//! nonzero exit on any failure.

use std::process::ExitCode;

use qpms::selfcheck::{criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = 0;
    for id in 1..=CRITERIA {
        let start = std::time::Instant::now();
        let c = criterion(id);
        println!("{c} ({:.2} s)", start.elapsed().as_secs_f64());
        if !c.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
