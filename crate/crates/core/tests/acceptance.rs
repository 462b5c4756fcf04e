//! Runs every acceptance suite at its stated tolerances, one at a time
//! (some criteria include a runtime limit), and prints one PASS/FAIL line
//! per criterion. Exits nonzero if any criterion fails.
//!
//! Positional arguments select suites by name; flags from the test runner
//! are ignored.

use std::process::ExitCode;

use chol_lag::validation::{Suite, DEFAULT_SEED};

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<Suite> = Suite::ALL
        .into_iter()
        .filter(|s| filters.is_empty() || filters.iter().any(|f| s.name().contains(f.as_str())))
        .collect();
    let mut failed = 0;
    for suite in &selected {
        let report = suite.run(DEFAULT_SEED);
        println!("{report}");
        if !report.passed {
            failed += 1;
        }
    }
    println!(
        "\nacceptance: {} passed; {failed} failed",
        selected.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
