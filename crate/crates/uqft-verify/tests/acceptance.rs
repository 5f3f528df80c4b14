//! Acceptance suite: one PASS/FAIL line per criterion. The process exits
//! with a failure status if any criterion fails. Criteria may be selected
//! by number on the command line, e.g. `cargo test --test acceptance -- 6 7`.

use std::process::ExitCode;

fn main() -> ExitCode {
    let ids: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let outcomes = uqft_verify::run_and_print(&ids);
    println!("{}", uqft_verify::summary(&outcomes));
    if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
