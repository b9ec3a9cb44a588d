//! All fourteen acceptance criteria, one PASS/FAIL line each.

use nitk_cli::suite::{format_line, run_criterion};

fn main() {
    let mut failed = Vec::new();
    for c in 1..=14u8 {
        let check = run_criterion(c);
        println!("{}", format_line(&check));
        if !check.passed {
            failed.push(c);
        }
    }
    println!("acceptance: {} passed, {} failed", 14 - failed.len(), failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
