//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion, followed by its measurements.

use std::process::ExitCode;

use threebundle::verify::{run_criterion, ALL};

const SEED: u64 = 20240917;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in ALL {
        let r = run_criterion(id, SEED).expect("known criterion");
        println!("{}", r.line());
        for d in &r.details {
            println!("    {d}");
        }
        if !r.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", ALL.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
