//! Runs every acceptance criterion and prints one line per criterion.
//! Exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use fracheat::acceptance::{all_pass, run_suite};

const SEED: u64 = 20_241_019;

fn main() -> ExitCode {
    let start = Instant::now();
    let outcomes = run_suite(SEED);
    println!();
    println!("acceptance suite (seed {SEED})");
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria passed in {:.1} s", outcomes.len(), start.elapsed().as_secs_f64());
    if all_pass(&outcomes) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
