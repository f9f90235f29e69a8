//! Runs every acceptance criterion and prints one line per criterion.

use std::process::ExitCode;

use suspension_lab::suite::run_suite;

fn main() -> ExitCode {
    let seed = std::env::var("ACCEPTANCE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(42);
    let results = run_suite("acceptance", seed, &[]).expect("acceptance suite exists");
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {} ({:.2}s, limit {}s)", r.id, r.name, r.elapsed.as_secs_f64(), r.limit_s);
        if !r.passed {
            failed += 1;
            for c in r.checks.iter().filter(|c| !c.passed) {
                println!("    failed check {}: {}", c.name, c.detail);
            }
        }
    }
    println!("{} of {} criteria passed (seed {seed})", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
