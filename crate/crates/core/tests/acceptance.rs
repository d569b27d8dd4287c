//! Acceptance suite: one PASS/FAIL line per check, non-zero exit if any fails.

use std::time::Instant;

use contest_core::verify;

fn main() {
    let start = Instant::now();
    let outcomes = verify::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        outcomes.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
