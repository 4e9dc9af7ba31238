//! Prints one pass/fail line per acceptance criterion and fails the run if
//! any criterion fails. `FUSEDFOCUS_SEED` and `FUSEDFOCUS_CASES` override
//! the harness defaults.

use std::process::ExitCode;

use fusedfocus::acceptance;

fn env_or<T: std::str::FromStr>(var: &str, default: T) -> T {
    std::env::var(var).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> ExitCode {
    let seed = env_or("FUSEDFOCUS_SEED", 20_240_601_u64);
    let cases = env_or("FUSEDFOCUS_CASES", 200_usize);
    let results = acceptance::run_all(seed, cases);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
