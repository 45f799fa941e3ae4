//! Runs every acceptance criterion and prints one PASS/FAIL line each,
//! followed by the measured rows. Exits nonzero if any criterion fails.
//!
//! `ACCEPTANCE_SEED` and `ACCEPTANCE_PATHS` override the defaults.

use foliated_core::suite::{run_group, SuiteOptions, GROUPS};
use std::process::ExitCode;
use std::time::Instant;

fn env_or<T: std::str::FromStr>(key: &str, default: T) -> T {
    std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}

fn main() -> ExitCode {
    // libtest passes flags such as --list; answer them without running.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut opts = SuiteOptions::default();
    opts.seed = env_or("ACCEPTANCE_SEED", opts.seed);
    opts.n_paths = env_or("ACCEPTANCE_PATHS", opts.n_paths);

    let mut failed = 0;
    for group in GROUPS {
        let start = Instant::now();
        match run_group(group, &opts) {
            Ok(criteria) => {
                for c in criteria {
                    let tag = if c.pass() { "PASS" } else { "FAIL" };
                    println!("{tag}  {}", c.name);
                    for r in &c.rows {
                        println!(
                            "        {:<5} {:<32} residual={:.3e} tolerance={:.3e}",
                            if r.pass { "ok" } else { "FAIL" },
                            r.name,
                            r.residual,
                            r.tolerance
                        );
                    }
                    if !c.pass() {
                        failed += 1;
                    }
                }
            }
            Err(e) => {
                println!("FAIL  {group}: {e}");
                failed += 1;
            }
        }
        eprintln!("[{group}] {:.1}s", start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        println!("all criteria passed (seed {}, {} paths)", opts.seed, opts.n_paths);
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed (seed {}, {} paths)", opts.seed, opts.n_paths);
        ExitCode::FAILURE
    }
}
