//! Runs both differential fuzzing modes and prints a summary.
//!
//! `cargo run --release --example differential_fuzz -- [seed] [iters]`

use std::time::Instant;

use treegex::fuzz::{run_fuzz, FuzzConfig, FuzzMode};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let iters = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    for mode in [FuzzMode::Full, FuzzMode::StarFragment] {
        let t = Instant::now();
        let report = run_fuzz(&FuzzConfig {
            seed,
            iters,
            mode,
            ..FuzzConfig::default()
        });
        println!(
            "{mode:?}: {} agreed, {} skipped, {} failures in {:.1?}",
            report.agreed,
            report.skipped,
            report.failures.len(),
            t.elapsed()
        );
        for f in &report.failures {
            println!("  #{} {:?} on {:?} at {}: {}", f.iteration, f.shrunk.pattern, f.shrunk.input, f.shrunk.start, f.detail);
        }
    }
}
