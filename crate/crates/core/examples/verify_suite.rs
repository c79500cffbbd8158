//! The full verification suite with a reduced trial count.
//!
//! cargo run --release --example verify_suite [trials]

use almost_complex::verify::{run_suite, SuiteConfig};

fn main() -> almost_complex::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(10);
    let cfg = SuiteConfig {
        trials,
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg)?;
    for r in &report.reports {
        println!(
            "{:<28} {:<4} max {:>11.3e}  tol {:>8.1e}  ({} cases)",
            r.name,
            if r.passed { "ok" } else { "FAIL" },
            r.max_residual,
            r.tolerance,
            r.details.len()
        );
    }
    println!("overall: {}", if report.passed { "pass" } else { "fail" });
    Ok(())
}
