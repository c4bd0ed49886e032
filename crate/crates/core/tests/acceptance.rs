//! The acceptance suite over Q and Q(sqrt 5): one pass/fail line per check.

use std::io::Write;

use newform_core::selftest::{run_check, SuiteConfig, CHECKS};

#[test]
fn acceptance() {
    let cfg = SuiteConfig::new(vec![1, 5], 7, 2000);
    // write to the handle directly so the lines show without --nocapture
    let mut err = std::io::stderr();
    writeln!(err).unwrap();
    let mut failed = Vec::new();
    for name in CHECKS {
        let start = std::time::Instant::now();
        let r = run_check(name, &cfg).unwrap();
        writeln!(
            err,
            "{} {:<26} cases={:<7} failures={:<4} max_dev={:.3e} tol={:.0e} ({:.1}s)",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.failures,
            r.max_deviation,
            r.tolerance,
            start.elapsed().as_secs_f64()
        )
        .unwrap();
        for d in &r.detail {
            writeln!(err, "    {d}").unwrap();
        }
        if !r.passed() {
            failed.push(r.name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}
