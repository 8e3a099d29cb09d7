//! Runs every acceptance criterion at full size and prints one line each.
//! Exits non-zero if any criterion fails. `CHIRAL_SEED` overrides the seed.

use std::process::ExitCode;

use chiral_cli::verify::{self, Check, Options};
use chiral_core::jacobians;

fn main() -> ExitCode {
    // `cargo test -- <filter>` passes arguments; the target has a single test.
    let seed = std::env::var("CHIRAL_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1);
    let o = Options {
        seed,
        ..Options::default()
    };
    let grid = jacobians::full_grid(&[1, 2, 3]);
    let criteria: Vec<(&str, Vec<Check>)> = vec![
        ("C1", vec![verify::reduction(&o)]),
        ("C2", vec![verify::largest_eigenvalue_law(&o)]),
        ("C3", vec![verify::spectral_law(&o)]),
        ("C4", vec![verify::normalization()]),
        ("C5", vec![verify::jacobian(&o, &grid)]),
        ("C6", vec![verify::locations(&o), verify::round_trip(&o)]),
        ("C7", vec![verify::hermitian_law(&o)]),
        ("C8", vec![verify::nonhermitian_law(&o)]),
        ("C9", vec![verify::zero_multiplicities(&o)]),
    ];
    println!("acceptance (seed {seed})");
    let mut failed = 0;
    for (criterion, checks) in &criteria {
        let passed = checks.iter().all(|c| c.passed);
        failed += usize::from(!passed);
        let summary: Vec<&str> = checks.iter().map(|c| c.summary.as_str()).collect();
        let seconds: f64 = checks.iter().map(|c| c.seconds).sum();
        println!(
            "{criterion} {} {} [{seconds:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            summary.join("; ")
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
