//! Criteria 1 to 11 at the pinned thresholds, one line per criterion.
//!
//! `MHD_INVARIANTS_ACCEPTANCE_N` sets the base grid (default 64).

use std::process::ExitCode;

use mhd_invariants_cli::verify::{criterion_2, reference_study, run_suite, Suite};

fn main() -> ExitCode {
    let mut suite = Suite::default();
    if let Ok(v) = std::env::var("MHD_INVARIANTS_ACCEPTANCE_N") {
        suite.base_n = v.parse().expect("MHD_INVARIANTS_ACCEPTANCE_N must be an integer");
    }
    let dir = tempfile::tempdir().expect("scratch directory");
    suite.out = Some(dir.path().to_path_buf());

    let summary = match run_suite(&suite) {
        Ok(s) => s,
        Err(e) => {
            println!("acceptance suite aborted: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let mut ok = true;
    for c in &summary.criteria {
        println!("criterion {:>2} {:<40} {}", c.id, c.title, if c.passed() { "PASS" } else { "FAIL" });
        for k in c.checks.iter().filter(|k| !k.passed) {
            println!("    {} = {:e}, threshold {:e}", k.identity, k.measured, k.threshold);
        }
        ok &= c.passed();
    }

    // flipping the Lorentz force must break the PV law
    let mutated = Suite {
        base_n: 32,
        lorentz_sign: -1.0,
        out: None,
        ..suite.clone()
    };
    let caught = match reference_study(&mutated) {
        Ok((table, records)) => !criterion_2(&mutated, &table, &records, 0.0).passed(),
        Err(_) => false,
    };
    println!("mutation control (Lorentz sign flipped) {:<21} {}", "", if caught { "PASS" } else { "FAIL" });
    ok &= caught;

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
