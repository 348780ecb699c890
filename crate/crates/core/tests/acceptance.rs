use std::io::Write;

use fklab::verify::{run_criterion, VerifyOptions};
use rayon::prelude::*;

// Lines go straight to the stderr handle so they show without --nocapture.
#[test]
fn acceptance() {
    let opts = VerifyOptions::default();
    let reports: Vec<_> = (1..=11).into_par_iter().map(|id| run_criterion(id, &opts)).collect();
    let mut err = std::io::stderr().lock();
    for r in &reports {
        writeln!(err, "{}", r.summary_line()).unwrap();
        for c in r.checks.iter().filter(|c| !c.passed) {
            writeln!(err, "    failed: {} [{}]", c.label, c.value).unwrap();
        }
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
