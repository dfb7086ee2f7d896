//! Runs the twelve acceptance criteria and prints one line per criterion.

use vortexlab::acceptance::{run_criterion, CRITERIA};

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        match run_criterion(id, 20240611) {
            Ok(report) => {
                println!("{}", report.line());
                if !report.passed {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("[FAIL] {id:>2} error: {e}");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
