//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run; see the README.

use std::io::Write;

use hardy_henon::suite;

const KNOWN_RED: [u8; 2] = [4, 7];

#[test]
fn acceptance_criteria() {
    let outcomes = suite::run_all();
    assert_eq!(outcomes.len(), 10);
    // bypasses libtest output capture
    let mut err = std::io::stderr();
    for o in &outcomes {
        let _ = writeln!(err, "{}", o.line());
    }
    let unexpected: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.passed && !KNOWN_RED.contains(&o.id))
        .map(|o| o.id)
        .collect();
    for o in outcomes.iter().filter(|o| o.passed && KNOWN_RED.contains(&o.id)) {
        let _ = writeln!(err, "note: criterion {} is listed as known red but passed", o.id);
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
