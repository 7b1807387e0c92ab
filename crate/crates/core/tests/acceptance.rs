//! Full-scale acceptance run: one line per criterion, then a single assert
//! so every criterion is reported even when an early one fails.

use lslab_core::verify::{run_check, Level};
use lslab_core::Budget;

const SEED: u64 = 20_240_601;

#[test]
fn acceptance() {
    let budget = Budget::from_env().expect("budget from environment");
    let mut failed = Vec::new();
    for id in 1..=10 {
        let c = run_check(id, Level::Full, SEED, &budget);
        println!("{}", c.line());
        if !c.passed {
            failed.push(id);
        }
    }
    println!("acceptance: {}/10 passed", 10 - failed.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
