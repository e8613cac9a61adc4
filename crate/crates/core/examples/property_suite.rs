// The exact property suite at smoke scale.

use std::error::Error;

use cubeph::verify::{run_suite, Scale};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let report = run_suite(Scale::Smoke)?;
    for c in &report.checks {
        println!("{:<26} {:<4} n={:<7} worst margin {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.count, c.worst_margin);
    }
    if !report.passed {
        return Err("property suite failed".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
