// Mean persistence diagram of the upper model binned on dyadic rectangles,
// written as CSV.

use std::error::Error;

use cubeph::limit_lab::estimate_mean_diagram;
use cubeph::models::{DistributionSpec, ModelSpec};
use cubeph::output::write_histogram;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = ModelSpec::upper(2, vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]);
    let mean = estimate_mean_diagram(&model, 1, 4, 8, 2, &[(0.5, 0.75)], 11)?;
    println!(
        "{} pairs binned, {} outside the rectangles, {} essential; inclusion-exclusion error {}",
        mean.summed.counts.iter().sum::<u64>(),
        mean.summed.overflow,
        mean.summed.infinite,
        mean.inclusion_exclusion_error
    );
    let mut csv = Vec::new();
    write_histogram(&mut csv, &mean)?;
    // rows with mass only
    for line in String::from_utf8(csv)?.lines().filter(|l| !l.ends_with(",0,0")) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
