// Persistent Betti densities of the lower model along a ladder of windows.

use std::error::Error;

use cubeph::limit_lab::lln_sweep;
use cubeph::models::{DistributionSpec, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = ModelSpec::lower(2, vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]);
    let pairs = [(0.5, 0.5), (0.4, 0.7)];
    println!("n  s    t    mean      std");
    for row in lln_sweep(&model, 0, &pairs, &[2, 4, 6], 10, 7)? {
        println!("{:<2} {:<4} {:<4} {:.6}  {:.6}", row.n, row.pair.0, row.pair.1, row.mean, row.std);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
