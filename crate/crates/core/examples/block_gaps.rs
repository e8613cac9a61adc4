// Near-additivity and regularity gaps of one realization against their
// deterministic bounds.

use std::error::Error;

use cubeph::limit_lab::{near_additivity_gap, regularity_gap};
use cubeph::models::{DistributionSpec, ModelSpec};
use cubeph::output::write_gaps;
use cubeph::rng::SeedSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = ModelSpec::upper(2, vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]);
    let pairs = [(0.3, 0.6), (0.5, 0.8)];
    let seed = SeedSpec::new(5, 0);
    let reports = vec![
        near_additivity_gap(&model, 1, &pairs, 4, 1, 1, seed)?,
        near_additivity_gap(&model, 1, &pairs, 3, 1, 2, seed)?,
        regularity_gap(&model, 1, &pairs, 2, 7, seed)?,
        regularity_gap(&model, 1, &pairs, 3, 9, seed)?,
    ];
    let mut csv = Vec::new();
    write_gaps(&mut csv, &reports)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
