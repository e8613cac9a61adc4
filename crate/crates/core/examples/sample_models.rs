// One realization of each random filtration model on `[-3, 3]^2`.

use std::error::Error;

use cubeph::models::{DistributionSpec, ModelSpec, PerturbationSpec};
use cubeph::rng::SeedSpec;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let uniform = vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }];
    let ball = PerturbationSpec::UniformBall { radius: 0.3 };
    let models = [
        ModelSpec::upper(2, uniform.clone()),
        ModelSpec::lower(2, uniform),
        ModelSpec::perturbed_lattice(2, ball.clone()),
        ModelSpec::ball_cover(2, ball, 8),
    ];
    let seed = SeedSpec::new(2024, 0);
    for model in &models {
        let f = model.sample(3, seed)?;
        f.validate()?;
        println!(
            "{:<18} R={} cubes by dim {:?} max birth {:.4}{}",
            model.tag(),
            model.dependence_range(),
            f.counts_by_dim(),
            f.max_birth().unwrap_or(0.0),
            if model.is_approximate() { " (grid approximation)" } else { "" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
