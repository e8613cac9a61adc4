// Empirical log-MGF of one persistent Betti number and its grid Legendre
// transform; the transform vanishes near the empirical mean.

use std::error::Error;

use cubeph::limit_lab::{estimate_log_mgf, estimate_pb_density, legendre_transform, linspace, Grid};
use cubeph::models::{DistributionSpec, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let model = ModelSpec::lower(2, vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]);
    let pairs = [(0.5, 0.5)];
    let (n, trials, seed) = (4, 60, 3);

    let lambda = Grid::new(vec![linspace(-2.0, 2.0, 81)])?;
    let phi = estimate_log_mgf(&model, 0, &pairs, &lambda, n, trials, seed)?;
    let x = Grid::new(vec![linspace(0.0, 1.0, 101)])?;
    let star = legendre_transform(&phi, &x)?;

    let mean = estimate_pb_density(&model, 0, &pairs, n, trials, seed)?.mean[0];
    let (k, min) = star.argmin();
    println!("phi_hat(0) = {}", phi.value_at(&[0.0]).unwrap_or(f64::NAN));
    println!("convexity defect {:e}", phi.convexity_defect());
    println!("empirical mean {mean:.4}, rate minimum {min:.2e} at x = {}", x.point(k)[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
