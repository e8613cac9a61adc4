// A square whose boundary appears at time 1 and whose interior fills in at
// time 2: one loop born at 1 dies at 2, and both routes to persistent Betti
// numbers agree.

use std::error::Error;

use cubeph::{compute_diagram, persistent_betti_direct, quadrant_mass, ElementaryCube, Filtration, Window};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let square: ElementaryCube = "2;0,0;11".parse()?;
    let births = square
        .subcubes()
        .into_iter()
        .map(|c| (c, if c.dimension() == 2 { 2.0 } else { 1.0 }));
    let f = Filtration::new(Window::new(2, 1)?, births)?;
    let dgm = compute_diagram(&f)?;

    let mut text = Vec::new();
    dgm.write(&mut text)?;
    print!("{}", String::from_utf8(text)?);

    for (s, t) in [(1.0, 1.5), (1.0, 2.0), (0.5, 1.5)] {
        println!(
            "beta_1({s}, {t}): diagram {} direct {}",
            quadrant_mass(&dgm, 1, s, t),
            persistent_betti_direct(&f, 1, s, t)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
