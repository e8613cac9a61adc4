// Boundary of the unit square, the chain-complex law, and Betti numbers of
// a hollow square.

use std::error::Error;

use cubeph::field::Gf2147483647;
use cubeph::homology::{betti_numbers, boundary_matrix, face_closure};
use cubeph::ElementaryCube;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let square: ElementaryCube = "2;0,0;11".parse()?;
    println!("{square:?} has dimension {}", square.dimension());
    for face in square.boundary_faces() {
        println!("  {:+} {:?}", face.sign, face.cube);
    }

    let set = face_closure(&[square]);
    let d1 = boundary_matrix::<Gf2147483647>(&set, 1)?;
    let d2 = boundary_matrix::<Gf2147483647>(&set, 2)?;
    println!("∂1 is {}x{}, ∂1∂2 has {} nonzeros", d1.rows.len(), d1.cols.len(), d1.matrix.mul(&d2.matrix).nnz());

    let mut hollow = set.clone();
    hollow.retain(|c| c.dimension() < 2);
    println!("betti(square) = {:?}", betti_numbers(&set)?);
    println!("betti(hollow square) = {:?}", betti_numbers(&hollow)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
