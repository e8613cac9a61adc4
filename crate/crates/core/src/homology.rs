//! Boundary matrices and Betti numbers of bounded cubical sets.

use std::collections::{BTreeSet, HashMap};

use crate::cube::ElementaryCube;
use crate::error::{Error, Result};
use crate::field::{Coefficients, Field, Gf2, Gf2147483647, Rational};
use crate::matrix::SparseMatrix;

/// Matrix of `∂_q` with its row and column bases.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix<F> {
    /// `(q-1)`-cubes of the set, canonical order.
    pub rows: Vec<ElementaryCube>,
    /// `q`-cubes of the set, canonical order.
    pub cols: Vec<ElementaryCube>,
    pub matrix: SparseMatrix<F>,
}

/// Cubes of the given dimension, sorted canonically.
pub fn cubes_of_dim(set: &[ElementaryCube], q: usize) -> Vec<ElementaryCube> {
    let mut out: Vec<ElementaryCube> = set.iter().filter(|c| c.dimension() == q).copied().collect();
    out.sort();
    out.dedup();
    out
}

/// Smallest face-closed set containing the given cubes, canonical order.
pub fn face_closure(generators: &[ElementaryCube]) -> Vec<ElementaryCube> {
    let all: BTreeSet<ElementaryCube> = generators.iter().flat_map(|c| c.subcubes()).collect();
    all.into_iter().collect()
}

/// Matrix of `∂_q` on the cubical set given by its (face-closed) cube list.
/// For `q = 0` the result has no rows.
pub fn boundary_matrix<F: Field>(set: &[ElementaryCube], q: usize) -> Result<BoundaryMatrix<F>> {
    let cols = cubes_of_dim(set, q);
    let rows = if q == 0 { Vec::new() } else { cubes_of_dim(set, q - 1) };
    let index: HashMap<ElementaryCube, usize> =
        rows.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut matrix = SparseMatrix::new(rows.len());
    for cube in &cols {
        let mut col = Vec::with_capacity(2 * q);
        for f in cube.boundary_faces() {
            let &r = index.get(&f.cube).ok_or(Error::NotFaceClosed {
                face: f.cube,
                cube: *cube,
            })?;
            col.push((r, F::from_i64(i64::from(f.sign))));
        }
        matrix.push_column(col);
    }
    Ok(BoundaryMatrix { rows, cols, matrix })
}

/// Exact rank over `F`.
pub fn rank<F: Field>(m: &SparseMatrix<F>) -> usize {
    m.rank()
}

/// `β_q = dim ker ∂_q - rank ∂_{q+1}` over the default field.
pub fn betti(set: &[ElementaryCube], q: usize) -> Result<usize> {
    betti_over::<Gf2147483647>(set, q)
}

pub fn betti_with(set: &[ElementaryCube], q: usize, coeffs: Coefficients) -> Result<usize> {
    match coeffs {
        Coefficients::Mersenne31 => betti_over::<Gf2147483647>(set, q),
        Coefficients::Gf2Fast => betti_over::<Gf2>(set, q),
        Coefficients::Rational => betti_over::<Rational>(set, q),
    }
}

pub fn betti_over<F: Field>(set: &[ElementaryCube], q: usize) -> Result<usize> {
    if let Some(c) = set.first() {
        if q > c.ambient_dim() {
            return Err(Error::Degree {
                q,
                d: c.ambient_dim(),
            });
        }
    }
    let dq = boundary_matrix::<F>(set, q)?;
    let dq1 = boundary_matrix::<F>(set, q + 1)?;
    let kernel = dq.cols.len() - dq.matrix.rank();
    Ok(kernel - dq1.matrix.rank())
}

/// `(β_0, ..., β_d)` over the default field.
pub fn betti_numbers(set: &[ElementaryCube]) -> Result<Vec<usize>> {
    let d = set.first().map_or(0, ElementaryCube::ambient_dim);
    (0..=d).map(|q| betti(set, q)).collect()
}
