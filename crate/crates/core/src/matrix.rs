//! Column-major sparse matrices and the column reduction engine shared by
//! rank computations and persistence pairing.
//!
//! Reduction is the standard left-to-right algorithm: the pivot of a column is
//! its lowest nonzero entry (largest row index), and a column is reduced by
//! adding multiples of earlier columns until its pivot is unique or it
//! vanishes.

use std::fmt::{self, Display, Write as _};

use crate::field::Field;

/// Sparse column, entries sorted by strictly increasing row index, no zeros.
pub type Column<F> = Vec<(usize, F)>;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    nrows: usize,
    cols: Vec<Column<F>>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn new(nrows: usize) -> Self {
        Self {
            nrows,
            cols: Vec::new(),
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::new(k);
        for i in 0..k {
            m.push_column(vec![(i, F::one())]);
        }
        m
    }

    /// Appends a column. Entries are sorted and zero entries dropped; repeated
    /// rows are summed.
    pub fn push_column(&mut self, mut entries: Column<F>) {
        entries.sort_by_key(|e| e.0);
        let mut col: Column<F> = Vec::with_capacity(entries.len());
        for (r, v) in entries {
            assert!(r < self.nrows, "row {r} out of bounds ({})", self.nrows);
            match col.last_mut() {
                Some((lr, lv)) if *lr == r => *lv = lv.add(&v),
                _ => col.push((r, v)),
            }
        }
        col.retain(|(_, v)| !v.is_zero());
        self.cols.push(col);
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &Column<F> {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Column<F>] {
        &self.cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Entry lookup (zero when absent).
    pub fn get(&self, row: usize, col: usize) -> F {
        self.cols[col]
            .binary_search_by_key(&row, |e| e.0)
            .map(|k| self.cols[col][k].1.clone())
            .unwrap_or_else(|_| F::zero())
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &SparseMatrix<F>) -> SparseMatrix<F> {
        assert_eq!(self.ncols(), rhs.nrows());
        let mut out = SparseMatrix::new(self.nrows);
        for rc in &rhs.cols {
            let mut acc: Column<F> = Vec::new();
            for (k, v) in rc {
                acc = axpy(&acc, v, &self.cols[*k]);
            }
            out.cols.push(acc);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        reduce(self, false).rank()
    }
}

impl<F: Field + Display> SparseMatrix<F> {
    /// Coordinate text dump: one `row col value` line per stored entry,
    /// column-major.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = String::new();
        for (j, col) in self.cols.iter().enumerate() {
            for (i, v) in col {
                let _ = writeln!(s, "{i} {j} {v}");
            }
        }
        s
    }
}

/// `x + a * y` on sorted sparse columns.
pub fn axpy<F: Field>(x: &[(usize, F)], a: &F, y: &[(usize, F)]) -> Column<F> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push(x[i].clone());
            i += 1;
        } else if take_y {
            let v = a.mul(&y[j].1);
            if !v.is_zero() {
                out.push((y[j].0, v));
            }
            j += 1;
        } else {
            let v = x[i].1.add(&a.mul(&y[j].1));
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Result of reducing `D` to `R = D V`.
#[derive(Clone, Debug)]
pub struct Reduction<F> {
    pub reduced: Vec<Column<F>>,
    /// `pivot_col[row]` = the column whose lowest entry is `row`.
    pub pivot_col: Vec<Option<usize>>,
    /// Columns of `V` (identity-initialised), when tracking was requested.
    pub v: Option<Vec<Column<F>>>,
}

impl<F: Field> Reduction<F> {
    pub fn rank(&self) -> usize {
        self.reduced.iter().filter(|c| !c.is_empty()).count()
    }

    /// Lowest nonzero row of reduced column `j`.
    pub fn low(&self, j: usize) -> Option<usize> {
        self.reduced[j].last().map(|e| e.0)
    }

    /// Basis of the kernel of `D`: columns of `V` whose reduced column vanished.
    pub fn kernel_basis(&self) -> Vec<Column<F>> {
        let v = self.v.as_ref().expect("reduction did not track V");
        self.reduced
            .iter()
            .zip(v)
            .filter(|(r, _)| r.is_empty())
            .map(|(_, vc)| vc.clone())
            .collect()
    }
}

/// Reduces all columns left to right.
pub fn reduce<F: Field>(m: &SparseMatrix<F>, track_v: bool) -> Reduction<F> {
    reduce_ordered(m, track_v, None, false)
}

/// Reduces the columns in `order` (left to right when `None`).
///
/// For a square total boundary matrix the caller may process the blocks of
/// one degree at a time, top degree first; columns of different degrees have
/// disjoint row supports so the pivots equal those of plain left-to-right
/// reduction as long as each block is visited in increasing index order.
/// With `clearing`, a column whose index is already the pivot row of another
/// column is known to reduce to zero and is skipped.
pub fn reduce_ordered<F: Field>(
    m: &SparseMatrix<F>,
    track_v: bool,
    order: Option<&[usize]>,
    clearing: bool,
) -> Reduction<F> {
    let n = m.ncols();
    let mut reduced: Vec<Column<F>> = vec![Vec::new(); n];
    let mut pivot_col: Vec<Option<usize>> = vec![None; m.nrows()];
    let mut pivot_inv: Vec<Option<F>> = vec![None; m.nrows()];
    let mut v: Option<Vec<Column<F>>> =
        track_v.then(|| (0..n).map(|j| vec![(j, F::one())]).collect());
    let all: Vec<usize>;
    let order = match order {
        Some(o) => o,
        None => {
            all = (0..n).collect();
            &all
        }
    };
    for &j in order {
        if clearing && j < pivot_col.len() && pivot_col[j].is_some() {
            continue;
        }
        let mut col = m.cols[j].clone();
        let mut vj = v.as_ref().map(|vv| vv[j].clone());
        while let Some((low, val)) = col.last().cloned() {
            match pivot_col[low] {
                Some(k) => {
                    let factor = val.mul(pivot_inv[low].as_ref().expect("pivot set")).neg();
                    col = axpy(&col, &factor, &reduced[k]);
                    if let (Some(vj), Some(vv)) = (vj.as_mut(), v.as_ref()) {
                        *vj = axpy(vj, &factor, &vv[k]);
                    }
                }
                None => {
                    pivot_col[low] = Some(j);
                    pivot_inv[low] = val.inv();
                    break;
                }
            }
        }
        reduced[j] = col;
        if let (Some(vj), Some(vv)) = (vj, v.as_mut()) {
            vv[j] = vj;
        }
    }
    Reduction {
        reduced,
        pivot_col,
        v,
    }
}

impl<const P: u64> Display for crate::field::Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl Display for crate::field::Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Gf2147483647 as F, Rational};

    fn col(entries: &[(usize, i64)]) -> Column<F> {
        entries.iter().map(|&(r, v)| (r, F::from_i64(v))).collect()
    }

    #[test]
    fn zero_and_identity_ranks() {
        let mut z = SparseMatrix::<F>::new(3);
        z.push_column(vec![]);
        z.push_column(vec![]);
        assert_eq!(z.rank(), 0);
        assert_eq!(SparseMatrix::<F>::identity(5).rank(), 5);
    }

    #[test]
    fn push_column_merges_and_drops_zeros() {
        let mut m = SparseMatrix::<F>::new(3);
        m.push_column(col(&[(2, 1), (0, 1), (2, -1)]));
        assert_eq!(m.column(0), &col(&[(0, 1)]));
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let mut m = SparseMatrix::<Rational>::new(2);
        let r = |v: i64| Rational::from_i64(v);
        m.push_column(vec![(0, r(1)), (1, r(2))]);
        m.push_column(vec![(0, r(2)), (1, r(4))]);
        m.push_column(vec![(0, r(1))]);
        let red = reduce(&m, true);
        assert_eq!(red.rank(), 2);
        let ker = red.kernel_basis();
        assert_eq!(ker.len(), 1);
        let mut kmat = SparseMatrix::new(3);
        kmat.push_column(ker[0].clone());
        assert!(m.mul(&kmat).is_zero());
    }

    #[test]
    fn coordinate_dump() {
        let mut m = SparseMatrix::<F>::new(2);
        m.push_column(col(&[(1, 1), (0, -1)]));
        assert_eq!(m.to_coordinate_text(), "0 0 2147483646\n1 0 1\n");
    }
}
