//! Elementary cubes on the integer grid and the square windows `[-n, n]^d`.
//!
//! A cube is stored as its lower corner (`base`) plus a bitmask of the axes
//! along which it is nondegenerate (`extent`, bit `i` = axis `i`). Cubes are
//! ordered lexicographically by `(ambient_dim, base, extent bits)`, with the
//! extent compared as the tuple `(e_1, ..., e_d)`. That order is the canonical
//! tie-break used by every other module.
//!
//! The canonical text form is `d;b_1,...,b_d;e_1...e_d`, e.g. `2;0,0;10` for
//! `[0,1] x {0}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementaryCube {
    ambient: u8,
    extent: u8,
    base: [i32; MAX_DIM],
}

/// A cube with an orientation sign, as produced by the boundary operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedCube {
    pub cube: ElementaryCube,
    pub sign: i8,
}

impl ElementaryCube {
    /// Builds a cube from its lower corner and extent mask (bit `i` set means
    /// the `i`-th interval is `[l_i, l_i + 1]`).
    pub fn new(base: &[i32], extent: u8) -> Result<Self> {
        let d = base.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::AmbientDim(d));
        }
        if u32::from(extent) >> d != 0 {
            return Err(Error::Params(format!(
                "extent mask {extent:#b} has bits beyond dimension {d}"
            )));
        }
        let mut b = [0; MAX_DIM];
        b[..d].copy_from_slice(base);
        Ok(Self {
            ambient: d as u8,
            extent,
            base: b,
        })
    }

    pub fn vertex(coords: &[i32]) -> Result<Self> {
        Self::new(coords, 0)
    }

    /// Builds a cube from per-axis `(lower, nondegenerate)` intervals.
    pub fn from_intervals(intervals: &[(i32, bool)]) -> Result<Self> {
        let base: Vec<i32> = intervals.iter().map(|&(l, _)| l).collect();
        let mask = intervals
            .iter()
            .enumerate()
            .fold(0u8, |m, (i, &(_, e))| if e { m | (1 << i) } else { m });
        Self::new(&base, mask)
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient as usize
    }

    #[inline]
    pub fn base(&self) -> &[i32] {
        &self.base[..self.ambient as usize]
    }

    #[inline]
    pub fn extent_mask(&self) -> u8 {
        self.extent
    }

    #[inline]
    pub fn is_extended(&self, axis: usize) -> bool {
        self.extent >> axis & 1 == 1
    }

    /// Number of nondegenerate intervals.
    #[inline]
    pub fn dimension(&self) -> usize {
        self.extent.count_ones() as usize
    }

    /// Upper endpoint of the interval on `axis`.
    #[inline]
    pub fn upper(&self, axis: usize) -> i32 {
        self.base[axis] + i32::from(self.extent >> axis & 1)
    }

    /// Extent bits as the tuple `(e_1, ..., e_d)` packed most-significant first,
    /// so that numeric order equals lexicographic tuple order.
    fn extent_key(&self) -> u8 {
        (0..self.ambient_dim()).fold(0u8, |acc, i| (acc << 1) | (self.extent >> i & 1))
    }

    /// The signed codimension-one faces `Q_j^+` and `Q_j^-`, ordered by the
    /// nondegenerate axis `j` (increasing), `+` before `-`. The sign of
    /// `Q_j^+` is `(-1)^(j-1)`; a vertex has no faces.
    pub fn boundary_faces(&self) -> Vec<SignedCube> {
        let mut out = Vec::with_capacity(2 * self.dimension());
        let mut sign = 1i8;
        for axis in 0..self.ambient_dim() {
            if !self.is_extended(axis) {
                continue;
            }
            let mut upper = *self;
            upper.extent &= !(1 << axis);
            upper.base[axis] += 1;
            let mut lower = *self;
            lower.extent &= !(1 << axis);
            out.push(SignedCube { cube: upper, sign });
            out.push(SignedCube {
                cube: lower,
                sign: -sign,
            });
            sign = -sign;
        }
        out
    }

    /// Every elementary cube containing `self`, including itself. Each
    /// degenerate axis `{l}` may stay degenerate or widen to `[l-1, l]` or
    /// `[l, l+1]`, giving `3^(d - dim)` cubes.
    pub fn cofaces_containing(&self) -> Vec<ElementaryCube> {
        let free: Vec<usize> = (0..self.ambient_dim())
            .filter(|&a| !self.is_extended(a))
            .collect();
        let total = 3usize.pow(free.len() as u32);
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = *self;
            let mut rest = code;
            for &axis in &free {
                match rest % 3 {
                    0 => {}
                    1 => {
                        c.extent |= 1 << axis;
                        c.base[axis] -= 1;
                    }
                    _ => c.extent |= 1 << axis,
                }
                rest /= 3;
            }
            out.push(c);
        }
        out
    }

    /// Every elementary cube contained in `self`, including itself
    /// (`3^dim` cubes).
    pub fn subcubes(&self) -> Vec<ElementaryCube> {
        let ext: Vec<usize> = (0..self.ambient_dim())
            .filter(|&a| self.is_extended(a))
            .collect();
        let total = 3usize.pow(ext.len() as u32);
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut c = *self;
            let mut rest = code;
            for &axis in &ext {
                match rest % 3 {
                    0 => {}
                    1 => c.extent &= !(1 << axis),
                    _ => {
                        c.extent &= !(1 << axis);
                        c.base[axis] += 1;
                    }
                }
                rest /= 3;
            }
            out.push(c);
        }
        out
    }

    /// Interval-wise set inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &ElementaryCube) -> bool {
        self.ambient == other.ambient
            && (0..self.ambient_dim()).all(|a| {
                other.base[a] <= self.base[a] && self.upper(a) <= other.upper(a)
            })
    }

    /// Shifts the cube by an integer vector.
    pub fn translate(&self, offset: &[i32]) -> ElementaryCube {
        debug_assert_eq!(offset.len(), self.ambient_dim());
        let mut c = *self;
        for (b, o) in c.base.iter_mut().zip(offset) {
            *b += o;
        }
        c
    }

    /// Vertices of the cube (`2^dim` lattice points).
    pub fn vertices(&self) -> Vec<Vec<i32>> {
        self.subcubes()
            .into_iter()
            .filter(|c| c.dimension() == 0)
            .map(|c| c.base().to_vec())
            .collect()
    }
}

impl Ord for ElementaryCube {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then_with(|| self.base().cmp(other.base()))
            .then_with(|| self.extent_key().cmp(&other.extent_key()))
    }
}

impl PartialOrd for ElementaryCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ElementaryCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.ambient)?;
        for (i, b) in self.base().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(";")?;
        for a in 0..self.ambient_dim() {
            f.write_str(if self.is_extended(a) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for ElementaryCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.ambient_dim() {
            if a > 0 {
                f.write_str("x")?;
            }
            let l = self.base[a];
            if self.is_extended(a) {
                write!(f, "[{},{}]", l, l + 1)?;
            } else {
                write!(f, "{{{l}}}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ElementaryCube {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: format!("{msg} in cube {s:?}"),
        };
        let mut parts = s.trim().split(';');
        let (Some(d), Some(base), Some(bits), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad("expected three ';'-separated fields"));
        };
        let d: usize = d.parse().map_err(|_| bad("bad dimension"))?;
        let base: Vec<i32> = base
            .split(',')
            .map(|b| b.parse().map_err(|_| bad("bad coordinate")))
            .collect::<Result<_>>()?;
        if base.len() != d || bits.len() != d {
            return Err(bad("field length does not match dimension"));
        }
        let mut mask = 0u8;
        for (i, ch) in bits.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => mask |= 1 << i,
                _ => return Err(bad("extent must be a 0/1 string")),
            }
        }
        ElementaryCube::new(&base, mask)
    }
}

/// The region `[-n, n]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub d: usize,
    pub n: u32,
}

impl Window {
    pub fn new(d: usize, n: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::AmbientDim(d));
        }
        Ok(Self { d, n })
    }

    /// Lebesgue measure `(2n)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * f64::from(self.n)).powi(self.d as i32)
    }

    /// True iff every interval endpoint of the cube lies in `[-n, n]`.
    pub fn contains(&self, cube: &ElementaryCube) -> bool {
        let n = self.n as i32;
        cube.ambient_dim() == self.d
            && (0..self.d).all(|a| cube.base[a] >= -n && cube.upper(a) <= n)
    }

    /// Closed-form `C(d,q) (2n)^q (2n+1)^(d-q)`.
    pub fn cube_count(&self, q: usize) -> u64 {
        if q > self.d {
            return 0;
        }
        let n = u64::from(self.n);
        binomial(self.d, q) * (2 * n).pow(q as u32) * (2 * n + 1).pow((self.d - q) as u32)
    }

    /// All `q`-cubes in the window in canonical order.
    pub fn cubes(&self, q: usize) -> Result<Vec<ElementaryCube>> {
        if q > self.d {
            return Err(Error::Degree { q, d: self.d });
        }
        let mut extents: Vec<u8> = (0u8..(1 << self.d))
            .filter(|m| m.count_ones() as usize == q)
            .collect();
        let probe = |m: u8| ElementaryCube::new(&vec![0; self.d], m).expect("valid mask");
        extents.sort_by_key(|&m| probe(m).extent_key());
        let mut out = Vec::with_capacity(self.cube_count(q) as usize);
        for base in self.lattice_points() {
            for &m in &extents {
                let c = ElementaryCube::new(&base, m)?;
                if self.contains(&c) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// All cubes of every dimension, in canonical order.
    pub fn all_cubes(&self) -> Vec<ElementaryCube> {
        let mut all: Vec<ElementaryCube> = (0..=self.d)
            .flat_map(|q| self.cubes(q).expect("q <= d"))
            .collect();
        all.sort();
        all
    }

    /// Lattice points of `[-n, n]^d` in lexicographic order.
    pub fn lattice_points(&self) -> Vec<Vec<i32>> {
        lattice_box(self.d, -(self.n as i32), self.n as i32)
    }
}

/// Integer points of `[lo, hi]^d` in lexicographic order.
pub fn lattice_box(d: usize, lo: i32, hi: i32) -> Vec<Vec<i32>> {
    if hi < lo {
        return Vec::new();
    }
    let side = (hi - lo + 1) as usize;
    let mut out = Vec::with_capacity(side.pow(d as u32));
    let mut cur = vec![lo; d];
    loop {
        out.push(cur.clone());
        let mut axis = d;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < hi {
                cur[axis] += 1;
                break;
            }
            cur[axis] = lo;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
