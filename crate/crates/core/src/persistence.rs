//! Bounded cubical filtrations, their persistence diagrams, and persistent
//! Betti numbers.
//!
//! Two independent routes compute the same numbers:
//!
//! * [`compute_diagram`] reduces the total boundary matrix in filtration order
//!   and reads off birth-death pairs; [`quadrant_mass`] then counts pairs in
//!   `[0, s] x (t, ∞]`.
//! * [`persistent_betti_direct`] evaluates
//!   `dim Z_q(X(s)) - dim(Z_q(X(s)) ∩ B_q(X(t)))` from ranks of separate
//!   boundary matrices.
//!
//! Neither route calls the other, so each serves as an oracle for the other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use crate::cube::{ElementaryCube, Window};
use crate::error::{Error, Result};
use crate::field::{Field, Gf2147483647};
use crate::homology::boundary_matrix;
use crate::matrix::{reduce, reduce_ordered, SparseMatrix};

/// Birth or death time; `f64::INFINITY` means "never".
pub type Time = f64;

/// A window together with finite birth times for the cubes that ever appear.
/// Cubes not stored are born at `∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    window: Window,
    births: BTreeMap<ElementaryCube, Time>,
    /// Seed of the realization this filtration was sampled from (0 when
    /// built by hand).
    pub seed: u64,
}

/// A face born strictly after one of its cofaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub face: ElementaryCube,
    pub face_birth: Time,
    pub cube: ElementaryCube,
    pub cube_birth: Time,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "face {} (birth {}) of {} (birth {})",
            self.face, self.face_birth, self.cube, self.cube_birth
        )
    }
}

impl std::error::Error for Violation {}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Monotonicity {
            face: v.face,
            face_birth: v.face_birth,
            cube: v.cube,
            cube_birth: v.cube_birth,
        }
    }
}

impl Filtration {
    /// Builds a filtration from explicit births. Infinite births are dropped;
    /// negative or NaN times and cubes outside the window are rejected. The
    /// monotone face condition is not checked here, see [`Filtration::validate`].
    pub fn new(
        window: Window,
        births: impl IntoIterator<Item = (ElementaryCube, Time)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (cube, t) in births {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Times(format!("birth {t} of {cube} is not in [0, ∞]")));
            }
            if !window.contains(&cube) {
                return Err(Error::Params(format!("{cube} lies outside window n={}", window.n)));
            }
            if t.is_finite() {
                map.insert(cube, t);
            }
        }
        Ok(Self {
            window,
            births: map,
            seed: 0,
        })
    }

    /// Births `max(raw(Q'), Q' ⊆ Q)` over every cube of the window. The result
    /// satisfies the monotone face condition by construction.
    pub fn from_max_over_faces(window: Window, raw: impl Fn(&ElementaryCube) -> Time) -> Self {
        let mut births: HashMap<ElementaryCube, Time> = HashMap::new();
        for q in 0..=window.d {
            for cube in window.cubes(q).expect("q <= d") {
                let own = raw(&cube);
                let b = cube
                    .boundary_faces()
                    .iter()
                    .map(|f| births[&f.cube])
                    .fold(own, f64::max);
                births.insert(cube, b);
            }
        }
        Self {
            window,
            births: births.into_iter().filter(|(_, t)| t.is_finite()).collect(),
            seed: 0,
        }
    }

    /// Forces the monotone face condition by raising every birth to the
    /// maximum over its faces.
    pub fn repaired(&self) -> Self {
        let mut f = Self::from_max_over_faces(self.window, |c| self.birth(c));
        f.seed = self.seed;
        f
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn ambient_dim(&self) -> usize {
        self.window.d
    }

    pub fn birth(&self, cube: &ElementaryCube) -> Time {
        self.births.get(cube).copied().unwrap_or(f64::INFINITY)
    }

    /// Finite-birth cubes in canonical cube order.
    pub fn iter(&self) -> impl Iterator<Item = (&ElementaryCube, &Time)> {
        self.births.iter()
    }

    pub fn len(&self) -> usize {
        self.births.len()
    }

    pub fn is_empty(&self) -> bool {
        self.births.is_empty()
    }

    /// Largest finite birth, if any.
    pub fn max_birth(&self) -> Option<Time> {
        self.births.values().copied().reduce(f64::max)
    }

    /// Checks `Q' ⊂ Q ⇒ birth(Q') ≤ birth(Q)` and reports the first violation
    /// in canonical cube order. Codimension-one faces suffice by transitivity.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        for (cube, &t) in &self.births {
            for f in cube.boundary_faces() {
                let fb = self.birth(&f.cube);
                if fb > t {
                    return Err(Violation {
                        face: f.cube,
                        face_birth: fb,
                        cube: *cube,
                        cube_birth: t,
                    });
                }
            }
        }
        Ok(())
    }

    /// Cube list of `X(t)`, canonical order.
    pub fn sublevel(&self, t: Time) -> Vec<ElementaryCube> {
        self.births
            .iter()
            .filter(|(_, &b)| b <= t)
            .map(|(c, _)| *c)
            .collect()
    }

    /// Number of finite-birth cubes per dimension.
    pub fn counts_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.window.d + 1];
        for c in self.births.keys() {
            counts[c.dimension()] += 1;
        }
        counts
    }

    /// Sets births outside `[-m, m]^d` to `∞`.
    pub fn restrict(&self, m: u32) -> Result<Self> {
        if m > self.window.n {
            return Err(Error::Params(format!(
                "cannot restrict window n={} to larger m={m}",
                self.window.n
            )));
        }
        let window = Window::new(self.window.d, m)?;
        Ok(Self {
            window,
            births: self
                .births
                .iter()
                .filter(|(c, _)| window.contains(c))
                .map(|(c, t)| (*c, *t))
                .collect(),
            seed: self.seed,
        })
    }

    /// The part of this filtration inside `center + [-m, m]^d`, translated so
    /// that `center` becomes the origin.
    pub fn carve(&self, center: &[i32], m: u32) -> Result<Self> {
        let window = Window::new(self.window.d, m)?;
        let back: Vec<i32> = center.iter().map(|c| -c).collect();
        let births: BTreeMap<ElementaryCube, Time> = self
            .births
            .iter()
            .map(|(c, t)| (c.translate(&back), *t))
            .filter(|(c, _)| window.contains(c))
            .collect();
        let outer = i64::from(self.window.n);
        let fits = center
            .iter()
            .all(|&c| i64::from(c).abs() + i64::from(m) <= outer);
        if !fits {
            return Err(Error::Params(format!(
                "block of half-width {m} at {center:?} leaves window n={}",
                self.window.n
            )));
        }
        Ok(Self {
            window,
            births,
            seed: self.seed,
        })
    }

    /// Writes the dump format: `# d n seed` then `<cube> <birth>` per
    /// finite-birth cube in canonical order. `extra_header` lines are written
    /// as `# ...` comments after the first line.
    pub fn write_dump(&self, w: &mut impl Write, extra_header: &[String]) -> Result<()> {
        writeln!(w, "# {} {} {}", self.window.d, self.window.n, self.seed)?;
        for line in extra_header {
            writeln!(w, "# {line}")?;
        }
        for (c, t) in &self.births {
            writeln!(w, "{c} {t}")?;
        }
        Ok(())
    }

    pub fn read_dump(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let header = header?;
        let fields: Vec<&str> = header
            .strip_prefix('#')
            .map(|h| h.split_whitespace().collect())
            .unwrap_or_default();
        let [d, n, seed] = fields[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected '# d n seed', got {header:?}"),
            });
        };
        let num = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad header field {s:?}"),
            })
        };
        let window = Window::new(num(d)? as usize, num(n)? as u32)?;
        let seed = num(seed)?;
        let mut births = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (cube, t) = line
                .split_once(' ')
                .ok_or_else(|| err(format!("expected '<cube> <birth>', got {line:?}")))?;
            let cube: ElementaryCube = cube.parse().map_err(|e| err(format!("{e}")))?;
            if cube.ambient_dim() != window.d {
                return Err(err(format!("{cube} does not have dimension {}", window.d)));
            }
            let t: Time = t.trim().parse().map_err(|_| err(format!("bad time {t:?}")))?;
            births.push((cube, t));
        }
        let mut f = Self::new(window, births)?;
        f.seed = seed;
        Ok(f)
    }
}

/// One point `(birth, death)` of a diagram, `birth < death ≤ ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirthDeathPair {
    pub birth: Time,
    pub death: Time,
}

/// Degree-indexed multisets of birth-death pairs for degrees `0..d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    pub d: usize,
    pub n: u32,
    pub seed: u64,
    /// `pairs[q]` sorted by `(birth, death)`.
    pub pairs: Vec<Vec<BirthDeathPair>>,
}

impl PersistenceDiagram {
    pub fn empty(d: usize, n: u32, seed: u64) -> Self {
        Self {
            d,
            n,
            seed,
            pairs: vec![Vec::new(); d],
        }
    }

    pub fn degree(&self, q: usize) -> &[BirthDeathPair] {
        self.pairs.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn total_pairs(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }

    fn sort(&mut self) {
        for ps in &mut self.pairs {
            ps.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        }
    }

    /// Writes `# d q_max n seed` then `q birth death` lines sorted by
    /// `(q, birth, death)`; infinite deaths print as `inf`.
    pub fn write(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "# {} {} {} {}", self.d, self.d.saturating_sub(1), self.n, self.seed)?;
        for (q, ps) in self.pairs.iter().enumerate() {
            for p in ps {
                writeln!(w, "{q} {} {}", p.birth, p.death)?;
            }
        }
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let header = header?;
        let fields: Vec<u64> = header
            .strip_prefix('#')
            .ok_or(Error::Parse {
                line: 1,
                msg: "missing '#' header".into(),
            })?
            .split_whitespace()
            .map(|s| {
                s.parse().map_err(|_| Error::Parse {
                    line: 1,
                    msg: format!("bad header field {s:?}"),
                })
            })
            .collect::<Result<_>>()?;
        let [d, q_max, n, seed] = fields[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: "expected '# d q_max n seed'".into(),
            });
        };
        let mut diagram = Self::empty(d as usize, n as u32, seed);
        let degrees = (q_max + 1).max(d) as usize;
        diagram.pairs.resize(degrees, Vec::new());
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [q, b, dt] = parts[..] else {
                return Err(err(format!("expected 'q birth death', got {line:?}")));
            };
            let q: usize = q.parse().map_err(|_| err(format!("bad degree {q:?}")))?;
            let birth: Time = b.parse().map_err(|_| err(format!("bad birth {b:?}")))?;
            let death: Time = dt.parse().map_err(|_| err(format!("bad death {dt:?}")))?;
            if q >= diagram.pairs.len() {
                return Err(err(format!("degree {q} exceeds q_max {q_max}")));
            }
            if !(birth >= 0.0 && birth < death) {
                return Err(err(format!("pair ({birth}, {death}) violates 0 <= b < d")));
            }
            diagram.pairs[q].push(BirthDeathPair { birth, death });
        }
        diagram.sort();
        Ok(diagram)
    }
}

/// Finite-birth cubes in reduction order: `(birth, dimension, cube)`.
pub(crate) fn filtration_order(f: &Filtration) -> Vec<(ElementaryCube, Time)> {
    let mut cells: Vec<(ElementaryCube, Time)> = f.iter().map(|(c, t)| (*c, *t)).collect();
    cells.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.dimension().cmp(&b.0.dimension()))
            .then(a.0.cmp(&b.0))
    });
    cells
}

/// Persistence diagram by column reduction over `GF(2^31 - 1)`.
pub fn compute_diagram(f: &Filtration) -> Result<PersistenceDiagram> {
    f.validate()?;
    Ok(diagram_in_order(f, &filtration_order(f)))
}

/// Reduction in an explicit cell order; the order must list faces before
/// cofaces and be nondecreasing in birth.
pub(crate) fn diagram_in_order(f: &Filtration, cells: &[(ElementaryCube, Time)]) -> PersistenceDiagram {
    type F = Gf2147483647;
    let d = f.ambient_dim();
    let index: HashMap<ElementaryCube, usize> =
        cells.iter().enumerate().map(|(i, (c, _))| (*c, i)).collect();
    let mut matrix = SparseMatrix::<F>::new(cells.len());
    for (c, _) in cells {
        let col = c
            .boundary_faces()
            .into_iter()
            .map(|s| (index[&s.cube], F::from_i64(i64::from(s.sign))))
            .collect();
        matrix.push_column(col);
    }
    // top degree first so that clearing applies
    let mut order: Vec<usize> = Vec::with_capacity(cells.len());
    for q in (0..=d).rev() {
        order.extend((0..cells.len()).filter(|&j| cells[j].0.dimension() == q));
    }
    let red = reduce_ordered(&matrix, false, Some(&order), true);

    let mut diagram = PersistenceDiagram::empty(d, f.window().n, f.seed);
    for (j, (_, death)) in cells.iter().enumerate() {
        if let Some(i) = red.low(j) {
            let (sigma, birth) = cells[i];
            if birth < *death {
                diagram.pairs[sigma.dimension()].push(BirthDeathPair {
                    birth,
                    death: *death,
                });
            }
        }
    }
    for (i, (c, birth)) in cells.iter().enumerate() {
        if red.reduced[i].is_empty() && red.pivot_col[i].is_none() && c.dimension() < d {
            diagram.pairs[c.dimension()].push(BirthDeathPair {
                birth: *birth,
                death: f64::INFINITY,
            });
        }
    }
    diagram.sort();
    diagram
}

/// `β_q(s, t)` as `dim Z_q(X(s)) - dim(Z_q(X(s)) ∩ B_q(X(t)))`, where the
/// intersection dimension is `dim Z + rank ∂_{q+1}(X(t)) - dim(Z + B)` and
/// `dim(Z + B)` is the rank of a kernel basis of `∂_q(X(s))` concatenated with
/// the columns of `∂_{q+1}(X(t))`.
pub fn persistent_betti_direct(f: &Filtration, q: usize, s: Time, t: Time) -> Result<usize> {
    type F = Gf2147483647;
    if !(s <= t) || s < 0.0 || !t.is_finite() {
        return Err(Error::Times(format!("need 0 <= s <= t < ∞, got s={s}, t={t}")));
    }
    let d = f.ambient_dim();
    if q >= d {
        return Err(Error::Degree { q, d });
    }
    let xs = f.sublevel(s);
    let xt = f.sublevel(t);
    let dq_s = boundary_matrix::<F>(&xs, q)?;
    let kernel = reduce(&dq_s.matrix, true).kernel_basis();
    let z_dim = kernel.len();

    let dq1_t = boundary_matrix::<F>(&xt, q + 1)?;
    let rank_b = dq1_t.matrix.rank();

    let row_of: HashMap<ElementaryCube, usize> =
        dq1_t.rows.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut joint = SparseMatrix::<F>::new(dq1_t.rows.len());
    for z in kernel {
        joint.push_column(
            z.into_iter()
                .map(|(k, v)| (row_of[&dq_s.cols[k]], v))
                .collect(),
        );
    }
    for col in dq1_t.matrix.columns() {
        joint.push_column(col.clone());
    }
    let sum_dim = joint.rank();
    let intersection = z_dim + rank_b - sum_dim;
    Ok(z_dim - intersection)
}

/// `ξ_q([0, s] x (t, ∞])`.
pub fn quadrant_mass(diagram: &PersistenceDiagram, q: usize, s: Time, t: Time) -> usize {
    diagram
        .degree(q)
        .iter()
        .filter(|p| p.birth <= s && p.death > t)
        .count()
}

/// `ξ_q((s1, s2] x (t1, t2])` by direct count.
pub fn rectangle_mass(
    diagram: &PersistenceDiagram,
    q: usize,
    s1: Time,
    s2: Time,
    t1: Time,
    t2: Time,
) -> Result<usize> {
    check_box(s1, s2, t1, t2)?;
    Ok(diagram
        .degree(q)
        .iter()
        .filter(|p| s1 < p.birth && p.birth <= s2 && t1 < p.death && p.death <= t2)
        .count())
}

/// The inclusion-exclusion value `β(s2,t1) - β(s2,t2) + β(s1,t2) - β(s1,t1)`
/// for any quadrant function `beta`.
pub fn rectangle_from_quadrants(
    mut beta: impl FnMut(Time, Time) -> i64,
    s1: Time,
    s2: Time,
    t1: Time,
    t2: Time,
) -> Result<i64> {
    check_box(s1, s2, t1, t2)?;
    Ok(beta(s2, t1) - beta(s2, t2) + beta(s1, t2) - beta(s1, t1))
}

fn check_box(s1: Time, s2: Time, t1: Time, t2: Time) -> Result<()> {
    if 0.0 <= s1 && s1 <= s2 && s2 <= t1 && t1 <= t2 && t2.is_finite() {
        Ok(())
    } else {
        Err(Error::Times(format!(
            "need 0 <= s1 <= s2 <= t1 <= t2 < ∞, got ({s1}, {s2}, {t1}, {t2})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> ElementaryCube {
        s.parse().unwrap()
    }

    /// Edges and vertices of the unit square born at 1, the square at 2.
    pub(crate) fn hollow_then_fill() -> Filtration {
        let w = Window::new(2, 1).unwrap();
        let sq = c("2;0,0;11");
        Filtration::new(
            w,
            sq.subcubes()
                .into_iter()
                .map(|q| (q, if q.dimension() == 2 { 2.0 } else { 1.0 })),
        )
        .unwrap()
    }

    #[test]
    fn validation_cases() {
        let w = Window::new(2, 1).unwrap();
        let ok = Filtration::new(
            w,
            [(c("2;0,0;10"), 1.0), (c("2;0,0;00"), 0.0), (c("2;1,0;00"), 0.0)],
        )
        .unwrap();
        assert!(ok.validate().is_ok());
        let bad = Filtration::new(
            w,
            [(c("2;0,0;10"), 0.0), (c("2;0,0;00"), 0.0), (c("2;1,0;00"), 1.0)],
        )
        .unwrap();
        let v = bad.validate().unwrap_err();
        assert_eq!((v.face, v.cube), (c("2;1,0;00"), c("2;0,0;10")));
        assert!(Filtration::new(w, []).unwrap().validate().is_ok());
        assert!(compute_diagram(&bad).is_err());
    }

    #[test]
    fn sublevels() {
        let f = hollow_then_fill();
        assert!(f.sublevel(0.5).is_empty());
        assert_eq!(f.sublevel(2.0).len(), 9);
        let hollow = f.sublevel(1.5);
        assert_eq!(hollow.len(), 8);
        assert!(hollow.iter().all(|q| q.dimension() < 2));
    }

    #[test]
    fn hollow_then_fill_diagram() {
        let dgm = compute_diagram(&hollow_then_fill()).unwrap();
        assert_eq!(dgm.degree(1), &[BirthDeathPair { birth: 1.0, death: 2.0 }]);
        assert_eq!(dgm.degree(0), &[BirthDeathPair { birth: 1.0, death: f64::INFINITY }]);
        assert_eq!(quadrant_mass(&dgm, 1, 1.0, 1.5), 1);
        assert_eq!(rectangle_mass(&dgm, 1, 0.5, 1.0, 1.5, 2.5).unwrap(), 1);
        assert_eq!(rectangle_mass(&dgm, 1, 1.0, 1.0, 1.5, 2.5).unwrap(), 0);
        assert!(rectangle_mass(&dgm, 1, 1.0, 0.5, 1.5, 2.5).is_err());
    }

    #[test]
    fn hollow_then_fill_direct() {
        let f = hollow_then_fill();
        assert_eq!(persistent_betti_direct(&f, 1, 1.0, 1.5).unwrap(), 1);
        assert_eq!(persistent_betti_direct(&f, 1, 1.0, 2.0).unwrap(), 0);
        assert_eq!(persistent_betti_direct(&f, 0, 1.0, 2.0).unwrap(), 1);
        assert!(persistent_betti_direct(&f, 0, 2.0, 1.0).is_err());
        assert!(persistent_betti_direct(&f, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn trivial_diagrams() {
        let w = Window::new(2, 1).unwrap();
        let empty = Filtration::new(w, []).unwrap();
        assert_eq!(compute_diagram(&empty).unwrap().total_pairs(), 0);
        let single = Filtration::new(w, [(c("2;0,0;00"), 0.0)]).unwrap();
        let dgm = compute_diagram(&single).unwrap();
        assert_eq!(dgm.degree(0), &[BirthDeathPair { birth: 0.0, death: f64::INFINITY }]);
        assert_eq!(quadrant_mass(&dgm, 0, 0.0, 100.0), 1);
    }

    #[test]
    fn diagram_file_round_trip() {
        let dgm = compute_diagram(&hollow_then_fill()).unwrap();
        let mut buf = Vec::new();
        dgm.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# 2 1 1 0\n0 1 inf\n1 1 2\n");
        let back = PersistenceDiagram::read(&buf[..]).unwrap();
        assert_eq!(back, dgm);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn dump_round_trip() {
        let mut f = hollow_then_fill();
        f.seed = 17;
        let mut buf = Vec::new();
        f.write_dump(&mut buf, &["model test".into()]).unwrap();
        let back = Filtration::read_dump(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn restrict_and_carve() {
        let f = Filtration::from_max_over_faces(Window::new(2, 3).unwrap(), |_| 0.5);
        assert_eq!(f.restrict(3).unwrap(), f);
        let r0 = f.restrict(0).unwrap();
        assert_eq!(r0.len(), 1);
        assert!(f.restrict(4).is_err());
        let block = f.carve(&[2, 2], 1).unwrap();
        assert_eq!(block.len(), Window::new(2, 1).unwrap().all_cubes().len());
        assert!(f.carve(&[3, 0], 1).is_err());
    }
}
