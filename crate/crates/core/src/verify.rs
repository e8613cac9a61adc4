//! The exact property suite.
//!
//! Every check compares two independent computations or evaluates a proven
//! inequality on a fixed corpus of random inputs. A check records how many
//! instances it evaluated and its worst margin: `bound - value` for
//! inequalities, `-|a - b|` for identities. A check passes iff its worst
//! margin is nonnegative (up to the stated float tolerance for the log-MGF
//! checks).

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{binomial, ElementaryCube, Window};
use crate::error::Result;
use crate::field::Gf2147483647;
use crate::homology::{betti, boundary_matrix, face_closure};
use crate::limit_lab::{
    estimate_log_mgf, legendre_transform, linspace, near_additivity_gap, regularity_gap, Grid,
    TimePair,
};
use crate::models::{DistributionSpec, ModelSpec, PerturbationSpec};
use crate::persistence::{
    compute_diagram, diagram_in_order, filtration_order, persistent_betti_direct, quadrant_mass,
    rectangle_from_quadrants, rectangle_mass, Filtration, Time,
};
use crate::rng::SeedSpec;

/// Corpus size of the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Smoke,
    Default,
    Deep,
}

impl Scale {
    fn pick(self, smoke: usize, default: usize, deep: usize) -> usize {
        match self {
            Scale::Smoke => smoke,
            Scale::Default => default,
            Scale::Deep => deep,
        }
    }

    /// Random face-closed sets per ambient dimension for the chain check.
    pub fn chain_sets(self) -> usize {
        self.pick(10, 100, 400)
    }

    /// Random filtrations in the persistence corpus.
    pub fn filtrations(self) -> usize {
        self.pick(20, 200, 800)
    }

    /// Seeds per model for the gap checks.
    pub fn gap_seeds(self) -> usize {
        self.pick(5, 50, 200)
    }

    /// Trials behind the log-MGF check.
    pub fn mgf_trials(self) -> usize {
        self.pick(20, 100, 400)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub count: usize,
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scale: Scale,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Running minimum of margins.
#[derive(Clone, Copy, Debug)]
struct Tally {
    count: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            count: 0,
            worst: f64::INFINITY,
        }
    }

    fn margin(&mut self, m: f64) {
        self.count += 1;
        self.worst = self.worst.min(m);
    }

    fn identity(&mut self, a: f64, b: f64) {
        self.margin(-(a - b).abs());
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            count: self.count + other.count,
            worst: self.worst.min(other.worst),
        }
    }

    fn result(self, name: &str, tolerance: f64) -> CheckResult {
        let worst = if self.count == 0 { 0.0 } else { self.worst + 0.0 };
        CheckResult {
            name: name.to_string(),
            passed: self.count > 0 && worst >= -tolerance,
            count: self.count,
            worst_margin: worst,
        }
    }
}

fn cube(s: &str) -> ElementaryCube {
    s.parse().expect("literal cube")
}

/// Dimensions and boundaries of the vertex, edge and square of `[0,1]^2`.
pub fn check_boundary_examples() -> CheckResult {
    let mut t = Tally::new();
    for (c, dim) in [("2;0,0;00", 0), ("2;0,0;10", 1), ("2;0,0;11", 2)] {
        t.identity(cube(c).dimension() as f64, f64::from(dim));
    }
    let expect: [(&str, Vec<(&str, i8)>); 3] = [
        ("2;0,0;00", vec![]),
        ("2;0,0;10", vec![("2;1,0;00", 1), ("2;0,0;00", -1)]),
        (
            "2;0,0;11",
            vec![("2;1,0;01", 1), ("2;0,0;01", -1), ("2;0,1;10", -1), ("2;0,0;10", 1)],
        ),
    ];
    for (c, faces) in expect {
        let got: BTreeSet<(ElementaryCube, i8)> =
            cube(c).boundary_faces().into_iter().map(|f| (f.cube, f.sign)).collect();
        let want: BTreeSet<(ElementaryCube, i8)> = faces.into_iter().map(|(f, s)| (cube(f), s)).collect();
        t.margin(if got == want { 0.0 } else { -1.0 });
    }
    t.result("boundary_examples", 0.0)
}

/// A random face-closed subset of `Λ^n`.
pub fn random_cubical_set(rng: &mut impl Rng, d: usize, n: u32, density: f64) -> Vec<ElementaryCube> {
    let window = Window::new(d, n).expect("valid window");
    let picked: Vec<ElementaryCube> = window
        .all_cubes()
        .into_iter()
        .filter(|_| rng.random::<f64>() < density)
        .collect();
    face_closure(&picked)
}

/// `∂_q ∘ ∂_{q+1} = 0` on random face-closed sets for `d ∈ {2, 3, 4}`.
pub fn check_chain_complex(scale: Scale) -> CheckResult {
    let per_d = scale.chain_sets();
    let jobs: Vec<(usize, usize)> = [2, 3, 4].iter().flat_map(|&d| (0..per_d).map(move |i| (d, i))).collect();
    let tally = jobs
        .par_iter()
        .map(|&(d, i)| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xC4A1 ^ ((d as u64) << 32) ^ i as u64);
            let n = rng.random_range(1..=2);
            let density = rng.random_range(0.05..0.4);
            let set = random_cubical_set(&mut rng, d, n, density);
            let mut t = Tally::new();
            for q in 1..d {
                let a = boundary_matrix::<Gf2147483647>(&set, q).expect("face closed");
                let b = boundary_matrix::<Gf2147483647>(&set, q + 1).expect("face closed");
                t.margin(-(a.matrix.mul(&b.matrix).nnz() as f64));
            }
            t
        })
        .reduce(Tally::new, Tally::merge);
    tally.result("chain_complex", 0.0)
}

/// Cube counts of a `d`-cube and of windows against brute-force enumeration
/// over all base points and extent masks near the window.
pub fn check_cube_counts() -> CheckResult {
    let mut t = Tally::new();
    for d in 1..=4usize {
        let top = ElementaryCube::new(&vec![0; d], ((1u16 << d) - 1) as u8).expect("valid");
        let mut per_q = vec![0u64; d + 1];
        for c in top.subcubes() {
            per_q[c.dimension()] += 1;
        }
        for (q, &count) in per_q.iter().enumerate() {
            t.identity(count as f64, (binomial(d, q) << (d - q)) as f64);
        }
        for n in 1..=3u32 {
            let window = Window::new(d, n).expect("valid");
            let ni = n as i32;
            let mut brute = vec![0u64; d + 1];
            for base in crate::cube::lattice_box(d, -ni - 1, ni + 1) {
                for mask in 0..(1u8 << d) {
                    let inside = (0..d).all(|a| {
                        let hi = base[a] + i32::from((mask >> a) & 1);
                        base[a] >= -ni && hi <= ni
                    });
                    if inside {
                        brute[mask.count_ones() as usize] += 1;
                    }
                }
            }
            for q in 0..=d {
                let formula = binomial(d, q) * (2 * u64::from(n)).pow(q as u32) * (2 * u64::from(n) + 1).pow((d - q) as u32);
                t.identity(brute[q] as f64, formula as f64);
                t.identity(window.cube_count(q) as f64, formula as f64);
                t.identity(window.cubes(q).expect("q <= d").len() as f64, formula as f64);
            }
        }
    }
    t.result("cube_counts", 0.0)
}

/// Births: i.i.d. raw values `k/10`, `k ∈ 1..=10`, or `∞` with probability
/// `0.1`, then raised to the maximum over faces.
pub fn random_filtration(rng: &mut impl Rng, d: usize, n: u32) -> Filtration {
    let window = Window::new(d, n).expect("valid window");
    let raw: HashMap<ElementaryCube, Time> = window
        .all_cubes()
        .into_iter()
        .map(|c| {
            let t = if rng.random::<f64>() < 0.1 {
                f64::INFINITY
            } else {
                f64::from(rng.random_range(1..=10)) / 10.0
            };
            (c, t)
        })
        .collect();
    Filtration::from_max_over_faces(window, |c| raw[c])
}

/// A filtration `X` with `X(t) ⊂ Y(t)` for every `t`, obtained by delaying
/// some raw births of `Y`.
pub fn delayed_filtration(rng: &mut impl Rng, y: &Filtration) -> Filtration {
    let window = y.window();
    let raw: HashMap<ElementaryCube, Time> = window
        .all_cubes()
        .into_iter()
        .map(|c| {
            let base = y.birth(&c);
            let u = rng.random::<f64>();
            let t = if u < 0.1 {
                f64::INFINITY
            } else if u < 0.3 {
                base + f64::from(rng.random_range(1..=5)) / 10.0
            } else {
                base
            };
            (c, t)
        })
        .collect();
    Filtration::from_max_over_faces(window, |c| raw[c])
}

/// The 25 `(s, t)` points `(a/10, (a+δ)/10)` for `a ∈ {1,3,5,7,9}` and
/// `δ ∈ {0,1,2,5,20}`.
pub fn time_grid() -> Vec<TimePair> {
    let mut out = Vec::new();
    for a in [1u32, 3, 5, 7, 9] {
        for delta in [0u32, 1, 2, 5, 20] {
            out.push((f64::from(a) / 10.0, f64::from(a + delta) / 10.0));
        }
    }
    out
}

/// Filtrations for `d ∈ {2, 3}`, `n ∈ {1, 2, 3}`, reproducible by index.
pub fn persistence_corpus(scale: Scale) -> Vec<Filtration> {
    (0..scale.filtrations())
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xF117 + i as u64);
            let d = 2 + i % 2;
            let n = 1 + ((i / 2) % 3) as u32;
            let mut f = random_filtration(&mut rng, d, n);
            f.seed = i as u64;
            f
        })
        .collect()
}

/// Outcome of the persistence checks on one corpus.
#[derive(Clone, Debug)]
pub struct PersistenceChecks {
    pub k_triangle: CheckResult,
    pub trivial_bound: CheckResult,
    pub difference_bound: CheckResult,
    pub rectangle_nonnegativity: CheckResult,
    pub total_mass: CheckResult,
    pub tie_shuffle: CheckResult,
}

impl PersistenceChecks {
    pub fn all(&self) -> Vec<CheckResult> {
        vec![
            self.k_triangle.clone(),
            self.trivial_bound.clone(),
            self.difference_bound.clone(),
            self.rectangle_nonnegativity.clone(),
            self.total_mass.clone(),
            self.tie_shuffle.clone(),
        ]
    }
}

#[derive(Clone, Copy)]
struct PerFiltration {
    k_triangle: Tally,
    trivial: Tally,
    difference: Tally,
    rectangle: Tally,
    total: Tally,
    shuffle: Tally,
}

impl PerFiltration {
    fn new() -> Self {
        Self {
            k_triangle: Tally::new(),
            trivial: Tally::new(),
            difference: Tally::new(),
            rectangle: Tally::new(),
            total: Tally::new(),
            shuffle: Tally::new(),
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            k_triangle: self.k_triangle.merge(o.k_triangle),
            trivial: self.trivial.merge(o.trivial),
            difference: self.difference.merge(o.difference),
            rectangle: self.rectangle.merge(o.rectangle),
            total: self.total.merge(o.total),
            shuffle: self.shuffle.merge(o.shuffle),
        }
    }
}

fn count_dim(set: &[ElementaryCube], q: usize) -> usize {
    set.iter().filter(|c| c.dimension() == q).count()
}

/// Same cells, with ties of equal birth and dimension randomly reordered.
fn shuffled_order(rng: &mut impl Rng, f: &Filtration) -> Vec<(ElementaryCube, Time)> {
    let mut cells = filtration_order(f);
    let mut start = 0;
    while start < cells.len() {
        let key = (cells[start].1, cells[start].0.dimension());
        let mut end = start;
        while end < cells.len() && (cells[end].1, cells[end].0.dimension()) == key {
            end += 1;
        }
        cells[start..end].shuffle(rng);
        start = end;
    }
    cells
}

fn check_one(f: &Filtration, times: &[TimePair]) -> PerFiltration {
    let mut out = PerFiltration::new();
    let d = f.ambient_dim();
    let dgm = compute_diagram(f).expect("corpus is monotone");
    let mut rng = ChaCha8Rng::seed_from_u64(0x7135 ^ f.seed);

    let shuffled = diagram_in_order(f, &shuffled_order(&mut rng, f));
    out.shuffle.margin(if shuffled == dgm { 0.0 } else { -1.0 });

    let y = f;
    let x = delayed_filtration(&mut rng, y);
    let x_dgm = compute_diagram(&x).expect("monotone by construction");
    let vol = y.window().volume();

    for q in 0..d {
        let pairs = dgm.degree(q).len() as f64;
        out.total.margin(y.window().cube_count(q) as f64 - pairs);
        out.total.margin(3f64.powi(d as i32) * vol - pairs);

        for &(s, t) in times {
            let from_diagram = quadrant_mass(&dgm, q, s, t);
            let direct = persistent_betti_direct(f, q, s, t).expect("valid times");
            out.k_triangle.identity(from_diagram as f64, direct as f64);

            let ys = y.sublevel(s);
            let b_s = betti(&ys, q).expect("face closed");
            out.trivial.margin(b_s as f64 - direct as f64);
            out.trivial.margin(count_dim(&ys, q) as f64 - b_s as f64);

            let x_beta = quadrant_mass(&x_dgm, q, s, t) as f64;
            let x_s = x.sublevel(s);
            let yt = y.sublevel(t);
            let x_t = x.sublevel(t);
            let rhs = (count_dim(&ys, q) - count_dim(&x_s, q)) + (count_dim(&yt, q + 1) - count_dim(&x_t, q + 1));
            out.difference.margin(rhs as f64 - (from_diagram as f64 - x_beta).abs());
        }

        let values: Vec<f64> = (1..=10).map(|k| f64::from(k) / 10.0).chain([0.05, 0.55, 3.0]).collect();
        for (a, &s1) in values.iter().enumerate() {
            for &s2 in &values[a..] {
                for &t1 in values.iter().filter(|&&v| v >= s2) {
                    for &t2 in values.iter().filter(|&&v| v >= t1) {
                        if !(s1 < s2 && t1 < t2) {
                            continue;
                        }
                        let ie = rectangle_from_quadrants(|s, t| quadrant_mass(&dgm, q, s, t) as i64, s1, s2, t1, t2)
                            .expect("ordered box");
                        let direct = rectangle_mass(&dgm, q, s1, s2, t1, t2).expect("ordered box");
                        out.rectangle.margin(ie as f64);
                        out.rectangle.identity(ie as f64, direct as f64);
                    }
                }
            }
        }
    }
    out
}

/// The persistence checks on a corpus: two routes to persistent Betti
/// numbers, the trivial and nested-difference bounds, rectangle masses, total
/// mass and invariance under reordering of ties.
pub fn check_persistence(corpus: &[Filtration]) -> PersistenceChecks {
    let times = time_grid();
    let t = corpus
        .par_iter()
        .map(|f| check_one(f, &times))
        .reduce(PerFiltration::new, PerFiltration::merge);
    PersistenceChecks {
        k_triangle: t.k_triangle.result("k_triangle", 0.0),
        trivial_bound: t.trivial.result("trivial_bound", 0.0),
        difference_bound: t.difference.result("difference_bound", 0.0),
        rectangle_nonnegativity: t.rectangle.result("rectangle_nonnegativity", 0.0),
        total_mass: t.total.result("total_mass", 0.0),
        tie_shuffle: t.shuffle.result("tie_shuffle", 0.0),
    }
}

/// Models used by the sampler and gap checks, with `d = 2`.
pub fn gap_models() -> Vec<ModelSpec> {
    let uniform = vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }];
    vec![
        ModelSpec::upper(2, uniform.clone()),
        ModelSpec::lower(2, uniform),
        ModelSpec::perturbed_lattice(2, PerturbationSpec::UniformBall { radius: 0.3 }),
    ]
}

/// Two `(s, t)` pairs matched to the birth range of each model.
pub fn gap_pairs(model: &ModelSpec) -> Vec<TimePair> {
    match model.tag() {
        "perturbed_lattice" => vec![(1.0, 1.2), (1.1, 1.4)],
        _ => vec![(0.3, 0.6), (0.5, 0.8)],
    }
}

/// Near-additivity and regularity gaps against their bounds for `d = 2`,
/// `k ∈ {3, 4}`, `r = 1`, `m ∈ {1, 2}`, `n ∈ {7, 9}`, every `q < d`.
pub fn check_gaps(scale: Scale) -> (CheckResult, CheckResult) {
    let seeds = scale.gap_seeds() as u64;
    let models = gap_models();
    let jobs: Vec<(usize, u64)> = (0..models.len()).flat_map(|m| (0..seeds).map(move |s| (m, s))).collect();
    let (near, reg) = jobs
        .par_iter()
        .map(|&(mi, s)| {
            let model = &models[mi];
            let pairs = gap_pairs(model);
            let seed = SeedSpec::new(0x6A9 + mi as u64, s);
            let (mut near, mut reg) = (Tally::new(), Tally::new());
            for q in 0..model.d {
                for k in [3u32, 4] {
                    for m in [1u32, 2] {
                        let g = near_additivity_gap(model, q, &pairs, k, 1, m, seed).expect("valid parameters");
                        near.margin(g.bound - g.measured);
                    }
                    for n in [7u32, 9] {
                        let g = regularity_gap(model, q, &pairs, k, n, seed).expect("valid parameters");
                        reg.margin(g.bound - g.measured);
                    }
                }
            }
            (near, reg)
        })
        .reduce(
            || (Tally::new(), Tally::new()),
            |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
        );
    (near.result("near_additivity_gap", 0.0), reg.result("regularity_gap", 0.0))
}

/// Outcome of the log-MGF structure checks.
#[derive(Clone, Debug)]
pub struct MgfChecks {
    pub zero: CheckResult,
    pub convexity: CheckResult,
    pub legendre_nonnegative: CheckResult,
    pub legendre_convexity: CheckResult,
}

/// `φ̂(0) = 0`, midpoint convexity of `φ̂` (1e-9), and nonnegativity and
/// convexity (1e-12) of its grid transform, for `h = 1` and `h = 2`.
pub fn check_mgf(scale: Scale) -> Result<MgfChecks> {
    let model = ModelSpec::lower(2, vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]);
    let trials = scale.mgf_trials() as u64;
    let mut zero = Tally::new();
    let mut convex = Tally::new();
    let mut nonneg = Tally::new();
    let mut lconvex = Tally::new();
    let cases: [(Vec<TimePair>, usize); 2] = [(vec![(0.5, 0.5)], 81), (vec![(0.3, 0.6), (0.5, 0.8)], 21)];
    for (pairs, points) in cases {
        let h = pairs.len();
        let lambda = Grid::new(vec![linspace(-2.0, 2.0, points); h])?;
        let phi = estimate_log_mgf(&model, 0, &pairs, &lambda, 3, trials, 0x3F)?;
        zero.identity(phi.value_at(&vec![0.0; h]).unwrap_or(f64::NAN), 0.0);
        convex.margin(-phi.convexity_defect());
        let x = Grid::new(vec![linspace(0.0, 2.0, 41); h])?;
        let star = legendre_transform(&phi, &x)?;
        for v in &star.values {
            nonneg.margin(*v);
        }
        lconvex.margin(-star.convexity_defect());
    }
    Ok(MgfChecks {
        zero: zero.result("mgf_zero", 0.0),
        convexity: convex.result("mgf_convexity", 1e-9),
        legendre_nonnegative: nonneg.result("legendre_nonnegative", 0.0),
        legendre_convexity: lconvex.result("legendre_convexity", 1e-12),
    })
}

/// Every model's samples satisfy the monotone face condition, are
/// reproducible from their seed, and agree between a window and its
/// restriction.
pub fn check_samplers(scale: Scale) -> CheckResult {
    let mut models = gap_models();
    models.push(ModelSpec::ball_cover(2, PerturbationSpec::UniformBall { radius: 0.3 }, 6));
    models.push(ModelSpec::upper(
        3,
        vec![DistributionSpec::Exponential { rate: 1.0 }],
    ));
    let per = scale.pick(2, 5, 20) as u64;
    let jobs: Vec<(usize, u64)> = (0..models.len()).flat_map(|m| (0..per).map(move |s| (m, s))).collect();
    jobs.par_iter()
        .map(|&(mi, s)| {
            let model = &models[mi];
            let seed = SeedSpec::new(0x5A, s);
            let mut t = Tally::new();
            let big = model.sample(3, seed).expect("valid model");
            t.margin(if big.validate().is_ok() { 0.0 } else { -1.0 });
            let again = model.sample(3, seed).expect("valid model");
            t.margin(if again == big { 0.0 } else { -1.0 });
            let small = model.sample(2, seed).expect("valid model");
            let restricted = big.restrict(2).expect("smaller window");
            t.margin(if small == restricted { 0.0 } else { -1.0 });
            t
        })
        .reduce(Tally::new, Tally::merge)
        .result("sampler_validity", 0.0)
}

/// Runs the whole suite.
pub fn run_suite(scale: Scale) -> Result<VerifyReport> {
    let mut checks = vec![check_boundary_examples(), check_chain_complex(scale), check_cube_counts()];
    checks.extend(check_persistence(&persistence_corpus(scale)).all());
    let (near, reg) = check_gaps(scale);
    checks.push(near);
    checks.push(reg);
    let mgf = check_mgf(scale)?;
    checks.extend([mgf.zero, mgf.convexity, mgf.legendre_nonnegative, mgf.legendre_convexity]);
    checks.push(check_samplers(scale));
    Ok(VerifyReport {
        scale,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
