//! Monte Carlo estimators for the limit objects of random cubical
//! filtrations, and exact measurements of the block-decomposition gaps.
//!
//! Trials run in parallel but every reduction over trials is a sequential
//! fold in trial order, so results do not depend on the number of workers.
//! Trial `i` of an estimate always uses the realization
//! `SeedSpec { master, trial: i }`.

use rayon::prelude::*;

use crate::cube::lattice_box;
use crate::error::{Error, Result};
use crate::models::{block_center, ModelSpec};
use crate::persistence::{
    compute_diagram, quadrant_mass, rectangle_from_quadrants, BirthDeathPair, PersistenceDiagram,
    Time,
};
use crate::rng::SeedSpec;

/// One `(s, t)` point with `0 <= s <= t < ∞`.
pub type TimePair = (Time, Time);

fn check_pairs(pairs: &[TimePair]) -> Result<()> {
    for &(s, t) in pairs {
        if !(0.0 <= s && s <= t && t.is_finite()) {
            return Err(Error::Times(format!("pair ({s}, {t}) violates 0 <= s <= t < ∞")));
        }
    }
    Ok(())
}

fn check_degree(model: &ModelSpec, q: usize) -> Result<()> {
    if q >= model.d {
        return Err(Error::Degree { q, d: model.d });
    }
    Ok(())
}

/// Diagram of trial `trial` on `Λ^n`.
pub fn trial_diagram(model: &ModelSpec, n: u32, master: u64, trial: u64) -> Result<PersistenceDiagram> {
    compute_diagram(&model.sample(n, SeedSpec::new(master, trial))?)
}

/// Runs `f(trial)` for `0..trials` on the current rayon pool, in trial order.
pub fn run_trials<T: Send>(trials: u64, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(f).collect()
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / count as f64;
    if count == 1 {
        return (mean, 0.0);
    }
    let ss = values.fold(0.0, |acc, v| acc + (v - mean) * (v - mean));
    (mean, (ss / (count - 1) as f64).sqrt())
}

/// Per-trial persistent Betti numbers `β_q(s_i, t_i)` and their densities.
#[derive(Clone, Debug, PartialEq)]
pub struct PbEstimate {
    pub q: usize,
    pub n: u32,
    pub volume: f64,
    pub pairs: Vec<TimePair>,
    /// `betti[trial][pair]`.
    pub betti: Vec<Vec<usize>>,
    /// Per-pair mean of `β / |Λ^n|`.
    pub mean: Vec<f64>,
    /// Per-pair sample standard deviation of `β / |Λ^n|`.
    pub std: Vec<f64>,
}

impl PbEstimate {
    /// `β / |Λ^n|` for one trial and pair.
    pub fn value(&self, trial: usize, pair: usize) -> f64 {
        self.betti[trial][pair] as f64 / self.volume
    }

    fn from_betti(q: usize, n: u32, volume: f64, pairs: &[TimePair], betti: Vec<Vec<usize>>) -> Self {
        let (mean, std) = (0..pairs.len())
            .map(|i| mean_std(betti.iter().map(move |row| row[i] as f64 / volume)))
            .unzip();
        Self {
            q,
            n,
            volume,
            pairs: pairs.to_vec(),
            betti,
            mean,
            std,
        }
    }
}

fn masses(diagram: &PersistenceDiagram, q: usize, pairs: &[TimePair]) -> Vec<usize> {
    pairs.iter().map(|&(s, t)| quadrant_mass(diagram, q, s, t)).collect()
}

/// Estimates `E[β_q(s, t)] / |Λ^n|` for each pair.
pub fn estimate_pb_density(
    model: &ModelSpec,
    q: usize,
    pairs: &[TimePair],
    n: u32,
    trials: u64,
    master: u64,
) -> Result<PbEstimate> {
    check_degree(model, q)?;
    check_pairs(pairs)?;
    if trials == 0 {
        return Err(Error::Params("trials must be at least 1".into()));
    }
    let betti = run_trials(trials, |t| Ok(masses(&trial_diagram(model, n, master, t)?, q, pairs)))?;
    let volume = crate::cube::Window::new(model.d, n)?.volume();
    Ok(PbEstimate::from_betti(q, n, volume, pairs, betti))
}

/// A rectangle of the dyadic family of fineness `l`, with `s = 2^{-(l+1)}`:
/// `i = 1` is the left-closed strip `[0, s] x ((j-1)s, js]`, `i >= 2` the box
/// `((i-1)s, is] x ((j-1)s, js]`; always `j - i >= 2` and `j <= l 2^{l+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub i: u32,
    pub j: u32,
}

impl Rect {
    /// `(s1, s2, t1, t2)`; for the strip `s1 = 0` and the birth side is closed.
    pub fn bounds(&self, l: u32) -> (f64, f64, f64, f64) {
        let h = scale(l);
        let s1 = if self.i == 1 { 0.0 } else { f64::from(self.i - 1) / h };
        (s1, f64::from(self.i) / h, f64::from(self.j - 1) / h, f64::from(self.j) / h)
    }

    /// Upper-right corner.
    pub fn upper_right(&self, l: u32) -> (f64, f64) {
        let (_, s2, _, t2) = self.bounds(l);
        (s2, t2)
    }

    pub fn contains(&self, l: u32, p: &BirthDeathPair) -> bool {
        let (s1, s2, t1, t2) = self.bounds(l);
        let birth_ok = if self.i == 1 { p.birth >= 0.0 } else { p.birth > s1 };
        birth_ok && p.birth <= s2 && p.death > t1 && p.death <= t2
    }
}

fn scale(l: u32) -> f64 {
    2f64.powi(l as i32 + 1)
}

/// Largest index `l 2^{l+1}`.
fn top_index(l: u32) -> u32 {
    l * (1u32 << (l + 1))
}

/// The rectangles of fineness `l` in `(i, j)` order.
pub fn rectangles(l: u32) -> Vec<Rect> {
    let top = top_index(l);
    (1..=top.saturating_sub(2))
        .flat_map(|i| (i + 2..=top).map(move |j| Rect { i, j }))
        .collect()
}

/// Position of `rect` in [`rectangles`].
fn rect_index(l: u32, rect: Rect) -> usize {
    let top = top_index(l) as usize;
    let i = rect.i as usize;
    // rows i' < i hold top - i' - 1 rectangles each
    let before = (1..i).map(|ip| top - ip - 1).sum::<usize>();
    before + (rect.j as usize - i - 2)
}

/// The unique rectangle holding a finite pair, if any.
pub fn locate(l: u32, p: &BirthDeathPair) -> Option<Rect> {
    if !p.death.is_finite() {
        return None;
    }
    let h = scale(l);
    let i = ((p.birth * h).ceil() as i64).max(1);
    let j = (p.death * h).ceil() as i64;
    (j - i >= 2 && j <= i64::from(top_index(l))).then(|| Rect {
        i: i as u32,
        j: j as u32,
    })
}

/// Rectangle counts of one diagram degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub l: u32,
    /// Aligned with [`rectangles`]`(l)`.
    pub counts: Vec<u64>,
    /// Finite pairs outside every rectangle.
    pub overflow: u64,
    /// Pairs with infinite death.
    pub infinite: u64,
}

impl Histogram {
    pub fn zero(l: u32) -> Self {
        Self {
            l,
            counts: vec![0; rectangles(l).len()],
            overflow: 0,
            infinite: 0,
        }
    }

    pub fn count(&self, rect: Rect) -> u64 {
        self.counts[rect_index(self.l, rect)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow + self.infinite
    }

    fn add(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.infinite += other.infinite;
    }
}

/// Bins the degree-`q` pairs of a diagram.
pub fn histogram(diagram: &PersistenceDiagram, q: usize, l: u32) -> Result<Histogram> {
    if l == 0 || l > 12 {
        return Err(Error::Params(format!("fineness l={l} must be in 1..=12")));
    }
    let mut h = Histogram::zero(l);
    for p in diagram.degree(q) {
        if !p.death.is_finite() {
            h.infinite += 1;
        } else if let Some(r) = locate(l, p) {
            h.counts[rect_index(l, r)] += 1;
        } else {
            h.overflow += 1;
        }
    }
    Ok(h)
}

/// Averaged histograms and quadrant masses over trials.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanDiagram {
    pub q: usize,
    pub n: u32,
    pub trials: u64,
    pub volume: f64,
    /// Counts summed over trials.
    pub summed: Histogram,
    /// Quadrant masses `β_q(s, t)` per trial on the requested grid.
    pub quadrants: PbEstimate,
    /// Largest per-trial mismatch between a rectangle count and its
    /// inclusion-exclusion value from corner quadrant masses (0 when exact).
    pub inclusion_exclusion_error: i64,
}

impl MeanDiagram {
    /// `E[ξ_q(I)] / |Λ^n|` per rectangle, aligned with [`rectangles`].
    pub fn normalized(&self) -> Vec<f64> {
        let denom = self.trials as f64 * self.volume;
        self.summed.counts.iter().map(|&c| c as f64 / denom).collect()
    }
}

/// Mismatch between a histogram and the alternating corner sums of the
/// quadrant masses of the same diagram.
pub fn inclusion_exclusion_error(diagram: &PersistenceDiagram, q: usize, hist: &Histogram) -> Result<i64> {
    let mut worst = 0i64;
    for rect in rectangles(hist.l) {
        let (s1, s2, t1, t2) = rect.bounds(hist.l);
        let beta = |s: Time, t: Time| quadrant_mass(diagram, q, s, t) as i64;
        let value = if rect.i == 1 {
            beta(s2, t1) - beta(s2, t2)
        } else {
            rectangle_from_quadrants(beta, s1, s2, t1, t2)?
        };
        worst = worst.max((value - hist.count(rect) as i64).abs());
    }
    Ok(worst)
}

/// Estimates `E[ξ_q] / |Λ^n|` on the rectangles of fineness `l`, together
/// with the quadrant masses at `grid` for every trial.
pub fn estimate_mean_diagram(
    model: &ModelSpec,
    q: usize,
    n: u32,
    trials: u64,
    l: u32,
    grid: &[TimePair],
    master: u64,
) -> Result<MeanDiagram> {
    check_degree(model, q)?;
    check_pairs(grid)?;
    if trials == 0 {
        return Err(Error::Params("trials must be at least 1".into()));
    }
    let per_trial = run_trials(trials, |t| {
        let dgm = trial_diagram(model, n, master, t)?;
        let hist = histogram(&dgm, q, l)?;
        let err = inclusion_exclusion_error(&dgm, q, &hist)?;
        Ok((hist, masses(&dgm, q, grid), err))
    })?;
    let mut summed = Histogram::zero(l);
    let mut betti = Vec::with_capacity(per_trial.len());
    let mut worst = 0;
    for (hist, m, err) in per_trial {
        summed.add(&hist);
        betti.push(m);
        worst = worst.max(err);
    }
    let volume = crate::cube::Window::new(model.d, n)?.volume();
    Ok(MeanDiagram {
        q,
        n,
        trials,
        volume,
        summed,
        quadrants: PbEstimate::from_betti(q, n, volume, grid, betti),
        inclusion_exclusion_error: worst,
    })
}

/// A finite axis-aligned lattice in `ℝ^h`, axes strictly increasing. Points
/// are enumerated with the first axis varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(Vec::is_empty) {
            return Err(Error::Params("grid needs at least one point per axis".into()));
        }
        for a in &axes {
            if !a.iter().all(|v| v.is_finite()) || !a.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Params(format!("grid axis {a:?} is not strictly increasing")));
            }
        }
        Ok(Self { axes })
    }

    /// `points` evenly spaced values from `min` to `max` on each of `h` axes.
    pub fn uniform(h: usize, min: f64, max: f64, points: usize) -> Result<Self> {
        Self::new(vec![linspace(min, max, points); h])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of flat position `k`.
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (a, axis) in self.axes.iter().enumerate().rev() {
            idx[a] = k % axis.len();
            k /= axis.len();
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, axis)| axis[i])
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Flat positions of every triple `(a, b, c)` of consecutive points along
    /// one axis.
    pub fn collinear_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.len() {
            let idx = self.multi_index(k);
            for (a, axis) in self.axes.iter().enumerate() {
                if idx[a] + 2 < axis.len() {
                    let mut mid = idx.clone();
                    mid[a] += 1;
                    let mut hi = idx.clone();
                    hi[a] += 2;
                    out.push((k, self.flat_index(&mid), self.flat_index(&hi)));
                }
            }
        }
        out
    }
}

pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..points)
            .map(|k| {
                if k + 1 == points {
                    max
                } else {
                    min + (max - min) * k as f64 / (points - 1) as f64
                }
            })
            .collect(),
    }
}

/// Provenance of a grid function.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridMeta {
    pub n: u32,
    pub trials: u64,
    pub model: String,
}

/// Values of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub meta: GridMeta,
}

impl GridFunction {
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.points().map(|p| f(&p)).collect();
        Self {
            grid,
            values,
            meta: GridMeta::default(),
        }
    }

    /// Value at `point` if it lies exactly on the grid.
    pub fn value_at(&self, point: &[f64]) -> Option<f64> {
        let idx: Option<Vec<usize>> = point
            .iter()
            .zip(self.grid.axes())
            .map(|(v, axis)| axis.iter().position(|a| a == v))
            .collect();
        idx.map(|i| self.values[self.grid.flat_index(&i)])
    }

    /// Position and value of the smallest entry (first on ties).
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best })
    }

    /// Largest violation of midpoint convexity `2 f(b) <= f(a) + f(c)` over
    /// consecutive collinear triples, scaled by the spacing when uneven.
    pub fn convexity_defect(&self) -> f64 {
        self.grid
            .collinear_triples()
            .into_iter()
            .map(|(a, b, c)| {
                let (pa, pb, pc) = (self.grid.point(a), self.grid.point(b), self.grid.point(c));
                let axis = (0..pa.len()).find(|&i| pa[i] != pc[i]).expect("distinct points");
                let (x0, x1, x2) = (pa[axis], pb[axis], pc[axis]);
                let w = (x2 - x1) / (x2 - x0);
                let interp = w * self.values[a] + (1.0 - w) * self.values[c];
                self.values[b] - interp
            })
            .fold(0.0, f64::max)
    }
}

/// `|Λ|^{-1} log( mean_k exp(<λ, samples[k]>) )` on every grid point, with
/// the log-sum-exp shifted by the largest exponent.
pub fn log_mgf_from_samples(samples: &[Vec<f64>], volume: f64, grid: &Grid) -> Result<GridFunction> {
    if samples.is_empty() {
        return Err(Error::Params("no samples".into()));
    }
    if samples.iter().any(|s| s.len() != grid.dim()) {
        return Err(Error::Params("sample dimension does not match the grid".into()));
    }
    let log_count = (samples.len() as f64).ln();
    let values = grid
        .points()
        .map(|lambda| {
            let exps: Vec<f64> = samples
                .iter()
                .map(|s| s.iter().zip(&lambda).map(|(b, l)| b * l).sum())
                .collect();
            let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = exps.iter().map(|e| (e - top).exp()).sum();
            (top + sum.ln() - log_count) / volume
        })
        .collect();
    Ok(GridFunction {
        grid: grid.clone(),
        values,
        meta: GridMeta::default(),
    })
}

/// Empirical `φ̂(λ) = |Λ^n|^{-1} log E[exp(Σ λ_i β_q(s_i, t_i))]` from one
/// common set of trials shared by every `λ`.
pub fn estimate_log_mgf(
    model: &ModelSpec,
    q: usize,
    pairs: &[TimePair],
    lambda: &Grid,
    n: u32,
    trials: u64,
    master: u64,
) -> Result<GridFunction> {
    if trials < 2 {
        return Err(Error::Params("log-MGF estimation needs at least 2 trials".into()));
    }
    if lambda.dim() != pairs.len() {
        return Err(Error::Params(format!(
            "λ-grid has dimension {} but there are {} pairs",
            lambda.dim(),
            pairs.len()
        )));
    }
    let pb = estimate_pb_density(model, q, pairs, n, trials, master)?;
    let samples: Vec<Vec<f64>> = pb
        .betti
        .iter()
        .map(|row| row.iter().map(|&b| b as f64).collect())
        .collect();
    let mut phi = log_mgf_from_samples(&samples, pb.volume, lambda)?;
    phi.meta = GridMeta {
        n,
        trials,
        model: model.tag().to_string(),
    };
    Ok(phi)
}

/// Grid Fenchel-Legendre transform `φ*(x) = max_λ <λ, x> - φ(λ)` over the
/// λ-grid of `phi`. This is a lower bound of the transform over all `λ`.
pub fn legendre_transform(phi: &GridFunction, x: &Grid) -> Result<GridFunction> {
    if phi.grid.dim() != x.dim() {
        return Err(Error::Params("λ-grid and x-grid dimensions differ".into()));
    }
    if phi.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Params("φ must be finite on its grid".into()));
    }
    let lambdas: Vec<Vec<f64>> = phi.grid.points().collect();
    let values = x
        .points()
        .map(|xp| {
            lambdas
                .iter()
                .zip(&phi.values)
                .map(|(l, v)| l.iter().zip(&xp).map(|(a, b)| a * b).sum::<f64>() - v)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(GridFunction {
        grid: x.clone(),
        values,
        meta: phi.meta.clone(),
    })
}

/// One row of an LLN sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub pair: TimePair,
    pub mean: f64,
    pub std: f64,
}

/// Mean and spread of `β_q(s, t) / |Λ^n|` along a ladder of windows.
pub fn lln_sweep(
    model: &ModelSpec,
    q: usize,
    pairs: &[TimePair],
    n_list: &[u32],
    trials: u64,
    master: u64,
) -> Result<Vec<SweepRow>> {
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Params("window ladder must be increasing".into()));
    }
    let mut rows = Vec::new();
    for &n in n_list {
        let est = estimate_pb_density(model, q, pairs, n, trials, master)?;
        for (i, &pair) in pairs.iter().enumerate() {
            rows.push(SweepRow {
                n,
                pair,
                mean: est.mean[i],
                std: est.std[i],
            });
        }
    }
    Ok(rows)
}

/// L1 distances between normalized mean histograms at consecutive windows of
/// the ladder, `out[k] = |h(n_{k+1}) - h(n_k)|_1`.
pub fn lln_sweep_histogram(
    model: &ModelSpec,
    q: usize,
    l: u32,
    n_list: &[u32],
    trials: u64,
    master: u64,
) -> Result<Vec<f64>> {
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Params("window ladder must be increasing".into()));
    }
    let hists: Vec<Vec<f64>> = n_list
        .iter()
        .map(|&n| estimate_mean_diagram(model, q, n, trials, l, &[], master).map(|m| m.normalized()))
        .collect::<Result<_>>()?;
    Ok(hists
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapKind {
    NearAdditivity,
    Regularity,
}

impl GapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapKind::NearAdditivity => "near_additivity",
            GapKind::Regularity => "regularity",
        }
    }
}

/// A measured block-decomposition gap against its deterministic bound.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub kind: GapKind,
    pub k: u32,
    pub r: u32,
    pub m: u32,
    pub n: u32,
    pub h: usize,
    /// Euclidean gap divided by the window volume.
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

fn euclidean_gap(a: &[usize], b: &[usize]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Compares `S^{(2m+1)k}` with the sum of the `(2m+1)^d` blocks
/// `S^{k-r,z}` carved from the same realization; the bound is
/// `3^d √h (1 - (1 - r/k)^d)`.
pub fn near_additivity_gap(
    model: &ModelSpec,
    q: usize,
    pairs: &[TimePair],
    k: u32,
    r: u32,
    m: u32,
    seed: SeedSpec,
) -> Result<GapReport> {
    check_degree(model, q)?;
    check_pairs(pairs)?;
    if k <= r {
        return Err(Error::Params(format!("need k > r, got k={k}, r={r}")));
    }
    // a single block needs no independence
    let range = model.dependence_range();
    if m > 0 && 2 * r <= range {
        return Err(Error::NotIndependent { two_r: 2 * r, range });
    }
    let big_n = (2 * m + 1) * k;
    let big = model.sample(big_n, seed)?;
    let whole = masses(&compute_diagram(&big)?, q, pairs);
    let mut blocks = vec![0usize; pairs.len()];
    for z in lattice_box(model.d, -(m as i32), m as i32) {
        let block = big.carve(&block_center(k, &z), k - r)?;
        for (acc, v) in blocks.iter_mut().zip(masses(&compute_diagram(&block)?, q, pairs)) {
            *acc += v;
        }
    }
    let volume = crate::cube::Window::new(model.d, big_n)?.volume();
    let measured = euclidean_gap(&whole, &blocks) / volume;
    let d = model.d as i32;
    let h = pairs.len();
    let bound = 3f64.powi(d) * (h as f64).sqrt() * (1.0 - (1.0 - f64::from(r) / f64::from(k)).powi(d));
    Ok(GapReport {
        kind: GapKind::NearAdditivity,
        k,
        r,
        m,
        n: big_n,
        h,
        measured,
        bound,
        pass: measured <= bound,
    })
}

/// `m_n` with `(2m_n + 1)k <= n < (2m_n + 3)k`.
pub fn regularity_m(k: u32, n: u32) -> Result<u32> {
    if k == 0 || k > n {
        return Err(Error::Params(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    Ok((n / k - 1) / 2)
}

/// Compares `S^n` with `S^{(2m_n+1)k}` from the same realization; the bound
/// is `3^d √h (1 - ((2m_n+1)k / n)^d)`.
pub fn regularity_gap(
    model: &ModelSpec,
    q: usize,
    pairs: &[TimePair],
    k: u32,
    n: u32,
    seed: SeedSpec,
) -> Result<GapReport> {
    check_degree(model, q)?;
    check_pairs(pairs)?;
    let m = regularity_m(k, n)?;
    let inner_n = (2 * m + 1) * k;
    let outer = model.sample(n, seed)?;
    let inner = outer.restrict(inner_n)?;
    let a = masses(&compute_diagram(&outer)?, q, pairs);
    let b = masses(&compute_diagram(&inner)?, q, pairs);
    let volume = crate::cube::Window::new(model.d, n)?.volume();
    let measured = euclidean_gap(&a, &b) / volume;
    let d = model.d as i32;
    let h = pairs.len();
    let bound = 3f64.powi(d) * (h as f64).sqrt() * (1.0 - (f64::from(inner_n) / f64::from(n)).powi(d));
    Ok(GapReport {
        kind: GapKind::Regularity,
        k,
        r: 0,
        m,
        n,
        h,
        measured,
        bound,
        pass: measured <= bound,
    })
}

/// A function on `Δ` tabulated on a regular grid with spacing `step` from
/// `origin`, bilinearly interpolated and zero outside the table.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedFn {
    pub origin: (f64, f64),
    pub step: f64,
    /// `values[a][b]` at `(origin.0 + a step, origin.1 + b step)`.
    pub values: Vec<Vec<f64>>,
}

impl TabulatedFn {
    pub fn from_fn(origin: (f64, f64), step: f64, size: (usize, usize), f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..size.0)
            .map(|a| {
                (0..size.1)
                    .map(|b| f(origin.0 + a as f64 * step, origin.1 + b as f64 * step))
                    .collect()
            })
            .collect();
        Self { origin, step, values }
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let u = (s - self.origin.0) / self.step;
        let v = (t - self.origin.1) / self.step;
        let (na, nb) = (self.values.len(), self.values.first().map_or(0, Vec::len));
        if !(u >= 0.0 && v >= 0.0) || na == 0 || nb == 0 {
            return 0.0;
        }
        let (a, b) = (u.floor() as usize, v.floor() as usize);
        if a >= na || b >= nb || (a + 1 == na && u > a as f64) || (b + 1 == nb && v > b as f64) {
            return 0.0;
        }
        let (fu, fv) = (u - a as f64, v - b as f64);
        let at = |i: usize, j: usize| self.values[i.min(na - 1)][j.min(nb - 1)];
        (1.0 - fu) * (1.0 - fv) * at(a, b)
            + fu * (1.0 - fv) * at(a + 1, b)
            + (1.0 - fu) * fv * at(a, b + 1)
            + fu * fv * at(a + 1, b + 1)
    }
}

/// `Σ_I f(UR(I)) ξ_q(I)` over the rectangles of fineness `l`, alongside the
/// exact `Σ_pairs f(b, d)` over finite pairs.
pub fn piecewise_constant_integral(
    diagram: &PersistenceDiagram,
    q: usize,
    f: &TabulatedFn,
    l: u32,
) -> Result<(f64, f64)> {
    let hist = histogram(diagram, q, l)?;
    let approx = rectangles(l)
        .iter()
        .zip(&hist.counts)
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| {
            let (s, t) = r.upper_right(l);
            f.eval(s, t) * c as f64
        })
        .sum();
    let exact = diagram
        .degree(q)
        .iter()
        .filter(|p| p.death.is_finite())
        .map(|p| f.eval(p.birth, p.death))
        .sum();
    Ok((approx, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::DistributionSpec;

    fn pair(birth: f64, death: f64) -> BirthDeathPair {
        BirthDeathPair { birth, death }
    }

    fn diagram_of(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        let mut d = PersistenceDiagram::empty(2, 1, 0);
        d.pairs[0] = pairs.iter().map(|&(b, t)| pair(b, t)).collect();
        d
    }

    #[test]
    fn locate_examples() {
        assert_eq!(locate(2, &pair(1.0, 2.0)), Some(Rect { i: 8, j: 16 }));
        assert_eq!(locate(1, &pair(1.0, 2.0)), None);
        assert_eq!(locate(1, &pair(0.0, 0.5)), None);
        assert_eq!(locate(1, &pair(0.0, 0.75)), Some(Rect { i: 1, j: 3 }));
        assert_eq!(locate(1, &pair(0.25, 0.75)), Some(Rect { i: 1, j: 3 }));
        assert_eq!(locate(1, &pair(0.3, 0.75)), None);
    }

    #[test]
    fn rectangle_family_is_disjoint_and_indexed() {
        for l in 1..=3 {
            let rects = rectangles(l);
            for (k, r) in rects.iter().enumerate() {
                assert_eq!(rect_index(l, *r), k);
            }
            // dyadic midpoints land in exactly one rectangle
            let h = scale(l);
            for r in &rects {
                let (s1, s2, t1, t2) = r.bounds(l);
                let mid = pair((s1 + s2) / 2.0, (t1 + t2) / 2.0);
                let hits = rects.iter().filter(|o| o.contains(l, &mid)).count();
                assert_eq!(hits, 1);
                assert_eq!(locate(l, &mid), Some(*r));
                assert_eq!(locate(l, &pair(s2, t2)), Some(*r), "upper right corner, h={h}");
            }
        }
    }

    #[test]
    fn empty_histogram() {
        let h = histogram(&diagram_of(&[]), 0, 2).unwrap();
        assert_eq!(h.total(), 0);
        assert!(histogram(&diagram_of(&[]), 0, 0).is_err());
    }

    #[test]
    fn histogram_counters() {
        let d = diagram_of(&[(1.0, 2.0), (0.0, f64::INFINITY), (0.1, 0.2), (0.0, 5.0)]);
        let h = histogram(&d, 0, 2).unwrap();
        assert_eq!(h.count(Rect { i: 8, j: 16 }), 1);
        assert_eq!(h.infinite, 1);
        assert_eq!(h.overflow, 2);
        assert_eq!(inclusion_exclusion_error(&d, 0, &h).unwrap(), 0);
    }

    #[test]
    fn log_mgf_basics() {
        let grid = Grid::new(vec![linspace(-1.0, 1.0, 21)]).unwrap();
        let samples = vec![vec![3.0], vec![5.0], vec![4.0]];
        let phi = log_mgf_from_samples(&samples, 4.0, &grid).unwrap();
        assert_eq!(phi.value_at(&[0.0]), Some(0.0));
        assert!(phi.convexity_defect() <= 1e-12);
        // slope at 0 is the sample mean / volume = 1
        let step = 0.1;
        let slope = (phi.values[11] - phi.values[9]) / (2.0 * step);
        assert!((slope - 1.0).abs() < 0.01, "{slope}");
        assert!(log_mgf_from_samples(&[], 1.0, &grid).is_err());
    }

    #[test]
    fn log_mgf_is_stable_for_large_exponents() {
        let grid = Grid::new(vec![vec![-50.0, 0.0, 50.0]]).unwrap();
        let phi = log_mgf_from_samples(&[vec![1000.0], vec![2000.0]], 1.0, &grid).unwrap();
        assert!(phi.values.iter().all(|v| v.is_finite()));
        assert!((phi.values[2] - (100_000.0 - 2f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn legendre_of_quadratic() {
        let step = 0.01;
        let lam = Grid::new(vec![linspace(-3.0, 3.0, 601)]).unwrap();
        let phi = GridFunction::from_fn(lam, |l| l[0] * l[0] / 2.0);
        let xs = Grid::new(vec![linspace(-2.5, 2.5, 51)]).unwrap();
        let star = legendre_transform(&phi, &xs).unwrap();
        for (x, v) in xs.points().zip(&star.values) {
            let exact = x[0] * x[0] / 2.0;
            assert!(*v <= exact + 1e-12);
            assert!(exact - v <= step * step / 2.0 + 1e-12, "x={} err={}", x[0], exact - v);
        }
    }

    #[test]
    fn legendre_of_linear() {
        let lam = Grid::new(vec![linspace(-2.0, 2.0, 41)]).unwrap();
        let a = 0.7;
        let phi = GridFunction::from_fn(lam, |l| a * l[0]);
        let xs = Grid::new(vec![vec![0.2, a, 1.5]]).unwrap();
        let star = legendre_transform(&phi, &xs).unwrap();
        assert!(star.values[1].abs() < 1e-12);
        assert!((star.values[0] - 2.0 * (a - 0.2)).abs() < 1e-12);
        assert!((star.values[2] - 2.0 * (1.5 - a)).abs() < 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![vec![0.0, 0.0]]).is_err());
        assert!(Grid::new(vec![]).is_err());
        let g = Grid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        assert_eq!(g.point(4), vec![1.0, 1.0]);
        assert_eq!(g.collinear_triples().len(), 2);
    }

    #[test]
    fn regularity_index() {
        assert_eq!(regularity_m(2, 7).unwrap(), 1);
        assert_eq!(regularity_m(3, 9).unwrap(), 1);
        assert_eq!(regularity_m(4, 7).unwrap(), 0);
        assert!(regularity_m(8, 7).is_err());
        for k in 1..6 {
            for n in k..40 {
                let m = regularity_m(k, n).unwrap();
                assert!((2 * m + 1) * k <= n && n < (2 * m + 3) * k);
            }
        }
    }

    #[test]
    fn deterministic_density() {
        let model = crate::models::ModelSpec::lower(
            2,
            [0.0, 1.0, 2.0].iter().map(|&value| DistributionSpec::PointMass { value }).collect(),
        );
        let est = estimate_pb_density(&model, 0, &[(0.5, 0.5), (0.0, 3.0)], 3, 3, 1).unwrap();
        // all 49 vertices, no edges at s = 0.5
        assert!((est.mean[0] - 49.0 / 36.0).abs() < 1e-12);
        assert!(est.std[0] < 1e-12);
        assert_eq!(est.betti[0][1], 1);
    }

    #[test]
    fn tabulated_interpolation() {
        let f = TabulatedFn::from_fn((0.0, 0.0), 0.5, (5, 5), |s, t| s + 2.0 * t);
        assert!((f.eval(0.3, 0.7) - 1.7).abs() < 1e-12);
        assert_eq!(f.eval(2.0, 2.0), 6.0);
        assert_eq!(f.eval(2.1, 0.0), 0.0);
        assert_eq!(f.eval(-0.1, 0.0), 0.0);
    }

    #[test]
    fn piecewise_integral_cases() {
        let ones = TabulatedFn::from_fn((0.0, 0.0), 0.25, (17, 17), |_, _| 1.0);
        let d = diagram_of(&[(0.5, 1.5), (1.0, 2.0), (0.0, f64::INFINITY)]);
        let (approx, exact) = piecewise_constant_integral(&d, 0, &ones, 2).unwrap();
        assert_eq!((approx, exact), (2.0, 2.0));
        let empty = diagram_of(&[]);
        assert_eq!(piecewise_constant_integral(&empty, 0, &ones, 2).unwrap(), (0.0, 0.0));
    }
}
