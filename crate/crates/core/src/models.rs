//! Samplers for the random cubical filtration models: upper and lower marks,
//! the perturbed lattice, and the ball cover.
//!
//! All samplers draw from counter-based streams keyed by absolute lattice
//! position (see [`crate::rng`]), so a window, any translated block, and any
//! halo are views of one infinite realization.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{lattice_box, ElementaryCube, Window};
use crate::error::{Error, Result};
use crate::persistence::{Filtration, Time};
use crate::rng::SeedSpec;

/// A law on `[0, ∞]` given by its family and parameters. Probability mass
/// missing from an empirical CDF table sits at `∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    PointMass { value: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    /// Right-continuous step CDF: `P(X ≤ values[k]) = cdf[k]`.
    Empirical { values: Vec<f64>, cdf: Vec<f64> },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match self {
            Self::PointMass { value } if value.is_nan() || *value < 0.0 => {
                bad(format!("point mass at {value} is not in [0, ∞]"))
            }
            Self::Uniform { a, b } if !(0.0 <= *a && a <= b && b.is_finite()) => {
                bad(format!("uniform({a}, {b}) needs 0 <= a <= b < ∞"))
            }
            Self::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                bad(format!("exponential rate {rate} must be positive"))
            }
            Self::Empirical { values, cdf } => {
                if values.len() != cdf.len() || values.is_empty() {
                    return bad("empirical table needs matching nonempty values/cdf".into());
                }
                let increasing = values.windows(2).all(|w| w[0] < w[1]);
                let monotone = cdf.windows(2).all(|w| w[0] <= w[1]);
                if !increasing || values[0] < 0.0 || !values.iter().all(|v| v.is_finite()) {
                    return bad("empirical values must be finite, >= 0 and strictly increasing".into());
                }
                if !monotone || cdf[0] < 0.0 || cdf[cdf.len() - 1] > 1.0 {
                    return bad("empirical cdf must be nondecreasing within [0, 1]".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Generalized inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> Time {
        match self {
            Self::PointMass { value } => *value,
            Self::Uniform { a, b } => a + (b - a) * u,
            Self::Exponential { rate } => -(1.0 - u).ln() / rate,
            Self::Empirical { values, cdf } => cdf
                .iter()
                .position(|&p| p > u)
                .map_or(f64::INFINITY, |k| values[k]),
        }
    }
}

/// A law on `ℝ^d` for the lattice perturbations `ε_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PerturbationSpec {
    /// Point mass at the given vector (all zeros when empty).
    Fixed {
        #[serde(default)]
        offset: Vec<f64>,
    },
    /// Uniform on the closed Euclidean ball of the given radius.
    UniformBall { radius: f64 },
    /// Uniform on `[-h, h]^d`.
    UniformCube { half_width: f64 },
    /// Isotropic normal; not compactly supported.
    Gaussian { sigma: f64 },
}

impl PerturbationSpec {
    /// Euclidean support radius, `None` when unbounded.
    pub fn support_radius(&self, d: usize) -> Option<f64> {
        match self {
            Self::Fixed { offset } => Some(offset.iter().map(|x| x * x).sum::<f64>().sqrt()),
            Self::UniformBall { radius } => Some(*radius),
            Self::UniformCube { half_width } => Some(half_width * (d as f64).sqrt()),
            Self::Gaussian { .. } => None,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let ok = match self {
            Self::Fixed { offset } => offset.is_empty() || offset.len() == d,
            Self::UniformBall { radius } => *radius >= 0.0 && radius.is_finite(),
            Self::UniformCube { half_width } => *half_width >= 0.0 && half_width.is_finite(),
            Self::Gaussian { sigma } => *sigma >= 0.0 && sigma.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid perturbation {self:?} for d={d}")))
        }
    }

    pub fn sample(&self, rng: &mut impl Rng, d: usize) -> Vec<f64> {
        match self {
            Self::Fixed { offset } if offset.is_empty() => vec![0.0; d],
            Self::Fixed { offset } => offset.clone(),
            Self::UniformCube { half_width } => (0..d)
                .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
                .collect(),
            Self::UniformBall { radius } => loop {
                let x: Vec<f64> = (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
                if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break x.into_iter().map(|v| v * radius).collect();
                }
            },
            Self::Gaussian { sigma } => (0..d)
                .map(|_| {
                    // Box-Muller
                    let u1: f64 = 1.0 - rng.random::<f64>();
                    let u2: f64 = rng.random::<f64>();
                    sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `t_Q = min{u_Q' : Q' ⊇ Q}` with `u_Q' ~ F_{dim Q'}`.
    Upper { marks: Vec<DistributionSpec> },
    /// `t_Q = max{u_Q' : Q' ⊆ Q}` with `u_Q' ~ F_{dim Q'}`.
    Lower { marks: Vec<DistributionSpec> },
    /// `t_Q` = longest edge of the perturbed lattice inside `Q`.
    PerturbedLattice { perturbation: PerturbationSpec },
    /// `t_Q` = radius at which balls around the perturbed lattice cover `Q`,
    /// approximated on a grid of `resolution` points per axis.
    BallCover {
        perturbation: PerturbationSpec,
        resolution: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    #[serde(flatten)]
    pub kind: ModelKind,
}

const TAG_UPPER: u64 = 1;
const TAG_LOWER: u64 = 2;
const TAG_LATTICE: u64 = 3;
const TAG_BALL: u64 = 4;

impl ModelSpec {
    pub fn upper(d: usize, marks: Vec<DistributionSpec>) -> Self {
        Self { d, kind: ModelKind::Upper { marks } }
    }

    pub fn lower(d: usize, marks: Vec<DistributionSpec>) -> Self {
        Self { d, kind: ModelKind::Lower { marks } }
    }

    pub fn perturbed_lattice(d: usize, perturbation: PerturbationSpec) -> Self {
        Self {
            d,
            kind: ModelKind::PerturbedLattice { perturbation },
        }
    }

    pub fn ball_cover(d: usize, perturbation: PerturbationSpec, resolution: usize) -> Self {
        Self {
            d,
            kind: ModelKind::BallCover {
                perturbation,
                resolution,
            },
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            ModelKind::Upper { .. } => "upper",
            ModelKind::Lower { .. } => "lower",
            ModelKind::PerturbedLattice { .. } => "perturbed_lattice",
            ModelKind::BallCover { .. } => "ball_cover",
        }
    }

    /// Ball-cover births are grid approximations.
    pub fn is_approximate(&self) -> bool {
        matches!(self.kind, ModelKind::BallCover { .. })
    }

    /// Dependence range `R`: 1 for upper, 0 for lower and perturbed lattice.
    /// For the ball cover with support radius `ρ`, a birth depends only on
    /// points within max-norm `2ρ + √d/2` of the cube, giving
    /// `R = ⌈4ρ + √d⌉`.
    pub fn dependence_range(&self) -> u32 {
        match &self.kind {
            ModelKind::Upper { .. } => 1,
            ModelKind::Lower { .. } | ModelKind::PerturbedLattice { .. } => 0,
            ModelKind::BallCover { perturbation, .. } => {
                let rho = perturbation.support_radius(self.d).unwrap_or(f64::INFINITY);
                (4.0 * rho + (self.d as f64).sqrt()).ceil() as u32
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        Window::new(self.d, 0)?;
        match &self.kind {
            ModelKind::Upper { marks } | ModelKind::Lower { marks } => {
                if marks.len() != 1 && marks.len() != self.d + 1 {
                    return Err(Error::Config(format!(
                        "need 1 or d+1 = {} mark distributions, got {}",
                        self.d + 1,
                        marks.len()
                    )));
                }
                marks.iter().try_for_each(DistributionSpec::validate)
            }
            ModelKind::PerturbedLattice { perturbation } => perturbation.validate(self.d),
            ModelKind::BallCover {
                perturbation,
                resolution,
            } => {
                perturbation.validate(self.d)?;
                if perturbation.support_radius(self.d).is_none() {
                    return Err(Error::Config("ball cover needs a compactly supported perturbation".into()));
                }
                if *resolution < 2 {
                    return Err(Error::Config("ball cover resolution must be at least 2".into()));
                }
                Ok(())
            }
        }
    }

    /// The realization restricted to `Λ^n`.
    pub fn sample(&self, n: u32, seed: SeedSpec) -> Result<Filtration> {
        self.sample_block(&vec![0; self.d], n, seed)
    }

    /// The realization restricted to `center + Λ^n`, translated to the origin.
    pub fn sample_block(&self, center: &[i32], n: u32, seed: SeedSpec) -> Result<Filtration> {
        self.validate()?;
        if center.len() != self.d {
            return Err(Error::Params(format!("center {center:?} is not {}-dimensional", self.d)));
        }
        let window = Window::new(self.d, n)?;
        let mut f = match &self.kind {
            ModelKind::Upper { marks } => upper_births(window, center, marks, seed, 1),
            ModelKind::Lower { marks } => lower_births(window, center, marks, seed),
            ModelKind::PerturbedLattice { perturbation } => {
                lattice_births(window, center, perturbation, seed)
            }
            ModelKind::BallCover {
                perturbation,
                resolution,
            } => ball_cover_births(window, center, perturbation, *resolution, seed),
        };
        f.seed = seed.realization_id();
        Ok(f)
    }
}

fn mark(marks: &[DistributionSpec], q: usize) -> &DistributionSpec {
    if marks.len() == 1 {
        &marks[0]
    } else {
        &marks[q]
    }
}

/// Upper model births on `center + Λ^n`, with marks drawn on the window
/// enlarged by `halo` (one suffices since cofaces extend by at most one).
pub fn upper_births(
    window: Window,
    center: &[i32],
    marks: &[DistributionSpec],
    seed: SeedSpec,
    halo: u32,
) -> Filtration {
    let outer = Window { d: window.d, n: window.n + halo };
    let u: HashMap<ElementaryCube, Time> = outer
        .all_cubes()
        .into_iter()
        .map(|c| {
            let abs = c.translate(center);
            let v = mark(marks, c.dimension()).quantile(seed.uniform(TAG_UPPER, &abs));
            (c, v)
        })
        .collect();
    let births = window.all_cubes().into_iter().map(|c| {
        let t = c
            .cofaces_containing()
            .iter()
            .map(|co| u[co])
            .fold(f64::INFINITY, f64::min);
        (c, t)
    });
    Filtration::new(window, births).expect("births in window")
}

fn lower_births(
    window: Window,
    center: &[i32],
    marks: &[DistributionSpec],
    seed: SeedSpec,
) -> Filtration {
    Filtration::from_max_over_faces(window, |c| {
        let abs = c.translate(center);
        mark(marks, c.dimension()).quantile(seed.uniform(TAG_LOWER, &abs))
    })
}

/// Perturbed lattice point `z + ε_z` for an absolute lattice point.
fn lattice_point(z: &[i32], mu: &PerturbationSpec, seed: SeedSpec, tag: u64) -> Vec<f64> {
    let vertex = ElementaryCube::vertex(z).expect("valid dimension");
    let eps = mu.sample(&mut seed.stream(tag, &vertex), z.len());
    z.iter().zip(eps).map(|(&zi, e)| f64::from(zi) + e).collect()
}

fn lattice_births(
    window: Window,
    center: &[i32],
    mu: &PerturbationSpec,
    seed: SeedSpec,
) -> Filtration {
    let points: HashMap<Vec<i32>, Vec<f64>> = window
        .lattice_points()
        .into_iter()
        .map(|z| {
            let abs: Vec<i32> = z.iter().zip(center).map(|(a, b)| a + b).collect();
            let x = lattice_point(&abs, mu, seed, TAG_LATTICE);
            (z, x)
        })
        .collect();
    lattice_births_from_points(window, &points)
}

/// Perturbed-lattice births from explicit perturbed positions of every
/// lattice point of the window (local coordinates).
pub fn lattice_births_from_points(window: Window, points: &HashMap<Vec<i32>, Vec<f64>>) -> Filtration {
    Filtration::from_max_over_faces(window, |c| {
        if c.dimension() != 1 {
            // vertices: no adjacent pair, infimum over an empty condition
            return 0.0;
        }
        let ends: Vec<Vec<i32>> = c.vertices();
        euclid(&points[&ends[0]], &points[&ends[1]])
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Regular grid of `m^dim(Q)` points on the cube (endpoints included).
fn cube_grid(cube: &ElementaryCube, m: usize) -> Vec<Vec<f64>> {
    let d = cube.ambient_dim();
    let mut pts = vec![cube.base().iter().map(|&b| f64::from(b)).collect::<Vec<f64>>()];
    for axis in 0..d {
        if !cube.is_extended(axis) {
            continue;
        }
        let mut next = Vec::with_capacity(pts.len() * m);
        for p in &pts {
            for k in 0..m {
                let mut x = p.clone();
                x[axis] += k as f64 / (m - 1) as f64;
                next.push(x);
            }
        }
        pts = next;
    }
    pts
}

/// Grid approximation of `inf{t : Q ⊂ ∪ B(x, t)}` for an explicit point set.
/// The result is a lower bound of the exact value with error at most the
/// grid spacing times `√dim Q / 2`.
pub fn cover_time(cube: &ElementaryCube, points: &[Vec<f64>], resolution: usize) -> f64 {
    let m = resolution.max(2);
    cube_grid(cube, m)
        .iter()
        .map(|x| {
            points
                .iter()
                .map(|p| euclid(x, p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn ball_cover_births(
    window: Window,
    center: &[i32],
    mu: &PerturbationSpec,
    resolution: usize,
    seed: SeedSpec,
) -> Filtration {
    let d = window.d;
    let rho = mu.support_radius(d).expect("validated compact support");
    // nearest point is within rho + sqrt(d)/2; candidates lie within
    // max-norm 2 rho + sqrt(d)/2 of the query
    let reach = (2.0 * rho + (d as f64).sqrt() / 2.0).ceil() as i32;
    let n = window.n as i32;
    let points: HashMap<Vec<i32>, Vec<f64>> = lattice_box(d, -n - reach, n + reach)
        .into_iter()
        .map(|z| {
            // keyed and stored in absolute coordinates
            let abs: Vec<i32> = z.iter().zip(center).map(|(a, b)| a + b).collect();
            let x = lattice_point(&abs, mu, seed, TAG_BALL);
            (abs, x)
        })
        .collect();
    let m = resolution.max(2);
    let nearest = |x: &[f64]| -> f64 {
        let lo: Vec<i32> = x.iter().map(|v| (v - f64::from(reach)).ceil() as i32).collect();
        let hi: Vec<i32> = x.iter().map(|v| (v + f64::from(reach)).floor() as i32).collect();
        let mut best = f64::INFINITY;
        let mut z = lo.clone();
        loop {
            if let Some(p) = points.get(&z) {
                best = best.min(euclid(x, p));
            }
            let mut axis = d;
            loop {
                if axis == 0 {
                    return best;
                }
                axis -= 1;
                if z[axis] < hi[axis] {
                    z[axis] += 1;
                    break;
                }
                z[axis] = lo[axis];
            }
        }
    };
    let raw: HashMap<ElementaryCube, f64> = window
        .all_cubes()
        .into_iter()
        .map(|c| {
            let t = cube_grid(&c.translate(center), m)
                .iter()
                .map(|x| nearest(x))
                .fold(0.0, f64::max);
            (c, t)
        })
        .collect();
    Filtration::from_max_over_faces(window, |c| raw[c])
}

/// Upper model sample on `Λ^n`.
pub fn sample_upper(d: usize, n: u32, marks: &[DistributionSpec], seed: SeedSpec) -> Result<Filtration> {
    ModelSpec::upper(d, marks.to_vec()).sample(n, seed)
}

/// Lower model sample on `Λ^n`.
pub fn sample_lower(d: usize, n: u32, marks: &[DistributionSpec], seed: SeedSpec) -> Result<Filtration> {
    ModelSpec::lower(d, marks.to_vec()).sample(n, seed)
}

pub fn sample_perturbed_lattice(
    d: usize,
    n: u32,
    mu: &PerturbationSpec,
    seed: SeedSpec,
) -> Result<Filtration> {
    ModelSpec::perturbed_lattice(d, mu.clone()).sample(n, seed)
}

pub fn sample_ball_cover(
    d: usize,
    n: u32,
    mu: &PerturbationSpec,
    resolution: usize,
    seed: SeedSpec,
) -> Result<Filtration> {
    ModelSpec::ball_cover(d, mu.clone(), resolution).sample(n, seed)
}

/// The block `Λ^{k-r, z} = 2kz + Λ^{k-r}` of the realization, translated to
/// the origin. Blocks at distinct `z` are at max-norm distance `>= 2r`, so
/// they are independent when `2r > R`.
pub fn block_copy(model: &ModelSpec, k: u32, r: u32, z: &[i32], seed: SeedSpec) -> Result<Filtration> {
    check_block_params(model, k, r)?;
    model.sample_block(&block_center(k, z), k - r, seed)
}

pub(crate) fn check_block_params(model: &ModelSpec, k: u32, r: u32) -> Result<()> {
    let range = model.dependence_range();
    if 2 * r <= range {
        return Err(Error::NotIndependent { two_r: 2 * r, range });
    }
    if k <= r {
        return Err(Error::Params(format!("need k > r, got k={k}, r={r}")));
    }
    Ok(())
}

pub fn block_center(k: u32, z: &[i32]) -> Vec<i32> {
    z.iter().map(|&zi| 2 * k as i32 * zi).collect()
}

/// Max-norm distance between the blocks `Λ^{k-r,z}` and `Λ^{k-r,z'}`.
pub fn block_gap(k: u32, r: u32, z: &[i32], z2: &[i32]) -> i64 {
    let half = i64::from(k - r);
    z.iter()
        .zip(z2)
        .map(|(&a, &b)| (2 * i64::from(k) * i64::from(a - b)).abs() - 2 * half)
        .max()
        .unwrap_or(0)
}
