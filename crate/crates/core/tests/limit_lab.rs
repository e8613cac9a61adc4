//! Estimators and gap measurements against independent oracles.

use cubeph::cube::Window;
use cubeph::limit_lab::{
    estimate_log_mgf, estimate_mean_diagram, estimate_pb_density, legendre_transform, linspace, lln_sweep,
    near_additivity_gap, piecewise_constant_integral, rectangles, regularity_gap, regularity_m, Grid, GridFunction,
    TabulatedFn,
};
use cubeph::models::{DistributionSpec, ModelSpec};
use cubeph::rng::SeedSpec;
use cubeph::{BirthDeathPair, PersistenceDiagram};

fn point_masses(values: &[f64]) -> Vec<DistributionSpec> {
    values.iter().map(|&value| DistributionSpec::PointMass { value }).collect()
}

fn uniform() -> Vec<DistributionSpec> {
    vec![DistributionSpec::Uniform { a: 0.0, b: 1.0 }]
}

#[test]
fn point_mass_vertex_density() {
    let model = ModelSpec::lower(2, point_masses(&[0.0, 1.0, 2.0]));
    for n in [1u32, 2, 5] {
        let est = estimate_pb_density(&model, 0, &[(0.5, 0.5), (0.0, 0.0)], n, 2, 0).unwrap();
        let side = f64::from(2 * n + 1);
        let expected = side * side / f64::from(4 * n * n);
        assert!((est.mean[0] - expected).abs() < 1e-12);
        assert_eq!(est.std[0], 0.0);
        assert_eq!(est.betti[0][1] as f64, side * side);
    }
    let below = ModelSpec::lower(2, point_masses(&[0.5, 1.0, 2.0]));
    let est = estimate_pb_density(&below, 0, &[(0.25, 0.25)], 2, 3, 0).unwrap();
    assert_eq!(est.mean[0], 0.0);
}

#[test]
fn deterministic_sweep_has_zero_spread_and_boundary_drift() {
    let model = ModelSpec::lower(2, point_masses(&[0.0, 1.0, 2.0]));
    let rows = lln_sweep(&model, 0, &[(0.5, 0.5)], &[2, 4, 8], 3, 1).unwrap();
    for r in &rows {
        assert_eq!(r.std, 0.0);
    }
    // ((2n+1)^2 - (2n)^2) / (2n)^2 = (4n+1)/(4n^2) <= 2/n
    for pair in rows.windows(2) {
        let n = f64::from(pair[0].n);
        assert!((pair[0].mean - pair[1].mean).abs() <= 2.0 / n);
    }
    assert!(lln_sweep(&model, 0, &[(0.5, 0.5)], &[4, 2], 3, 1).is_err());
}

#[test]
fn single_trial_reproduces_quadrant_mass() {
    let model = ModelSpec::upper(2, uniform());
    let est = estimate_pb_density(&model, 1, &[(0.4, 0.7)], 3, 1, 12).unwrap();
    let f = model.sample(3, SeedSpec::new(12, 0)).unwrap();
    let direct = cubeph::persistent_betti_direct(&f, 1, 0.4, 0.7).unwrap();
    assert_eq!(est.betti[0][0], direct);
}

#[test]
fn doubling_trials_keeps_the_prefix() {
    let model = ModelSpec::lower(2, uniform());
    let a = estimate_pb_density(&model, 0, &[(0.5, 0.6)], 3, 5, 2).unwrap();
    let b = estimate_pb_density(&model, 0, &[(0.5, 0.6)], 3, 10, 2).unwrap();
    assert_eq!(a.betti[..], b.betti[..5]);
}

#[test]
fn mean_diagram_matches_density_and_inclusion_exclusion() {
    let model = ModelSpec::upper(2, uniform());
    let grid = [(0.25, 0.5), (0.5, 0.75), (0.125, 0.875)];
    let mean = estimate_mean_diagram(&model, 1, 3, 6, 2, &grid, 4).unwrap();
    let pb = estimate_pb_density(&model, 1, &grid, 3, 6, 4).unwrap();
    assert_eq!(mean.quadrants.betti, pb.betti);
    assert_eq!(mean.inclusion_exclusion_error, 0);
    let total: u64 = mean.summed.counts.iter().sum::<u64>() + mean.summed.overflow + mean.summed.infinite;
    let mut pairs = 0;
    for t in 0..6 {
        let f = model.sample(3, SeedSpec::new(4, t)).unwrap();
        pairs += cubeph::compute_diagram(&f).unwrap().degree(1).len() as u64;
    }
    assert_eq!(total, pairs);
}

#[test]
fn point_mass_mean_diagram_sits_on_the_marks() {
    // lower model, d=2, marks 0, 1/2, 1: births and deaths are marks
    let model = ModelSpec::lower(2, point_masses(&[0.0, 0.5, 1.0]));
    let mean = estimate_mean_diagram(&model, 0, 2, 2, 2, &[], 0).unwrap();
    let l = 2;
    for (rect, &count) in rectangles(l).iter().zip(&mean.summed.counts) {
        if count > 0 {
            let (s1, s2, t1, t2) = rect.bounds(l);
            let has_mark = |lo: f64, hi: f64, closed: bool| {
                [0.0, 0.5, 1.0].iter().any(|&c| (c > lo || (closed && c >= lo)) && c <= hi)
            };
            assert!(has_mark(s1, s2, rect.i == 1) && has_mark(t1, t2, false), "{rect:?}");
        }
    }
    // 25 vertices at 0, 40 edges at 1/2: 24 pairs (0, 1/2) per trial
    let rect = rectangles(l).into_iter().find(|r| (r.i, r.j) == (1, 4)).unwrap();
    assert_eq!(mean.summed.count(rect), 48);
    assert_eq!(mean.summed.infinite, 2);
}

#[test]
fn log_mgf_zero_and_convexity() {
    let model = ModelSpec::upper(2, uniform());
    let grid = Grid::new(vec![linspace(-1.0, 1.0, 11), linspace(-1.0, 1.0, 9)]).unwrap();
    let phi = estimate_log_mgf(&model, 0, &[(0.2, 0.4), (0.3, 0.9)], &grid, 2, 12, 5).unwrap();
    assert_eq!(phi.value_at(&[0.0, 0.0]), Some(0.0));
    assert!(phi.convexity_defect() <= 1e-9);
    assert_eq!(phi.meta.trials, 12);
    assert!(estimate_log_mgf(&model, 0, &[(0.2, 0.4)], &grid, 2, 12, 5).is_err());
    assert!(estimate_log_mgf(&model, 0, &[(0.2, 0.4), (0.3, 0.9)], &grid, 2, 1, 5).is_err());
}

#[test]
fn log_mgf_of_a_constant_is_linear() {
    // every trial gives beta = 25 vertices on [-2,2]^2, |Λ| = 16
    let model = ModelSpec::lower(2, point_masses(&[0.0, 1.0, 2.0]));
    let grid = Grid::new(vec![linspace(-3.0, 0.0, 7)]).unwrap();
    let phi = estimate_log_mgf(&model, 0, &[(0.5, 0.5)], &grid, 2, 4, 0).unwrap();
    for (p, v) in grid.points().zip(&phi.values) {
        assert!((v - p[0] * 25.0 / 16.0).abs() < 1e-12);
    }
    assert!(phi.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn legendre_of_a_linear_function() {
    let a = [0.5, -0.25];
    let lam = Grid::new(vec![linspace(-1.0, 1.0, 9), linspace(-1.0, 1.0, 9)]).unwrap();
    let phi = GridFunction::from_fn(lam, |l| a[0] * l[0] + a[1] * l[1]);
    let x = Grid::new(vec![vec![0.0, 0.5, 1.0], vec![-0.25, 0.5]]).unwrap();
    let star = legendre_transform(&phi, &x).unwrap();
    for (p, v) in x.points().zip(&star.values) {
        // max over the box [-1,1]^2 of <λ, x - a> is the l1 norm of x - a
        let expected = (p[0] - a[0]).abs() + (p[1] - a[1]).abs();
        assert!((v - expected).abs() < 1e-12, "{p:?} {v}");
    }
    assert_eq!(star.value_at(&[0.5, -0.25]), Some(0.0));
}

#[test]
fn rate_vanishes_near_the_empirical_mean() {
    let model = ModelSpec::lower(2, uniform());
    let pairs = [(0.5, 0.5)];
    let lambda = Grid::new(vec![linspace(-2.0, 2.0, 81)]).unwrap();
    let phi = estimate_log_mgf(&model, 0, &pairs, &lambda, 3, 40, 6).unwrap();
    let mean = estimate_pb_density(&model, 0, &pairs, 3, 40, 6).unwrap().mean[0];
    let x = Grid::new(vec![vec![mean]]).unwrap();
    let at_mean = legendre_transform(&phi, &x).unwrap().values[0];
    // the supporting line at λ = 0 has slope equal to the mean; grid slack is O(step^2)
    assert!((0.0..=0.05 * 0.05 * 36.0).contains(&at_mean), "{at_mean}");
}

#[test]
fn near_additivity_examples() {
    let det = ModelSpec::lower(2, point_masses(&[0.0, 0.5, 1.0]));
    let g = near_additivity_gap(&det, 0, &[(0.2, 0.7)], 3, 0, 0, SeedSpec::default()).unwrap();
    assert_eq!((g.measured, g.bound), (0.0, 0.0));
    let pairs = [(0.2, 0.7), (0.6, 0.6)];
    let g = near_additivity_gap(&det, 0, &pairs, 4, 1, 1, SeedSpec::default()).unwrap();
    let bound = 9.0 * 2f64.sqrt() * (1.0 - (3.0f64 / 4.0).powi(2));
    assert!((g.bound - bound).abs() < 1e-12);
    assert!(g.pass && g.measured > 0.0);

    let upper = ModelSpec::upper(2, uniform());
    assert!(near_additivity_gap(&upper, 0, &pairs, 4, 0, 1, SeedSpec::default()).is_err());
    assert!(near_additivity_gap(&upper, 0, &pairs, 1, 1, 1, SeedSpec::default()).is_err());
    for s in 0..50 {
        assert!(near_additivity_gap(&upper, 1, &pairs, 3, 1, 1, SeedSpec::new(1, s)).unwrap().pass);
    }
}

#[test]
fn regularity_examples() {
    let model = ModelSpec::upper(2, uniform());
    let pairs = [(0.3, 0.6)];
    let exact = regularity_gap(&model, 0, &pairs, 3, 9, SeedSpec::new(2, 0)).unwrap();
    assert_eq!((exact.measured, exact.bound), (0.0, 0.0));
    assert_eq!(regularity_m(2, 7).unwrap(), 1);
    for s in 0..50 {
        let g = regularity_gap(&model, 1, &pairs, 2, 7, SeedSpec::new(2, s)).unwrap();
        assert!((g.bound - 9.0 * (1.0 - (6.0f64 / 7.0).powi(2))).abs() < 1e-12);
        assert!(g.pass, "{g:?}");
    }
    assert!(regularity_gap(&model, 0, &pairs, 8, 7, SeedSpec::default()).is_err());
}

#[test]
fn piecewise_integral_examples() {
    let mut dgm = PersistenceDiagram::empty(2, 1, 0);
    dgm.pairs[1].push(BirthDeathPair { birth: 1.0, death: 2.0 });
    let f = TabulatedFn::from_fn((0.0, 0.0), 0.1, (31, 31), |s, t| (s * t).sin());
    let (approx, exact) = piecewise_constant_integral(&dgm, 1, &f, 2).unwrap();
    // UR of the rectangle holding (1, 2) is (1, 2) itself
    assert!((approx - exact).abs() < 1e-12);
    assert!((exact - 2f64.sin()).abs() < 0.02);

    dgm.pairs[1][0] = BirthDeathPair { birth: 0.9, death: 1.9 };
    let (approx, exact) = piecewise_constant_integral(&dgm, 1, &f, 2).unwrap();
    // |∇f| <= sqrt(s^2 + t^2) <= 3 on the table, mesh diagonal 2^{-3} sqrt 2
    assert!((approx - exact).abs() <= 3.0 * 2f64.sqrt() / 8.0);

    let window = Window::new(2, 1).unwrap();
    assert_eq!(window.volume(), 4.0);
}
