mod common;

use std::f64::consts::PI;

use plasma_lab::elliptic::{DomainGrid, Shape};
use plasma_lab::plasma::{continuation, energy_audit, multistart, richardson, solve_plasma, SolverOptions};
use plasma_lab::thresholds::{mu_star, SobolevTable};
use proptest::prelude::*;

#[test]
fn disk_branch_below_half_lambda_is_monotone_and_positive() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
    let top = 0.9 * mu_star(&SobolevTable::new(&g), 2.0).unwrap();
    let run = continuation(&g, 2.0, top, 10).unwrap();
    assert!(run.branch.truncated.is_none());
    let a: Vec<f64> = run.branch.entries.iter().map(|e| e.alpha).collect();
    assert!(a.windows(2).all(|w| w[1] < w[0]), "{a:?}");
    assert!(a.iter().all(|&v| v > 0.0));
}

#[test]
fn energy_identities_on_negative_alpha_solutions() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
    let run = continuation(&g, 2.0, 30.0, 10).unwrap();
    let mut checked = 0;
    for s in run.solutions.iter().filter(|s| s.alpha < 0.0) {
        let a = energy_audit(&g, s).unwrap();
        assert!(a.identity_residual <= 5e-3 * s.energy);
        assert!(a.vacuum_residual <= 5e-3 * s.energy);
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn multistart_is_seeded() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
    let a = multistart(&g, 2.0, 8.0, 3, 7).unwrap();
    let b = multistart(&g, 2.0, 8.0, 3, 7).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.alpha.to_bits(), y.alpha.to_bits());
        assert_eq!(x.psi, y.psi);
    }
}

#[test]
fn seed_recovers_torsion_constants() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 256.0).unwrap();
    let s = solve_plasma(&g, 2.0, 0.0, None, SolverOptions::default()).unwrap();
    assert!((s.alpha - 1.0).abs() < 1e-3);
    assert!(common::rel(2.0 * s.energy, 1.0 / (8.0 * PI)) < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn richardson_removes_quadratic_error(exact in -20.0f64..20.0, c in -5.0f64..5.0, h in 0.001f64..0.1) {
        let coarse = exact + c * h * h;
        let fine = exact + c * h * h / 4.0;
        prop_assert!((richardson(coarse, fine) - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }
}
