mod common;

use std::f64::consts::PI;

use plasma_lab::elliptic::{DomainGrid, Shape};
use plasma_lab::thresholds::{ctz_bounds, f_p, lambda0, mu_star, psi_sup_bound, SobolevTable};
use proptest::prelude::*;

use common::rel;

#[test]
fn disk_lambda0_at_p1_is_the_first_eigenvalue() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
    let t = SobolevTable::new(&g);
    let j = common::j01();
    let l0 = lambda0(&t, 1.0).unwrap();
    assert!(rel(l0, PI * j * j) < 1e-8);
    assert!(rel(mu_star(&t, 1.0).unwrap(), l0) < 1e-12);
}

#[test]
fn grid_and_radial_tables_agree_on_the_disk() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
    let radial = SobolevTable::new(&g);
    let grid = SobolevTable::grid(&g);
    for q in [2.0, 4.0] {
        assert!(rel(grid.lambda(q).unwrap(), radial.lambda(q).unwrap()) < 2e-3);
    }
}

#[test]
fn comparison_function_decays() {
    let r = common::unit_radius(2);
    let f: Vec<f64> = [5.0, 10.0, 20.0, 40.0].iter().map(|&p| f_p(1.0, r, p).unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] < w[0]), "{f:?}");
    assert!(f[3] < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sup_bound_grows_with_lambda(s in 2.05f64..2.95, l in 0.1f64..50.0, dl in 0.01f64..10.0) {
        let a = psi_sup_bound(3, 2.0, s, l).unwrap();
        let b = psi_sup_bound(3, 2.0, s, l + dl).unwrap();
        prop_assert!(a > 0.0 && b > a);
    }

    #[test]
    fn ctz_bounds_are_ordered(q in 2.01f64..12.0, r in 0.2f64..1.0) {
        let vol = PI * r * r;
        let b = ctz_bounds(vol, r, q).unwrap();
        prop_assert!(b.lower > 0.0 && b.lower <= b.upper);
    }
}
