mod common;

use std::f64::consts::PI;

use plasma_lab::elliptic::{
    ball_robin, ball_sobolev, green_function, harmonic_centers, kirchhoff_routh, robin_function, smallest_eigenvalue, torsion, DomainGrid,
    Shape,
};
use plasma_lab::Error;
use proptest::prelude::*;

use common::rel;

#[test]
fn disk_torsion_converges_at_second_order() {
    let r2 = common::unit_radius(2).powi(2);
    let err = |h: f64| {
        let g = DomainGrid::new(Shape::unit_ball(2), h).unwrap();
        let t = torsion(&g).unwrap();
        (0..g.len())
            .map(|i| {
                let x = g.position(i);
                (t.psi0[i] - (r2 - x[0] * x[0] - x[1] * x[1]) / 4.0).abs()
            })
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(1.0 / 32.0), err(1.0 / 64.0));
    assert!(coarse < 1e-4 && coarse / fine > 3.0, "{coarse} {fine}");
}

#[test]
fn square_eigenvalue_and_radial_sobolev() {
    let g = DomainGrid::new(Shape::unit_square(), 1.0 / 64.0).unwrap();
    assert!(rel(smallest_eigenvalue(&g, 300).unwrap(), 2.0 * PI * PI) < 1e-3);
    let r = common::unit_radius(2);
    let j = common::j01();
    assert!(rel(ball_sobolev(2, r, 2.0, 1e-11).unwrap(), PI * j * j) < 1e-8);
}

#[test]
fn mask_header_is_validated() {
    assert!(matches!(Shape::parse_mask("2 0.1 3\n0 0 0\n"), Err(Error::Domain(_))));
    assert!(matches!(Shape::parse_mask("2 0.1 2 2\n0 1\n1 2\n"), Err(Error::Domain(_))));
    let ok = Shape::parse_mask("2 0.25 5 5\n0 0 0 0 0\n0 1 1 1 0\n0 1 1 1 0\n0 1 1 1 0\n0 0 0 0 0\n").unwrap();
    assert_eq!(ok.dim(), 2);
}

#[test]
fn robin_on_disk_matches_image_formula() {
    let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
    let r = common::unit_radius(2);
    for x in [[0.0, 0.0], [0.1, 0.05], [-0.2, 0.15], [0.0, -0.3]] {
        let i = g.nearest_node(&x).unwrap();
        let p = g.position(i);
        // H(x,x) = ln((R² - |x|²)/R)/(2π)
        let exact = ((r * r - p[0] * p[0] - p[1] * p[1]) / r).ln() / (2.0 * PI);
        assert!((robin_function(&g, i).unwrap() - exact).abs() < 1e-4, "{x:?}");
        assert!((ball_robin(2, r, &p[..2]) - exact).abs() < 1e-14);
    }
}

#[test]
fn harmonic_centers_of_symmetric_domains() {
    let disk = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
    assert_eq!(harmonic_centers(&disk).unwrap(), vec![disk.nearest_node(&[0.0, 0.0]).unwrap()]);
    let square = DomainGrid::new(Shape::unit_square(), 1.0 / 32.0).unwrap();
    assert_eq!(harmonic_centers(&square).unwrap(), vec![square.nearest_node(&[0.5, 0.5]).unwrap()]);
}

fn square() -> &'static DomainGrid {
    static G: std::sync::OnceLock<DomainGrid> = std::sync::OnceLock::new();
    G.get_or_init(|| DomainGrid::new(Shape::unit_square(), 1.0 / 32.0).unwrap())
}

fn interior_node(g: &DomainGrid, u: f64, v: f64) -> usize {
    g.nearest_node(&[0.15 + 0.7 * u, 0.15 + 0.7 * v]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn green_is_symmetric(a in (0.0f64..1.0, 0.0f64..1.0), b in (0.0f64..1.0, 0.0f64..1.0)) {
        let g = square();
        let (i, j) = (interior_node(g, a.0, a.1), interior_node(g, b.0, b.1));
        prop_assume!(i != j);
        let gi = green_function(g, i).unwrap();
        let gj = green_function(g, j).unwrap();
        let (x, y) = (gi.g[j], gj.g[i]);
        prop_assert!(x > 0.0);
        prop_assert!((x - y).abs() <= 1e-8 * x, "{} vs {}", x, y);
    }

    #[test]
    fn kirchhoff_routh_is_permutation_invariant(
        pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, -2.0f64..2.0), 2..4),
        shift in 1usize..3,
    ) {
        let g = square();
        let nodes: Vec<usize> = pts.iter().map(|p| interior_node(g, p.0, p.1)).collect();
        let apart = nodes.iter().enumerate().all(|(a, &i)| {
            nodes[..a].iter().all(|&j| {
                let (x, y) = (g.position(i), g.position(j));
                (x[0] - y[0]).hypot(x[1] - y[1]) >= 3.0 * g.h
            })
        });
        prop_assume!(apart);
        let k: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let base = kirchhoff_routh(g, &nodes, &k).unwrap();
        let m = nodes.len();
        let perm: Vec<usize> = (0..m).map(|i| (i + shift) % m).collect();
        let pn: Vec<usize> = perm.iter().map(|&i| nodes[i]).collect();
        let pk: Vec<f64> = perm.iter().map(|&i| k[i]).collect();
        let other = kirchhoff_routh(g, &pn, &pk).unwrap();
        prop_assert!((base.value - other.value).abs() <= 1e-10 * base.value.abs().max(1.0));
        for (a, &i) in perm.iter().enumerate() {
            for d in 0..2 {
                prop_assert!((other.gradient[a][d] - base.gradient[i][d]).abs() <= 1e-9 * (1.0 + base.gradient[i][d].abs()));
            }
        }
    }
}
