//! Dirichlet Poisson solves and the torsion function.

use super::domain::DomainGrid;
use super::krylov::{pcg, KrylovStats};
use crate::error::Result;

pub const POISSON_TOL: f64 = 1e-10;
const MAX_ITER: usize = 500;

/// Applies one multigrid V-cycle as preconditioner.
pub fn precondition(domain: &DomainGrid) -> impl Fn(&[f64], &mut [f64]) + '_ {
    let mg = domain.multigrid();
    move |r: &[f64], z: &mut [f64]| mg.vcycle(domain, r, z)
}

/// Solves A x = b with the given relative tolerance, starting from `x`.
pub fn solve_into(domain: &DomainGrid, b: &[f64], x: &mut [f64], tol: f64) -> Result<KrylovStats> {
    pcg(|v, y| domain.apply(v, y), precondition(domain), b, x, tol, MAX_ITER)
}

/// -Δ_h φ = rhs, φ = 0 on the boundary.
pub fn solve_poisson(domain: &DomainGrid, rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; domain.len()];
    solve_into(domain, rhs, &mut x, POISSON_TOL)?;
    Ok(x)
}

/// -Δ_h φ = rhs, φ = g on the boundary.
pub fn solve_dirichlet(domain: &DomainGrid, rhs: &[f64], g: impl Fn(&[f64; 3]) -> f64) -> Result<Vec<f64>> {
    let mut b = domain.boundary_rhs(g);
    for (bi, r) in b.iter_mut().zip(rhs) {
        *bi += r;
    }
    solve_poisson(domain, &b)
}

#[derive(Debug, Clone)]
pub struct Torsion {
    pub psi0: Vec<f64>,
    /// ∫ψ₀
    pub two_e0: f64,
    /// ∫|∇ψ₀|²
    pub two_e0_gradient: f64,
}

pub fn torsion(domain: &DomainGrid) -> Result<Torsion> {
    let one = vec![1.0; domain.len()];
    let psi0 = solve_poisson(domain, &one)?;
    let two_e0 = domain.integrate(&psi0);
    let two_e0_gradient = domain.dirichlet_energy(&psi0);
    Ok(Torsion { psi0, two_e0, two_e0_gradient })
}

/// Torsional rigidity of the unit square, (64/π⁶) Σ_{m,n odd} 1/(m²n²(m²+n²)).
pub fn square_torsion_series(terms: usize) -> f64 {
    let mut s = 0.0;
    for m in (1..2 * terms).step_by(2) {
        for n in (1..2 * terms).step_by(2) {
            let (m2, n2) = ((m * m) as f64, (n * n) as f64);
            s += 1.0 / (m2 * n2 * (m2 + n2));
        }
    }
    64.0 / std::f64::consts::PI.powi(6) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::domain::Shape;
    use std::f64::consts::PI;

    #[test]
    fn zero_rhs_gives_zero() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
        let x = solve_poisson(&g, &vec![0.0; g.len()]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn disk_torsion() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 128.0).unwrap();
        let t = torsion(&g).unwrap();
        let c = g.nearest_node(&[0.0, 0.0]).unwrap();
        assert!((t.psi0[c] - 1.0 / (4.0 * PI)).abs() < 1.0 / 128.0 * 0.1);
        assert!((t.two_e0 - 1.0 / (8.0 * PI)).abs() / (1.0 / (8.0 * PI)) < 1e-3);
        assert!((t.two_e0 - t.two_e0_gradient).abs() / t.two_e0 < 1e-8);
    }

    #[test]
    fn manufactured_square() {
        for (h, tol) in [(1.0 / 32.0, 2e-3), (1.0 / 64.0, 5e-4)] {
            let g = DomainGrid::new(Shape::unit_square(), h).unwrap();
            let f: Vec<f64> = (0..g.len())
                .map(|i| {
                    let x = g.position(i);
                    2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()
                })
                .collect();
            let u = solve_poisson(&g, &f).unwrap();
            let err = (0..g.len())
                .map(|i| {
                    let x = g.position(i);
                    (u[i] - (PI * x[0]).sin() * (PI * x[1]).sin()).abs()
                })
                .fold(0.0, f64::max);
            assert!(err < tol, "h = {h}: {err}");
        }
    }

    #[test]
    fn square_torsion_against_series() {
        let g = DomainGrid::new(Shape::unit_square(), 1.0 / 128.0).unwrap();
        let t = torsion(&g).unwrap();
        let exact = square_torsion_series(200);
        assert!((exact - 0.0351443).abs() < 1e-6, "{exact}");
        assert!((t.two_e0 - exact).abs() < 1e-4);
    }
}
