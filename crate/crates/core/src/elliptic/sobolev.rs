//! Best Sobolev constants Λ(Ω,q) by normalized inverse iteration, plus radial oracles.

use nalgebra::{DMatrix, SymmetricEigen};

use super::domain::DomainGrid;
use super::krylov::{dot, norm2};
use super::poisson::{solve_into, torsion};
use crate::emden::{first_zero, EmdenProfile};
use crate::error::{Error, Result};
use crate::geometry::critical_exponent;

const MAX_ITER: usize = 2000;

#[derive(Debug, Clone)]
pub struct SobolevResult {
    pub q: f64,
    pub lambda: f64,
    pub minimizer: Vec<f64>,
    pub iterations: usize,
}

fn lq_norm(domain: &DomainGrid, w: &[f64], q: f64) -> f64 {
    domain.integrate(&w.iter().map(|v| v.abs().powf(q)).collect::<Vec<_>>()).powf(1.0 / q)
}

/// Minimizes ∫|∇w|² / (∫|w|^q)^{2/q} over the grid.
pub fn sobolev_constant(domain: &DomainGrid, q: f64) -> Result<SobolevResult> {
    if !(q >= 1.0) || (domain.n >= 3 && q >= 2.0 * critical_exponent(domain.n)) {
        return Err(Error::OutOfRange(format!("Sobolev exponent q = {q} is not admissible for N = {}", domain.n)));
    }
    let mut w = torsion(domain)?.psi0;
    let nrm = lq_norm(domain, &w, q);
    w.iter_mut().for_each(|v| *v /= nrm);
    let mut history: Vec<f64> = Vec::new();
    let mut next = w.clone();
    for it in 1..=MAX_ITER {
        let rhs: Vec<f64> = w.iter().map(|v| v.max(0.0).powf(q - 1.0)).collect();
        solve_into(domain, &rhs, &mut next, 1e-12)?;
        let nrm = lq_norm(domain, &next, q);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::NonConvergence(format!("iterate norm {nrm} at step {it}")));
        }
        next.iter_mut().for_each(|v| *v /= nrm);
        std::mem::swap(&mut w, &mut next);
        // keep the scaled iterate as the next initial guess
        let quotient = domain.dirichlet_energy(&w);
        history.push(quotient);
        if history.len() > 5 {
            let old = history[history.len() - 6];
            if (old - quotient).abs() <= 1e-10 * quotient {
                return Ok(SobolevResult { q, lambda: quotient, minimizer: w, iterations: it });
            }
        }
    }
    Err(Error::NonConvergence(format!("Rayleigh quotient for q = {q} did not stagnate in {MAX_ITER} steps")))
}

/// Smallest eigenvalue of the discrete -Δ by Lanczos on A^{-1} with full reorthogonalization.
pub fn smallest_eigenvalue(domain: &DomainGrid, steps: usize) -> Result<f64> {
    let n = domain.len();
    let m = steps.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut last = f64::NAN;
    for k in 0..m {
        basis.push(v.clone());
        let mut w = vec![0.0; n];
        solve_into(domain, &v, &mut w, 1e-13)?;
        let a = dot(&w, &v);
        alpha.push(a);
        for b in &basis {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let bnorm = norm2(&w);
        let t = DMatrix::from_fn(k + 1, k + 1, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j || j + 1 == i {
                beta[i.min(j)]
            } else {
                0.0
            }
        });
        let top = SymmetricEigen::new(t).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let est = 1.0 / top;
        if (est - last).abs() <= 1e-14 * est || bnorm <= 1e-14 {
            return Ok(est);
        }
        last = est;
        beta.push(bnorm);
        v = w.iter().map(|x| x / bnorm).collect();
    }
    Ok(last)
}

/// Λ(B_R, q) from the radial ground state: R^{N-2-2N/q} I_q^{1-2/q}, or j²/R² for q = 2.
pub fn ball_sobolev(n: usize, radius: f64, q: f64, tol: f64) -> Result<f64> {
    let nf = n as f64;
    if (q - 2.0).abs() < 1e-14 {
        let j = first_zero(n, 1.0, tol)?;
        return Ok(j * j / (radius * radius));
    }
    if q < 2.0 {
        return Err(Error::OutOfRange(format!("radial oracle needs q >= 2, got {q}")));
    }
    let prof = EmdenProfile::shoot_sobolev(n, q - 1.0, tol)?;
    Ok(radius.powf(nf - 2.0 - 2.0 * nf / q) * prof.ip1.powf(1.0 - 2.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::domain::Shape;
    use std::f64::consts::PI;

    #[test]
    fn square_eigenvalue() {
        let g = DomainGrid::new(Shape::unit_square(), 1.0 / 64.0).unwrap();
        let s = sobolev_constant(&g, 2.0).unwrap();
        assert!((s.lambda - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 1e-3);
        let l = smallest_eigenvalue(&g, 40).unwrap();
        assert!((l - s.lambda).abs() / l < 1e-8, "{l} {}", s.lambda);
    }

    #[test]
    fn disk_superlinear_matches_radial_oracle() {
        let r = 1.0 / PI.sqrt();
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 128.0).unwrap();
        let s = sobolev_constant(&g, 4.0).unwrap();
        let exact = ball_sobolev(2, r, 4.0, 1e-10).unwrap();
        assert!((exact - 11.7520).abs() < 1e-3, "{exact}");
        assert!((s.lambda - exact).abs() / exact < 2e-3, "{} {exact}", s.lambda);
        assert!(s.minimizer.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn radial_eigenvalue() {
        let l = ball_sobolev(2, 1.0 / PI.sqrt(), 2.0, 1e-10).unwrap();
        assert!((l - 18.168414535537227).abs() < 1e-8);
    }
}
