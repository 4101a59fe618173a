//! Newton iteration for (P_λ) on a grid, with a damped Picard fallback.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elliptic::krylov::{dot, minres, norm2};
use crate::elliptic::poisson::{solve_into, torsion};
use crate::elliptic::DomainGrid;
use crate::error::{Error, Result};

/// Residual level at which a solve is declared converged.
pub const CONVERGED: f64 = 1e-9;
/// Residual level the iteration keeps pushing towards once converged.
const POLISH: f64 = 1e-12;
const MAX_NEWTON: usize = 60;
const MAX_PICARD: usize = 400;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlasmaSolution {
    pub p: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub psi: Vec<f64>,
    /// ½∫|∇ψ|²
    pub energy: f64,
    /// |{α + λψ > 0}| by node count
    pub plasma_volume: f64,
    pub residual_pde: f64,
    pub residual_constraint: f64,
    pub newton_steps: usize,
    pub picard_steps: usize,
}

impl PlasmaSolution {
    pub fn psi_max(&self) -> f64 {
        self.psi.iter().cloned().fold(0.0, f64::max)
    }

    /// α + λψ at node i.
    pub fn u(&self, i: usize) -> f64 {
        self.alpha + self.lambda * self.psi[i]
    }

    /// ρ = [α + λψ]_+^p.
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|&s| (self.alpha + self.lambda * s).max(0.0).powf(self.p)).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_newton: usize,
    pub max_picard: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_newton: MAX_NEWTON, max_picard: MAX_PICARD, tol: CONVERGED }
    }
}

/// Discrete residual: (Aψ - ρ, h^N Σρ - 1).
pub fn residual(domain: &DomainGrid, p: f64, lambda: f64, psi: &[f64], alpha: f64) -> (Vec<f64>, f64) {
    let mut r = domain.apply_vec(psi);
    let mut mass = 0.0;
    for (ri, &s) in r.iter_mut().zip(psi) {
        let rho = (alpha + lambda * s).max(0.0).powf(p);
        *ri -= rho;
        mass += rho;
    }
    (r, mass * domain.cell_volume() - 1.0)
}

/// Jacobian of [`residual`] applied to (δψ, δα).
pub fn jacobian_apply(domain: &DomainGrid, p: f64, lambda: f64, psi: &[f64], alpha: f64, dpsi: &[f64], dalpha: f64) -> (Vec<f64>, f64) {
    let mut y = domain.apply_vec(dpsi);
    let mut c = 0.0;
    for i in 0..psi.len() {
        let d = derivative(p, alpha + lambda * psi[i]);
        let lin = d * (lambda * dpsi[i] + dalpha);
        y[i] -= lin;
        c += lin;
    }
    (y, c * domain.cell_volume())
}

fn derivative(p: f64, u: f64) -> f64 {
    if u > 0.0 {
        p * u.powf(p - 1.0)
    } else {
        0.0
    }
}

struct Norms {
    pde: f64,
    constraint: f64,
    merit: f64,
}

fn norms(domain: &DomainGrid, p: f64, lambda: f64, psi: &[f64], alpha: f64) -> Norms {
    let (r, c) = residual(domain, p, lambda, psi, alpha);
    let rho_norm = psi.iter().map(|&s| (alpha + lambda * s).max(0.0).powf(2.0 * p)).sum::<f64>().sqrt();
    let pde = norm2(&r) / rho_norm.max(1e-300);
    Norms { pde, constraint: c.abs(), merit: (pde * pde + c * c).sqrt() }
}

fn finish(domain: &DomainGrid, p: f64, lambda: f64, psi: Vec<f64>, alpha: f64, newton: usize, picard: usize) -> Result<PlasmaSolution> {
    let nr = norms(domain, p, lambda, &psi, alpha);
    let min = psi.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonPositivePsi(min));
    }
    let energy = 0.5 * domain.dirichlet_energy(&psi);
    let plasma = psi.iter().filter(|&&s| alpha + lambda * s > 0.0).count() as f64 * domain.cell_volume();
    Ok(PlasmaSolution {
        p,
        lambda,
        alpha,
        psi,
        energy,
        plasma_volume: plasma,
        residual_pde: nr.pde,
        residual_constraint: nr.constraint,
        newton_steps: newton,
        picard_steps: picard,
    })
}

/// The λ = 0 solution: α = |Ω|^{-1/p}, ψ = α^p × torsion.
pub fn seed_solution(domain: &DomainGrid, p: f64) -> Result<PlasmaSolution> {
    let alpha = domain.measure.powf(-1.0 / p);
    let t = torsion(domain)?;
    let psi: Vec<f64> = t.psi0.iter().map(|v| v * alpha.powf(p)).collect();
    finish(domain, p, 0.0, psi, alpha, 0, 0)
}

/// α with h^N Σ[α + λψ]_+^p = 1 (monotone bisection).
pub fn fit_alpha(domain: &DomainGrid, p: f64, lambda: f64, psi: &[f64]) -> f64 {
    let g = |a: f64| psi.iter().map(|&s| (a + lambda * s).max(0.0).powf(p)).sum::<f64>() * domain.cell_volume() - 1.0;
    let smax = psi.iter().cloned().fold(0.0, f64::max);
    let mut lo = -lambda * smax;
    let mut hi = domain.measure.powf(-1.0 / p).max(1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One Newton direction from the symmetrized bordered system.
fn newton_direction(domain: &DomainGrid, p: f64, lambda: f64, psi: &[f64], alpha: f64, merit: f64) -> Result<(Vec<f64>, f64)> {
    let n = psi.len();
    let hv = domain.cell_volume();
    let (r, c) = residual(domain, p, lambda, psi, alpha);
    let d: Vec<f64> = psi.iter().map(|&s| derivative(p, alpha + lambda * s)).collect();
    let sd: f64 = d.iter().sum();
    if sd == 0.0 {
        return Err(Error::NonConvergence("empty plasma region".into()));
    }
    // [[A - λD, -d], [-dᵀ, -Σd/λ]] (δψ, δα) = (-r, c/(λ h^N))
    let apply = |x: &[f64], y: &mut [f64]| {
        domain.apply(&x[..n], &mut y[..n]);
        let da = x[n];
        let mut last = 0.0;
        for i in 0..n {
            y[i] -= lambda * d[i] * x[i] + d[i] * da;
            last -= d[i] * x[i];
        }
        y[n] = last - sd / lambda * da;
    };
    let mg = domain.multigrid();
    let mut md = vec![0.0; n];
    mg.vcycle(domain, &d, &mut md);
    let schur = sd / lambda + dot(&d, &md);
    let precond = |x: &[f64], y: &mut [f64]| {
        mg.vcycle(domain, &x[..n], &mut y[..n]);
        y[n] = x[n] / schur;
    };
    let mut b = vec![0.0; n + 1];
    for i in 0..n {
        b[i] = -r[i];
    }
    b[n] = c / (lambda * hv);
    let mut x = vec![0.0; n + 1];
    let tol = (1e-2 * merit).clamp(1e-13, 1e-4);
    minres(apply, precond, &b, &mut x, tol, 1000)?;
    let da = x[n];
    x.truncate(n);
    Ok((x, da))
}

/// Solves (P_λ) on the grid, warm-started from `init` if given.
pub fn solve_plasma(domain: &DomainGrid, p: f64, lambda: f64, init: Option<&PlasmaSolution>, opts: SolverOptions) -> Result<PlasmaSolution> {
    if !(p > 1.0) {
        return Err(Error::OutOfRange(format!("p = {p} must exceed 1")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::OutOfRange(format!("lambda = {lambda} must be nonnegative")));
    }
    if lambda == 0.0 {
        return seed_solution(domain, p);
    }
    let (mut psi, mut alpha) = match init {
        Some(s) if s.psi.len() == domain.len() => (s.psi.clone(), s.alpha),
        _ => {
            let s = seed_solution(domain, p)?;
            (s.psi, s.alpha)
        }
    };
    let mut newton = 0;
    let mut picard = 0;
    let mut nr = norms(domain, p, lambda, &psi, alpha);
    let mut rounds = 0;
    loop {
        // Newton with backtracking
        let mut stalled = false;
        while newton < opts.max_newton && nr.merit > POLISH {
            let Ok((dpsi, da)) = newton_direction(domain, p, lambda, &psi, alpha, nr.merit) else {
                stalled = true;
                break;
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = psi.iter().zip(&dpsi).map(|(a, b)| a + t * b).collect();
                let ta = alpha + t * da;
                let tn = norms(domain, p, lambda, &trial, ta);
                if tn.merit.is_finite() && tn.merit <= (1.0 - 1e-4 * t) * nr.merit {
                    psi = trial;
                    alpha = ta;
                    nr = tn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            newton += 1;
            if !accepted {
                stalled = true;
                break;
            }
        }
        if nr.pde <= opts.tol && nr.constraint <= opts.tol {
            return finish(domain, p, lambda, psi, alpha, newton, picard);
        }
        rounds += 1;
        if rounds > 3 || (!stalled && newton >= opts.max_newton) {
            return Err(Error::NoConvergence { lambda, pde: nr.pde, constraint: nr.constraint });
        }
        // damped Picard: ψ ← (1-ω)ψ + ω A^{-1}[α + λψ]_+^p with α refit
        let target = nr.merit * 1e-3;
        let mut omega = 1.0;
        let mut next = psi.clone();
        for _ in 0..opts.max_picard {
            alpha = fit_alpha(domain, p, lambda, &psi);
            let rho: Vec<f64> = psi.iter().map(|&s| (alpha + lambda * s).max(0.0).powf(p)).collect();
            solve_into(domain, &rho, &mut next, 1e-12)?;
            let trial: Vec<f64> = psi.iter().zip(&next).map(|(a, b)| a + omega * (b - a)).collect();
            let ta = fit_alpha(domain, p, lambda, &trial);
            let tn = norms(domain, p, lambda, &trial, ta);
            picard += 1;
            if tn.merit < nr.merit {
                psi = trial;
                alpha = ta;
                nr = tn;
                omega = (omega * 1.5).min(1.0);
            } else {
                omega *= 0.5;
                if omega < 1e-3 {
                    break;
                }
            }
            if nr.merit < target {
                break;
            }
        }
    }
}

/// Solves from `starts` randomized initial states; returns every converged solution.
pub fn multistart(domain: &DomainGrid, p: f64, lambda: f64, starts: usize, seed: u64) -> Result<Vec<PlasmaSolution>> {
    let base = seed_solution(domain, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(starts);
    for _ in 0..starts {
        let amp: f64 = rng.gen_range(0.3..3.0);
        let phase: [f64; 3] = [rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28), rng.gen_range(0.0..6.28)];
        let freq: f64 = rng.gen_range(1.0..6.0);
        let psi: Vec<f64> = (0..domain.len())
            .map(|i| {
                let x = domain.position(i);
                let wiggle = 1.0 + 0.5 * (freq * x[0] + phase[0]).sin() * (freq * x[1] + phase[1]).cos() * (freq * x[2] + phase[2]).cos();
                base.psi[i] * amp * wiggle
            })
            .collect();
        let alpha = base.alpha * rng.gen_range(0.2..2.0);
        let init = PlasmaSolution { psi, alpha, ..base.clone() };
        out.push(solve_plasma(domain, p, lambda, Some(&init), SolverOptions::default())?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Shape;

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 16.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let psi: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(0.0..0.1)).collect();
            let alpha = rng.gen_range(-0.5..1.0);
            let lambda = rng.gen_range(1.0..30.0);
            let dpsi: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let da = rng.gen_range(-1.0..1.0);
            let eps = 1e-6;
            let plus: Vec<f64> = psi.iter().zip(&dpsi).map(|(a, b)| a + eps * b).collect();
            let (r1, c1) = residual(&g, 2.0, lambda, &plus, alpha + eps * da);
            let (r0, c0) = residual(&g, 2.0, lambda, &psi, alpha);
            let (jv, jc) = jacobian_apply(&g, 2.0, lambda, &psi, alpha, &dpsi, da);
            let fd: Vec<f64> = r1.iter().zip(&r0).map(|(a, b)| (a - b) / eps).collect();
            let mut diff: Vec<f64> = fd.iter().zip(&jv).map(|(a, b)| a - b).collect();
            diff.push((c1 - c0) / eps - jc);
            let mut full = jv.clone();
            full.push(jc);
            let err = norm2(&diff) / norm2(&full);
            assert!(err < 1e-4, "{err}");
        }
    }

    #[test]
    fn seed_is_torsion() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
        let s = solve_plasma(&g, 2.0, 0.0, None, SolverOptions::default()).unwrap();
        assert!((s.alpha - 1.0).abs() < 1e-3);
        let two_e = 2.0 * s.energy;
        assert!((two_e - 1.0 / (8.0 * std::f64::consts::PI)).abs() * 8.0 * std::f64::consts::PI < 2e-3);
    }

    #[test]
    fn newton_converges_on_disk() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
        let mut prev = seed_solution(&g, 2.0).unwrap();
        for lam in [4.0, 8.0, 12.0, 16.0, 20.0] {
            let s = solve_plasma(&g, 2.0, lam, Some(&prev), SolverOptions::default()).unwrap();
            assert!(s.residual_pde <= CONVERGED && s.residual_constraint <= CONVERGED);
            assert!(s.alpha < prev.alpha);
            prev = s;
        }
        assert!(prev.alpha < 0.0);
    }
}
