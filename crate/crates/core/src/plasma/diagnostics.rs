//! Energy splits, variational functionals and level-set curves of a grid solution.

use serde::Serialize;

use super::solver::PlasmaSolution;
use crate::elliptic::DomainGrid;
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, omega};

/// Portion of a link carrying u > 0, with u linear along the link.
fn positive_fraction(ua: f64, ub: f64) -> f64 {
    match (ua > 0.0, ub > 0.0) {
        (true, true) => 1.0,
        (false, false) => 0.0,
        (true, false) => ua / (ua - ub),
        (false, true) => ub / (ub - ua),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyAudit {
    pub energy: f64,
    pub plasma_grad: f64,
    pub vacuum_grad: f64,
    /// |2E - (∫_{Ω+}|∇ψ|² - α/λ)|
    pub identity_residual: f64,
    /// |∫_{Ω-}|∇ψ|² + α/λ|
    pub vacuum_residual: f64,
    /// ∫_{Ω+}|∇ψ|² · 8π/(p+1), N = 2
    pub ratio2d: Option<f64>,
    /// (E - |α|/(2λ)) 4N²ω_N^{2/N}|Ω+|^{1-2/N}/(p+1), N >= 3
    pub mu_minus: Option<f64>,
}

/// ∫_{Ω+}|∇ψ|², splitting each link by the part where α + λψ > 0.
pub fn plasma_gradient(domain: &DomainGrid, sol: &PlasmaSolution) -> f64 {
    let mut acc = 0.0;
    domain.for_each_edge(&sol.psi, |i, j, _, e| {
        let ui = sol.u(i);
        let uj = match j {
            Some(j) => sol.u(j),
            None => sol.alpha,
        };
        acc += e * positive_fraction(ui, uj);
    });
    acc
}

pub fn energy_audit(domain: &DomainGrid, sol: &PlasmaSolution) -> Result<EnergyAudit> {
    if sol.alpha >= 0.0 {
        return Err(Error::SignMismatch(format!("energy split needs alpha < 0, got {}", sol.alpha)));
    }
    let plasma = plasma_gradient(domain, sol);
    let total = 2.0 * sol.energy;
    let vacuum = total - plasma;
    let t0 = -sol.alpha / sol.lambda;
    let n = domain.n;
    let nf = n as f64;
    Ok(EnergyAudit {
        energy: sol.energy,
        plasma_grad: plasma,
        vacuum_grad: vacuum,
        identity_residual: (total - (plasma + t0)).abs(),
        vacuum_residual: (vacuum - t0).abs(),
        ratio2d: (n == 2).then(|| plasma * 8.0 * std::f64::consts::PI / (sol.p + 1.0)),
        mu_minus: (n >= 3).then(|| {
            (sol.energy - sol.alpha.abs() / (2.0 * sol.lambda)) * 4.0 * nf * nf * omega(n).powf(2.0 / nf)
                * sol.plasma_volume.powf(1.0 - 2.0 / nf)
                / (sol.p + 1.0)
        }),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Functionals {
    /// J_λ(α + λψ)
    pub j: f64,
    /// 2ℱ_λ(ρ) from its definition
    pub two_f: f64,
    /// ((p-1)/(p+1))∫[α+λψ]_+^{p+1} + α
    pub two_f_identity: f64,
    pub identity_residual: f64,
    /// |J - ℱ|
    pub equivalence_residual: f64,
    pub entropy_ratio: Option<f64>,
}

pub fn functionals(domain: &DomainGrid, sol: &PlasmaSolution) -> Functionals {
    let p = sol.p;
    let s: f64 = domain.integrate(&sol.psi.iter().map(|&v| (sol.alpha + sol.lambda * v).max(0.0).powf(p + 1.0)).collect::<Vec<_>>());
    let grad = 2.0 * sol.energy;
    let j = 0.5 * sol.lambda * grad - s / (p + 1.0) + sol.alpha;
    let f = p / (p + 1.0) * s - 0.5 * sol.lambda * grad;
    let two_f_identity = (p - 1.0) / (p + 1.0) * s + sol.alpha;
    Functionals {
        j,
        two_f: 2.0 * f,
        two_f_identity,
        identity_residual: (2.0 * f - two_f_identity).abs(),
        equivalence_residual: (j - f).abs(),
        entropy_ratio: (sol.alpha < 0.0).then(|| s / sol.alpha.abs()),
    }
}

/// Quantization parameter σ = (λ/|α|^{1-p/p_N})^{N/2}, for α < 0.
pub fn sigma(n: usize, p: f64, lambda: f64, alpha: f64) -> Option<f64> {
    (alpha < 0.0).then(|| (lambda / alpha.abs().powf(1.0 - p / critical_exponent(n))).powf(n as f64 / 2.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSetProfile {
    pub levels: Vec<f64>,
    pub m: Vec<f64>,
    pub mu: Vec<f64>,
    pub e: Vec<f64>,
}

fn above_fraction(a: f64, b: f64, t: f64) -> f64 {
    positive_fraction(a - t, b - t)
}

/// m(t), μ(t), e(t) on `count` uniform levels in [0, ‖ψ‖∞].
pub fn level_set_profiles(domain: &DomainGrid, sol: &PlasmaSolution, count: usize) -> LevelSetProfile {
    let count = count.max(2);
    let top = sol.psi_max();
    let rho = sol.density();
    let hv = domain.cell_volume();
    let levels: Vec<f64> = (0..count).map(|k| top * k as f64 / (count - 1) as f64).collect();
    let mut m = Vec::with_capacity(count);
    let mut mu = Vec::with_capacity(count);
    let mut e = Vec::with_capacity(count);
    let mut edges: Vec<(f64, f64, f64)> = Vec::new();
    domain.for_each_edge(&sol.psi, |i, j, _, en| {
        edges.push((sol.psi[i], j.map(|j| sol.psi[j]).unwrap_or(0.0), en));
    });
    for &t in &levels {
        let (mut mm, mut vol) = (0.0, 0.0);
        for (k, &s) in sol.psi.iter().enumerate() {
            // the top level is exclusive
            if s > t {
                mm += rho[k];
                vol += 1.0;
            }
        }
        m.push(mm * hv);
        mu.push(vol * hv);
        e.push(edges.iter().map(|&(a, b, en)| en * above_fraction(a, b, t)).sum());
    }
    LevelSetProfile { levels, m, mu, e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::Shape;
    use crate::plasma::solver::{seed_solution, solve_plasma, SolverOptions};

    #[test]
    fn seed_identities() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
        let s = seed_solution(&g, 2.0).unwrap();
        let f = functionals(&g, &s);
        assert!(f.identity_residual < 1e-10);
        assert!(f.entropy_ratio.is_none());
        assert!(energy_audit(&g, &s).is_err());
        let ls = level_set_profiles(&g, &s, 20);
        assert!((ls.m[0] - 1.0).abs() < 1e-9 && (ls.mu[0] - g.measure).abs() < 1e-12);
        assert_eq!((ls.m[19], ls.mu[19], ls.e[19]), (0.0, 0.0, 0.0));
    }

    #[test]
    fn vacuum_identity_on_disk() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
        let mut s = seed_solution(&g, 2.0).unwrap();
        for lam in [5.0, 10.0, 15.0, 20.0] {
            s = solve_plasma(&g, 2.0, lam, Some(&s), SolverOptions::default()).unwrap();
        }
        let a = energy_audit(&g, &s).unwrap();
        assert!(a.vacuum_residual < 5e-3 * s.energy, "{a:?}");
        let f = functionals(&g, &s);
        assert!(f.equivalence_residual < 1e-8 * f.j.abs().max(1.0));
    }
}
