//! Continuation in λ along the branch starting at the torsion seed.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diagnostics::{energy_audit, functionals, sigma};
use super::solver::{seed_solution, solve_plasma, PlasmaSolution, SolverOptions};
use crate::elliptic::{DomainGrid, Shape};
use crate::emden::{solve_ball, BallConstants, Drive, EmdenProfile, GroundState};
use crate::error::{Error, Result};
use crate::geometry::omega;

/// Smallest step, as a fraction of the initial one, before the branch is declared truncated.
const MIN_STEP: f64 = 1.0 / 256.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchEntry {
    pub lambda: f64,
    pub alpha: f64,
    pub energy: f64,
    pub psi_max: f64,
    pub plasma_volume: f64,
    pub sigma: Option<f64>,
    pub ratio2d: Option<f64>,
    pub mu_minus: Option<f64>,
    pub plasma_grad: Option<f64>,
    pub entropy_ratio: Option<f64>,
    pub residual_pde: f64,
    pub residual_constraint: f64,
}

/// Where the entries came from; enough to rebuild fields for later analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchSource {
    Grid { n: usize, p: f64, domain: String, shape: Shape, h: f64 },
    Ball { n: usize, p: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub source: BranchSource,
    pub entries: Vec<BranchEntry>,
    /// (λ before, λ after) bracketing the first sign change of α.
    pub sign_change: Option<(f64, f64)>,
    /// Set when continuation stopped early.
    pub truncated: Option<String>,
}

pub const BRANCH_CSV_HEADER: [&str; 8] = ["lambda", "alpha", "energy", "psi_max", "plasma_volume", "sigma", "ratio2d", "mu_minus"];

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

impl Branch {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(BRANCH_CSV_HEADER)?;
        for e in &self.entries {
            w.write_record([
                format!("{:.12e}", e.lambda),
                format!("{:.12e}", e.alpha),
                format!("{:.12e}", e.energy),
                format!("{:.12e}", e.psi_max),
                format!("{:.12e}", e.plasma_volume),
                fmt_opt(e.sigma),
                fmt_opt(e.ratio2d),
                fmt_opt(e.mu_minus),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Branch> {
        Ok(serde_json::from_reader(std::fs::File::open(path)?)?)
    }

    /// Exact branch on the unit-volume ball at the given λ values.
    pub fn from_ball(profile: Arc<EmdenProfile>, lambdas: &[f64]) -> Result<Branch> {
        let (n, p) = (profile.n, profile.p);
        let mut entries = Vec::with_capacity(lambdas.len());
        let mut sign_change = None;
        let mut prev: Option<(f64, f64)> = None;
        for &lam in lambdas {
            let s = solve_ball(profile.clone(), Drive::Lambda(lam))?;
            let neg = s.alpha < 0.0;
            let nf = n as f64;
            let plasma_grad = s.plasma_grad();
            let entry = BranchEntry {
                lambda: lam,
                alpha: s.alpha,
                energy: s.energy(),
                psi_max: s.psi_max(),
                plasma_volume: s.plasma_volume(),
                sigma: sigma(n, p, lam, s.alpha),
                ratio2d: (neg && n == 2).then(|| plasma_grad * 8.0 * std::f64::consts::PI / (p + 1.0)),
                mu_minus: (neg && n >= 3).then(|| {
                    0.5 * plasma_grad * 4.0 * nf * nf * omega(n).powf(2.0 / nf) * s.plasma_volume().powf(1.0 - 2.0 / nf) / (p + 1.0)
                }),
                plasma_grad: neg.then_some(plasma_grad),
                entropy_ratio: neg.then(|| s.entropy_integral() / s.alpha.abs()),
                residual_pde: 0.0,
                residual_constraint: (s.positive_power_integral(p) - 1.0).abs(),
            };
            if let Some((pl, pa)) = prev {
                if sign_change.is_none() && (pa > 0.0) != (entry.alpha > 0.0) {
                    sign_change = Some((pl, lam));
                }
            }
            prev = Some((lam, entry.alpha));
            entries.push(entry);
        }
        Ok(Branch { source: BranchSource::Ball { n, p }, entries, sign_change, truncated: None })
    }
}

pub fn entry_from_solution(domain: &DomainGrid, sol: &PlasmaSolution) -> BranchEntry {
    let audit = energy_audit(domain, sol).ok();
    let f = functionals(domain, sol);
    BranchEntry {
        lambda: sol.lambda,
        alpha: sol.alpha,
        energy: sol.energy,
        psi_max: sol.psi_max(),
        plasma_volume: sol.plasma_volume,
        sigma: sigma(domain.n, sol.p, sol.lambda, sol.alpha),
        ratio2d: audit.as_ref().and_then(|a| a.ratio2d),
        mu_minus: audit.as_ref().and_then(|a| a.mu_minus),
        plasma_grad: audit.as_ref().map(|a| a.plasma_grad),
        entropy_ratio: f.entropy_ratio,
        residual_pde: sol.residual_pde,
        residual_constraint: sol.residual_constraint,
    }
}

/// Result of a grid continuation: the branch plus the solutions along it.
#[derive(Debug, Clone)]
pub struct Continuation {
    pub branch: Branch,
    pub solutions: Vec<PlasmaSolution>,
}

/// Marches λ from 0 to `lambda_max` with adaptive steps.
pub fn continuation(domain: &DomainGrid, p: f64, lambda_max: f64, steps: usize) -> Result<Continuation> {
    if !(p > 1.0) {
        return Err(Error::OutOfRange(format!("p = {p} must exceed 1")));
    }
    let seed = seed_solution(domain, p)?;
    let mut sols = vec![seed];
    let mut branch = Branch {
        source: BranchSource::Grid { n: domain.n, p, domain: domain.describe(), shape: domain.shape.clone(), h: domain.h },
        entries: vec![entry_from_solution(domain, &sols[0])],
        sign_change: None,
        truncated: None,
    };
    if !(lambda_max > 0.0) {
        return Ok(Continuation { branch, solutions: sols });
    }
    let initial = lambda_max / steps.max(2) as f64;
    let mut dl = initial;
    let mut streak = 0;
    let mut lambda = 0.0;
    while lambda < lambda_max * (1.0 - 1e-12) {
        let target = (lambda + dl).min(lambda_max);
        let last = sols.last().unwrap();
        // secant predictor
        let guess = if sols.len() >= 2 {
            let prev = &sols[sols.len() - 2];
            let t = (target - last.lambda) / (last.lambda - prev.lambda);
            let psi = last.psi.iter().zip(&prev.psi).map(|(a, b)| a + t * (a - b)).map(|v| v.max(0.0)).collect();
            PlasmaSolution { psi, alpha: last.alpha + t * (last.alpha - prev.alpha), ..last.clone() }
        } else {
            last.clone()
        };
        match solve_plasma(domain, p, target, Some(&guess), SolverOptions::default())
            .or_else(|_| solve_plasma(domain, p, target, Some(last), SolverOptions::default()))
        {
            Ok(sol) => {
                if branch.sign_change.is_none() && (last.alpha > 0.0) != (sol.alpha > 0.0) {
                    branch.sign_change = Some((last.lambda, sol.lambda));
                }
                branch.entries.push(entry_from_solution(domain, &sol));
                lambda = target;
                sols.push(sol);
                streak += 1;
                if streak >= 3 {
                    dl = (2.0 * dl).min(initial);
                    streak = 0;
                }
            }
            Err(e) => {
                streak = 0;
                dl *= 0.5;
                if dl < MIN_STEP * initial {
                    branch.truncated = Some(format!("stopped at lambda = {lambda}: {e}"));
                    break;
                }
            }
        }
    }
    Ok(Continuation { branch, solutions: sols })
}

/// Interpolates a coarse solution onto a finer grid and re-solves there.
pub fn refine(coarse: &DomainGrid, sol: &PlasmaSolution, fine: &DomainGrid) -> Result<PlasmaSolution> {
    let psi: Vec<f64> = (0..fine.len()).map(|i| coarse.interpolate(&sol.psi, &fine.position(i)[..fine.n]).max(0.0)).collect();
    let init = PlasmaSolution { psi, ..sol.clone() };
    solve_plasma(fine, sol.p, sol.lambda, Some(&init), SolverOptions::default())
}

/// Richardson extrapolation of a quantity with O(h²) error from its values at h and h/2.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Ground state helper used by branch analyses.
pub fn ground_for(profile: Arc<EmdenProfile>) -> Result<GroundState> {
    GroundState::new(profile, 0.0)
}

/// Closed-form ball thresholds for a profile.
pub fn ball_thresholds(profile: &EmdenProfile) -> BallConstants {
    BallConstants::new(profile)
}
