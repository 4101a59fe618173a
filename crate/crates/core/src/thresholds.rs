//! Positivity and uniqueness thresholds built from Sobolev constants.
//!
//! Every quantity here is closed-form arithmetic on top of Λ(Ω,q). The
//! constants are memoized per exponent in a [`SobolevTable`].

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::elliptic::{ball_sobolev, sobolev_constant, DomainGrid, Shape};
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, omega, unit_volume_radius};

/// Where Λ(Ω,q) comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSource {
    /// Normalized inverse iteration on the grid.
    Grid,
    /// Radial ground state of a ball of the given radius.
    Radial { n: usize, radius: f64 },
}

/// Memoized Λ(Ω,q) for one domain.
pub struct SobolevTable<'a> {
    domain: &'a DomainGrid,
    source: LambdaSource,
    cache: Mutex<BTreeMap<u64, f64>>,
}

impl<'a> SobolevTable<'a> {
    /// Radial oracle for balls and disks, grid iteration otherwise.
    pub fn new(domain: &'a DomainGrid) -> Self {
        let source = match &domain.shape {
            Shape::Ball { radius, .. } => LambdaSource::Radial { n: domain.n, radius: *radius },
            _ => LambdaSource::Grid,
        };
        SobolevTable { domain, source, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn grid(domain: &'a DomainGrid) -> Self {
        SobolevTable { domain, source: LambdaSource::Grid, cache: Mutex::new(BTreeMap::new()) }
    }

    pub fn source(&self) -> LambdaSource {
        self.source
    }

    pub fn domain(&self) -> &DomainGrid {
        self.domain
    }

    pub fn lambda(&self, q: f64) -> Result<f64> {
        if let Some(v) = self.cache.lock().unwrap().get(&q.to_bits()) {
            return Ok(*v);
        }
        let v = match self.source {
            LambdaSource::Grid => sobolev_constant(self.domain, q)?.lambda,
            LambdaSource::Radial { n, radius } => ball_sobolev(n, radius, q, 1e-11)?,
        };
        self.cache.lock().unwrap().insert(q.to_bits(), v);
        Ok(v)
    }

    /// |Ω| from the analytic shape when known.
    pub fn volume(&self) -> f64 {
        self.domain.shape.volume().unwrap_or(self.domain.measure)
    }

    pub fn inradius(&self) -> f64 {
        self.domain.inradius
    }
}

fn need_planar(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::DimensionUnsupported(n));
    }
    Ok(())
}

fn check_s(n: usize, p: f64, s: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionUnsupported(n));
    }
    let pn = critical_exponent(n);
    if !(p > 1.0 && p < pn) {
        return Err(Error::OutOfRange(format!("p = {p} outside (1, {pn})")));
    }
    if !(s > p && s < pn) {
        return Err(Error::OutOfRange(format!("s = {s} outside ({p}, {pn})")));
    }
    Ok(())
}

/// λ_0 = (8π/(p+1))^{(p-1)/(2p)} Λ(Ω,p+1)^{(p+1)/(2p)}.
pub fn lambda0(table: &SobolevTable, p: f64) -> Result<f64> {
    need_planar(table.domain.n)?;
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("lambda0 needs p >= 1, got {p}")));
    }
    let l = table.lambda(p + 1.0)?;
    Ok((8.0 * PI / (p + 1.0)).powf((p - 1.0) / (2.0 * p)) * l.powf((p + 1.0) / (2.0 * p)))
}

/// Λ(Ω,2p)/p, a lower bound for the end of the positive branch.
pub fn mu_star(table: &SobolevTable, p: f64) -> Result<f64> {
    Ok(table.lambda(2.0 * p)? / p)
}

pub fn ell_s(table: &SobolevTable, p: f64, s: f64) -> Result<f64> {
    let n = table.domain.n;
    check_s(n, p, s)?;
    let nf = n as f64;
    let ks = 1.0 - s / critical_exponent(n);
    let rn = unit_volume_radius(n);
    let l = table.lambda(p + 1.0)?;
    let base = (nf * (nf - 2.0) * ks / rn.powf(nf * ks)).powf((p - 1.0) / (s - p)) * l.powf(p + 1.0);
    Ok(base.powf((s - p) / (p * (2.0 * s - (p + 1.0)))))
}

/// The dimensional constant N(N-2)ω_N^{2/N} of the Green function L^s bound.
fn green_constant(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 2.0) * omega(n).powf(2.0 / nf)
}

fn nu_from_lambda(n: usize, p: f64, s: f64, l: f64) -> f64 {
    let nf = n as f64;
    let d = p * (2.0 * s - p - 1.0);
    green_constant(n).powf(s * (p - 1.0) / d)
        * (nf * (1.0 - s / critical_exponent(n))).powf((p - 1.0) / d)
        * l.powf((p + 1.0) * (s - p) / d)
}

/// Lower bound for λ on solutions with α <= 0, from the sup bound on ψ.
pub fn nu_s(table: &SobolevTable, p: f64, s: f64) -> Result<f64> {
    let n = table.domain.n;
    check_s(n, p, s)?;
    Ok(nu_from_lambda(n, p, s, table.lambda(p + 1.0)?))
}

pub fn midpoint_s(n: usize, p: f64) -> f64 {
    0.5 * (p + critical_exponent(n))
}

/// The s = (p+p_N)/2 specialization written out in closed form.
pub fn nu_midpoint_closed(n: usize, p: f64, l: f64) -> f64 {
    let nf = n as f64;
    let pn = critical_exponent(n);
    green_constant(n).powf((p - 1.0) / (pn - 1.0) * (pn + p) / (2.0 * p))
        * (0.5 * nf * (1.0 - p / pn)).powf((p - 1.0) / (p * (pn - 1.0)))
        * l.powf((p + 1.0) / (2.0 * p) * (pn - p) / (pn - 1.0))
}

/// ‖ψ‖_∞ ≤ λ^{p/(s-p)} / ([N(N-2)ω_N^{2/N}]^{s/(s-p)} [N(1-s/p_N)]^{1/(s-p)}).
pub fn psi_sup_bound(n: usize, p: f64, s: f64, lambda: f64) -> Result<f64> {
    check_s(n, p, s)?;
    let nf = n as f64;
    Ok(lambda.powf(p / (s - p))
        / (green_constant(n).powf(s / (s - p)) * (nf * (1.0 - s / critical_exponent(n))).powf(1.0 / (s - p))))
}

/// ln ∏_{k=0}^{[x]-1} (x - k).
fn ln_falling(x: f64) -> f64 {
    (0..x.floor() as usize).map(|k| (x - k as f64).ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtzBounds {
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided bounds on Λ(Ω,q), q > 2, in terms of |Ω| and the inradius.
pub fn ctz_bounds(volume: f64, inradius: f64, q: f64) -> Result<CtzBounds> {
    if !(q > 2.0) {
        return Err(Error::OutOfRange(format!("bounds need exponent > 2, got {q}")));
    }
    let lower = 4.0 * PI / volume.powf(2.0 / q) / (2.0 / q * ln_falling(q / 2.0)).exp();
    let upper = 8.0 * PI * E / q * (PI * inradius * inradius).powf(-2.0 / q);
    Ok(CtzBounds { q, lower, upper })
}

/// Upper bound F(p) for (μ/λ_0)^p.
pub fn f_p(volume: f64, inradius: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::OutOfRange(format!("F(p) needs p > 1, got {p}")));
    }
    let lead = volume / (PI * inradius * inradius) * (2.0 / (p + 1.0)).sqrt();
    let base = E / p.sqrt() * ((p + 1.0) / (2.0 * p)).sqrt();
    if p <= 30.0 {
        let prod: f64 = (0..((p + 1.0) / 2.0).floor() as usize).map(|k| (p + 1.0) / 2.0 - k as f64).product();
        Ok(lead * base.powf(p) * p.powf(-p) * prod)
    } else {
        Ok((lead.ln() + p * base.ln() - p * p.ln() + ln_falling((p + 1.0) / 2.0)).exp())
    }
}

/// Smallest μ_+ for which the α >= 0 energy bound holds at a given solution:
/// E ≤ (p+1)/(4N²ω^{2/N}) μ + (α/2λ)(α^p - 1/μ)μ, with ω = ω_N.
pub fn mu_plus_min(n: usize, p: f64, lambda: f64, alpha: f64, energy: f64) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::SignMismatch(format!("mu_+ needs alpha >= 0, got {alpha}")));
    }
    let nf = n as f64;
    let c = (p + 1.0) / (4.0 * nf * nf * omega(n).powf(2.0 / nf));
    if lambda == 0.0 {
        return Ok(energy / c);
    }
    Ok((energy + alpha / (2.0 * lambda)) / (c + alpha.powf(p + 1.0) / (2.0 * lambda)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub domain: String,
    pub p: f64,
    pub lambda0: Option<f64>,
    #[serde(rename = "muStar")]
    pub mu_star: f64,
    pub ell_s: BTreeMap<String, f64>,
    pub nu_s: BTreeMap<String, f64>,
    pub ctz: Vec<CtzBounds>,
    #[serde(rename = "Fp")]
    pub fp: Option<f64>,
    pub notes: Vec<String>,
}

fn key(s: f64) -> String {
    format!("{s}")
}

/// Everything that applies to the domain's dimension. For N >= 3 the midpoint
/// s = (p+p_N)/2 is always included in `nu_s`.
pub fn threshold_report(table: &SobolevTable, p: f64, s_list: &[f64]) -> Result<ThresholdReport> {
    let n = table.domain.n;
    let mut notes = Vec::new();
    if let LambdaSource::Radial { .. } = table.source {
        notes.push("Sobolev constants from the radial ground state".to_string());
    }
    let mut report = ThresholdReport {
        domain: table.domain.describe(),
        p,
        lambda0: None,
        mu_star: mu_star(table, p)?,
        ell_s: BTreeMap::new(),
        nu_s: BTreeMap::new(),
        ctz: Vec::new(),
        fp: None,
        notes,
    };
    if n == 2 {
        report.lambda0 = Some(lambda0(table, p)?);
        let (vol, d) = (table.volume(), table.inradius());
        for q in [p + 1.0, 2.0 * p] {
            if q > 2.0 {
                report.ctz.push(ctz_bounds(vol, d, q)?);
            }
        }
        if p > 1.0 {
            report.fp = Some(f_p(vol, d, p)?);
        }
    } else {
        for &s in s_list {
            report.ell_s.insert(key(s), ell_s(table, p, s)?);
            report.nu_s.insert(key(s), nu_s(table, p, s)?);
        }
        let mid = midpoint_s(n, p);
        report.nu_s.insert(key(mid), nu_s(table, p, mid)?);
        report.notes.push(format!("nu_s midpoint s = {mid}"));
        report.notes.push("Green-function constant uses omega_N^(2/N) in nu_s, psi bound and mu_+".to_string());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falling_product_matches_direct() {
        let direct: f64 = (0..3).map(|k| 3.5 - k as f64).product();
        assert!((ln_falling(3.5).exp() - direct).abs() < 1e-12);
    }

    #[test]
    fn fp_log_branch_is_continuous() {
        // p = 30 evaluated both ways
        let lead = (2.0 / 31.0f64).sqrt();
        let base = E / 30f64.sqrt() * (31.0f64 / 60.0).sqrt();
        let log = (lead.ln() + 30.0 * base.ln() - 30.0 * 30f64.ln() + ln_falling(15.5)).exp();
        let direct = f_p(1.0, PI.powf(-0.5), 30.0).unwrap();
        assert!((log - direct).abs() / direct < 1e-10);
    }

    #[test]
    fn midpoint_closed_form() {
        for (n, p) in [(3, 2.0), (4, 1.5), (5, 1.3)] {
            let s = midpoint_s(n, p);
            let a = nu_from_lambda(n, p, s, 37.0);
            let b = nu_midpoint_closed(n, p, 37.0);
            assert!((a - b).abs() / b < 1e-12, "{n} {p}: {a} {b}");
        }
    }
}
