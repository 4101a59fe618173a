//! Far-field comparison v ≈ ε^{N-2} Σ M_{p,0} G(x, z_i) and branch-wide quantization tables.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::detect::SpikeReport;
use super::field::RescaledField;
use crate::elliptic::{ball_green, green_function, DomainGrid};
use crate::emden::GroundState;
use crate::error::{Error, Result};
use crate::geometry::{dist, fundamental};
use crate::plasma::Branch;

pub trait GreenProvider {
    fn green(&self, x: &[f64], y: &[f64]) -> f64;
}

/// Fundamental solution of -Δ in R^N.
pub struct FreeSpace {
    pub n: usize,
}

impl GreenProvider for FreeSpace {
    fn green(&self, x: &[f64], y: &[f64]) -> f64 {
        fundamental(self.n, dist(x, y))
    }
}

/// Image-charge Green function of the ball of radius R centered at 0.
pub struct BallGreen {
    pub n: usize,
    pub radius: f64,
}

impl GreenProvider for BallGreen {
    fn green(&self, x: &[f64], y: &[f64]) -> f64 {
        ball_green(self.n, self.radius, x, y)
    }
}

/// Discrete Green functions with sources at the grid nodes nearest the requested points.
pub struct GridGreen {
    domain: Arc<DomainGrid>,
    tables: HashMap<usize, Vec<f64>>,
}

impl GridGreen {
    pub fn new(domain: Arc<DomainGrid>, sources: &[Vec<f64>]) -> Result<Self> {
        let mut tables = HashMap::new();
        for y in sources {
            let node = domain.nearest_node(y).ok_or(Error::TooCloseToBoundary)?;
            if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(node) {
                e.insert(green_function(&domain, node)?.g);
            }
        }
        Ok(GridGreen { domain, tables })
    }
}

impl GreenProvider for GridGreen {
    fn green(&self, x: &[f64], y: &[f64]) -> f64 {
        let node = self.domain.nearest_node(y).expect("source node");
        let g = self.tables.get(&node).expect("Green table built for this source");
        self.domain.interpolate(g, x)
    }
}

/// Max relative deviation of v from ε^{N-2} Σ M_{p,0} G(x, z_i) over scan points
/// outside the balls B_r(z_i), r = 10 R_0 ε capped at half the distance from z_i to ∂Ω.
pub fn farfield_check(rf: &RescaledField, report: &SpikeReport, ground: &GroundState, greens: &dyn GreenProvider) -> Result<f64> {
    let field = rf.field.as_ref();
    let interior: Vec<_> = report.spikes.iter().filter(|s| !s.near_boundary).collect();
    if interior.is_empty() {
        return Err(Error::EmptyReport);
    }
    let n = field.dim();
    let scale = report.eps.powf(n as f64 - 2.0) * ground.mpa;
    let lat = field.scan();
    let radii: Vec<f64> = interior
        .iter()
        .map(|s| (10.0 * ground.ra * report.eps).min(0.5 * field.boundary_distance(&s.z)))
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..lat.values.len() {
        if lat.values[i].is_nan() {
            continue;
        }
        let x = lat.position(i);
        let x = &x[..n];
        if field.boundary_distance(x) < 2.0 * lat.h {
            continue;
        }
        if interior.iter().zip(&radii).any(|(s, r)| dist(x, &s.z) < *r) {
            continue;
        }
        let model: f64 = interior.iter().map(|s| s.multiplicity as f64 * greens.green(x, &s.z)).sum::<f64>() * scale;
        if model > 0.0 {
            worst = worst.max((field.value(x) - model).abs() / model);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationRow {
    pub lambda: f64,
    pub sigma: f64,
    pub quantum: f64,
    pub alpha_over_lambda: f64,
    pub energy: f64,
    pub plasma_grad: f64,
    /// ∫_{Ω+}|∇ψ|² / ((|α|/2λ) M_{p+1,0}/M_{p,0})
    pub gradient_ratio: f64,
    pub mu_minus: Option<f64>,
    pub mu_floor: f64,
    pub entropy_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantizationTable {
    pub rows: Vec<QuantizationRow>,
    pub skipped: Vec<String>,
}

/// 4N²ω_N R_0^{N-2}/(p+1) · M_{p+1,0}/M_{p,0}².
pub fn mu_minus_floor(ground: &GroundState) -> f64 {
    let (n, p) = (ground.base.n, ground.base.p);
    let nf = n as f64;
    4.0 * nf * nf * crate::geometry::omega(n) * ground.ra.powf(nf - 2.0) / (p + 1.0) * ground.mp1a / (ground.mpa * ground.mpa)
}

pub fn quantization_sweep(branch: &Branch, ground: &GroundState) -> QuantizationTable {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let floor = mu_minus_floor(ground);
    for e in &branch.entries {
        let (Some(sigma), Some(plasma_grad)) = (e.sigma.filter(|_| e.alpha < 0.0), e.plasma_grad) else {
            skipped.push(format!("lambda = {}: alpha = {} is not negative", e.lambda, e.alpha));
            continue;
        };
        let t = e.alpha.abs() / e.lambda;
        rows.push(QuantizationRow {
            lambda: e.lambda,
            sigma,
            quantum: sigma / ground.mpa,
            alpha_over_lambda: t,
            energy: e.energy,
            plasma_grad,
            gradient_ratio: plasma_grad / (0.5 * t * ground.mp1a / ground.mpa),
            mu_minus: e.mu_minus,
            mu_floor: floor,
            entropy_ratio: e.entropy_ratio,
        });
    }
    QuantizationTable { rows, skipped }
}
