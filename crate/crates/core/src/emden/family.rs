//! The explicit one-spike family v(x) = w_a(|x|/ε) on the unit ball.

use super::ground::GroundState;
use super::profile::{radial_integral, radial_integral_log};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SpikeFamily {
    pub ground: GroundState,
    pub mu: f64,
    pub eps: f64,
}

impl SpikeFamily {
    pub fn new(ground: GroundState, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::OutOfRange(format!("mu = {mu} must be positive")));
        }
        Ok(SpikeFamily { ground, mu, eps: mu.powf(-0.5) })
    }

    pub fn v(&self, r: f64) -> f64 {
        self.ground.w(r / self.eps)
    }

    fn n(&self) -> usize {
        self.ground.base.n
    }

    /// μ^{N/2} ∫_{B_1} [v - 1]_+^p.
    pub fn scaled_mass(&self) -> f64 {
        let p = self.ground.base.p;
        let rc = (self.ground.ra * self.eps).min(1.0);
        let m = radial_integral(self.n(), 0.0, rc, 40_000, |r| (self.v(r) - 1.0).max(0.0).powf(p));
        self.mu.powf(self.n() as f64 / 2.0) * m
    }

    /// μ^{N/2} ∫_{B_1} v^t.
    pub fn scaled_power_integral(&self, t: f64) -> f64 {
        let rc = (self.ground.ra * self.eps).min(1.0);
        let mut m = radial_integral(self.n(), 0.0, rc, 20_000, |r| self.v(r).powf(t));
        if rc < 1.0 {
            m += radial_integral_log(self.n(), rc, 1.0, 40_000, |r| self.v(r).powf(t));
        }
        self.mu.powf(self.n() as f64 / 2.0) * m
    }

    /// Residual of -Δv - μ[v-1]_+^p at radius r (centered differences).
    pub fn pde_residual(&self, r: f64) -> f64 {
        let d = 1e-4 * self.eps;
        let nf = self.n() as f64;
        let dv = |s: f64| self.ground.dw(s / self.eps) / self.eps;
        let lap = (dv(r + d) - dv(r - d)) / (2.0 * d) + (nf - 1.0) / r * dv(r);
        -lap - self.mu * (self.v(r) - 1.0).max(0.0).powf(self.ground.base.p)
    }
}
