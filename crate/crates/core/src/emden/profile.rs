//! The positive radial Dirichlet solution of -Δu = u^p on the unit ball.

use std::sync::Arc;

use serde::Serialize;

use super::ode::{shoot, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, omega};

/// Exponents closer than this fraction of p_N are refused.
pub const NEAR_CRITICAL: f64 = 0.97;

const MAX_STEPS: usize = 2_000_000;
const SIMPSON_INTERVALS: usize = 40_000;

#[derive(Debug, Clone)]
pub struct EmdenProfile {
    pub n: usize,
    pub p: f64,
    pub u0: f64,
    pub u1prime: f64,
    pub ip: f64,
    pub ip1: f64,
    pub shoot_tolerance: f64,
    traj: Arc<Trajectory>,
    tau: f64,
    scale: f64,
}

/// Composite Simpson for ∫_a^b f(r) Nω_N r^{N-1} dr.
pub fn radial_integral(n: usize, a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let g = |r: f64| f(r) * r.powi(n as i32 - 1);
    let mut s = g(a) + g(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + i as f64 * h);
    }
    s * h / 3.0 * n as f64 * omega(n)
}

/// Same measure as [`radial_integral`], Simpson in ln r; for integrands spread over many decades.
pub fn radial_integral_log(n: usize, a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = intervals + intervals % 2;
    let (la, lb) = (a.ln(), b.ln());
    let h = (lb - la) / m as f64;
    let g = |s: f64| {
        let r = s.exp();
        f(r) * r.powi(n as i32)
    };
    let mut acc = g(la) + g(lb);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(la + i as f64 * h);
    }
    acc * h / 3.0 * n as f64 * omega(n)
}

/// Radius of the first zero of the solution of u'' + (N-1)/r u' = -|u|^{p-1}u, u(0) = 1.
///
/// Also valid for p = 1, where the zero is sqrt of the first Dirichlet eigenvalue of B_1.
pub fn first_zero(n: usize, p: f64, tol: f64) -> Result<f64> {
    Ok(shoot(n, p, (tol * 1e-2).max(1e-14), MAX_STEPS)?.zero)
}

impl EmdenProfile {
    pub fn shoot(n: usize, p: f64, tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionUnsupported(n));
        }
        if !(p > 1.0) || !(tol > 0.0) {
            return Err(Error::OutOfRange(format!("need p > 1 and tol > 0, got p = {p}, tol = {tol}")));
        }
        let pn = critical_exponent(n);
        if p >= pn {
            return Err(Error::OutOfRange(format!("p = {p} is not subcritical (p_N = {pn})")));
        }
        if p > NEAR_CRITICAL * pn {
            return Err(Error::StiffnessFailure(format!(
                "p = {p} is within 3% of the critical exponent {pn}; constants would be inaccurate"
            )));
        }
        Self::build(n, p, tol)
    }

    /// Profile for any p below the Sobolev exponent (N+2)/(N-2), as needed by
    /// radial Sobolev constants; the positive-solution theory does not extend this far.
    pub fn shoot_sobolev(n: usize, p: f64, tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionUnsupported(n));
        }
        let limit = if n == 2 { f64::INFINITY } else { (n as f64 + 2.0) / (n as f64 - 2.0) };
        if !(p > 1.0 && p < NEAR_CRITICAL * limit) || !(tol > 0.0) {
            return Err(Error::OutOfRange(format!("p = {p} outside (1, {}) for the radial Sobolev profile", NEAR_CRITICAL * limit)));
        }
        Self::build(n, p, tol)
    }

    fn build(n: usize, p: f64, tol: f64) -> Result<Self> {
        let traj = shoot(n, p, (tol * 1e-2).max(1e-14), MAX_STEPS)?;
        let tau = traj.zero;
        let scale = tau.powf(2.0 / (p - 1.0));
        let u1prime = scale * tau * traj.eval(tau)[1];
        let mut prof = EmdenProfile {
            n,
            p,
            u0: scale,
            u1prime,
            ip: 0.0,
            ip1: 0.0,
            shoot_tolerance: tol,
            traj: Arc::new(traj),
            tau,
            scale,
        };
        prof.ip = prof.mass(p, 1.0);
        prof.ip1 = prof.mass(p + 1.0, 1.0);
        Ok(prof)
    }

    /// u(r) on [0, 1]; zero beyond.
    pub fn u(&self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        (self.scale * self.traj.eval(self.tau * r)[0]).max(0.0)
    }

    /// u'(r) on [0, 1].
    pub fn du(&self, r: f64) -> f64 {
        let r = r.min(1.0);
        self.scale * self.tau * self.traj.eval(self.tau * r)[1]
    }

    /// ∫_{B_rho} u^k.
    pub fn mass(&self, k: f64, rho: f64) -> f64 {
        let rho = rho.min(1.0);
        if rho <= 0.0 {
            return 0.0;
        }
        let m = ((SIMPSON_INTERVALS as f64 * rho).ceil() as usize).max(2000);
        radial_integral(self.n, 0.0, rho, m, |r| self.u(r).powf(k))
    }

    /// Residual of u'' + (N-1)/r u' + u^p at r, with u'' from centered differences of u'.
    pub fn ode_residual(&self, r: f64) -> f64 {
        let d = 1e-5;
        let upp = (self.du(r + d) - self.du(r - d)) / (2.0 * d);
        upp + (self.n as f64 - 1.0) / r * self.du(r) + self.u(r).powf(self.p)
    }

    /// Relative mismatch of I_p against Nω_N(-u'(1)).
    pub fn ip_identity_error(&self) -> f64 {
        let closed = self.n as f64 * omega(self.n) * (-self.u1prime);
        (self.ip - closed).abs() / self.ip
    }

    /// Pohozaev closed form for I_{p+1}.
    pub fn pohozaev_ip1(&self) -> f64 {
        let nf = self.n as f64;
        (self.p + 1.0) / ((nf + 2.0) - self.p * (nf - 2.0)) * nf * omega(self.n) * self.u1prime.powi(2)
    }

    pub fn pohozaev_error(&self) -> f64 {
        (self.ip1 - self.pohozaev_ip1()).abs() / self.ip1
    }

    /// Uniform samples (r_i, u(r_i)), i = 0..=count.
    pub fn samples(&self, count: usize) -> Vec<(f64, f64)> {
        (0..=count)
            .map(|i| {
                let r = i as f64 / count as f64;
                (r, self.u(r))
            })
            .collect()
    }

    /// Number of accepted integrator steps.
    pub fn integrator_steps(&self) -> usize {
        self.traj.steps()
    }
}

/// Serializable constant set.
#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct EmdenConstants {
    pub N: usize,
    pub p: f64,
    pub u0: f64,
    pub u1prime: f64,
    pub Ip: f64,
    pub Ip1: f64,
    pub R0: Option<f64>,
    pub Mp0: Option<f64>,
    pub Mp10: Option<f64>,
    pub Istar: f64,
    pub lambdastar: f64,
    pub cN: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_three_two() {
        let prof = EmdenProfile::shoot(3, 2.0, 1e-10).unwrap();
        assert!((prof.u0 - 18.9475).abs() < 1e-3, "{}", prof.u0);
        assert!((prof.u1prime + 10.49498).abs() < 1e-4, "{}", prof.u1prime);
        assert!(prof.ip_identity_error() < 1e-8);
        assert!(prof.pohozaev_error() < 1e-6);
        assert!(prof.u(1.0).abs() < 1e-12);
    }

    #[test]
    fn rescaled_profile_solves_ode() {
        let prof = EmdenProfile::shoot(3, 1.5, 1e-10).unwrap();
        for i in 1..=100 {
            let r = 0.01 + 0.97 * i as f64 / 100.0;
            assert!(prof.ode_residual(r).abs() / prof.u0 < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn planar_profile() {
        let prof = EmdenProfile::shoot(2, 2.0, 1e-10).unwrap();
        assert!((prof.u0 - 8.5341).abs() < 1e-3);
        assert!(prof.ip_identity_error() < 1e-8);
        // Pohozaev also holds in the plane.
        assert!(prof.pohozaev_error() < 1e-6);
    }

    #[test]
    fn near_critical_is_refused() {
        assert!(matches!(EmdenProfile::shoot(3, 2.999, 1e-10), Err(Error::StiffnessFailure(_))));
        assert!(matches!(EmdenProfile::shoot(3, 3.0, 1e-10), Err(Error::OutOfRange(_))));
    }
}
