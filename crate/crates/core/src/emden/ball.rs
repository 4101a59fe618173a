//! Exact solutions on the ball of unit volume, parametrized by the matching radius R_γ.

use std::sync::Arc;

use serde::Serialize;

use super::ground::{matching_radius, GroundState};
use super::profile::{EmdenConstants, EmdenProfile};
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, omega, unit_volume_radius};

/// Thresholds of the unit-volume ball.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallConstants {
    pub n: usize,
    pub p: f64,
    pub rn: f64,
    /// I*(𝔻_N, p)
    pub istar: f64,
    /// λ*(𝔻_N, p)
    pub lambdastar: f64,
    /// c_N; only meaningful for N >= 3.
    pub cn: f64,
}

impl BallConstants {
    pub fn new(profile: &EmdenProfile) -> Self {
        let (n, p) = (profile.n, profile.p);
        let nf = n as f64;
        let rn = unit_volume_radius(n);
        let istar = profile.ip / rn.powf(2.0 * p / (p - 1.0) - nf);
        let lambdastar = istar.powf((p - 1.0) / p);
        let cn = if n >= 3 { 1.0 / (nf * (nf - 2.0) * omega(n) * rn.powf(nf - 2.0)) } else { f64::NAN };
        BallConstants { n, p, rn, istar, lambdastar, cn }
    }

    /// α(λ) = c_N λ (1 - (λ/λ*)^{p/(p_N - p)}) for λ > λ*, N >= 3.
    pub fn alpha_closed(&self, lambda: f64) -> Option<f64> {
        if self.n < 3 || lambda <= self.lambdastar {
            return None;
        }
        let pn = critical_exponent(self.n);
        Some(self.cn * lambda * (1.0 - (lambda / self.lambdastar).powf(self.p / (pn - self.p))))
    }
}

/// The map 𝓘(R): total current carried by the solution whose plasma ball has radius R.
pub fn ball_mass_map(profile: &EmdenProfile, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::OutOfRange(format!("R = {r} must be positive")));
    }
    let (n, p) = (profile.n as f64, profile.p);
    let rn = unit_volume_radius(profile.n);
    let e = 2.0 * p / (p - 1.0) - n;
    let val = if r <= rn { profile.ip / r.powf(e) } else { r.powf(-e) * profile.mass(p, rn / r) };
    if !val.is_finite() {
        return Err(Error::RangeOverflow(format!("𝓘({r:e}) overflows")));
    }
    Ok(val)
}

#[derive(Debug, Clone, Copy)]
pub enum Drive {
    Current(f64),
    Lambda(f64),
}

#[derive(Debug, Clone)]
pub struct BallSolution {
    pub n: usize,
    pub p: f64,
    pub lambda: f64,
    pub current: f64,
    pub r_gamma: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub rn: f64,
    tail: (f64, f64),
    profile: Arc<EmdenProfile>,
}

pub fn solve_ball(profile: Arc<EmdenProfile>, drive: Drive) -> Result<BallSolution> {
    let p = profile.p;
    let (lambda, current) = match drive {
        Drive::Current(i) => (i.powf((p - 1.0) / p), i),
        Drive::Lambda(l) => (l, l.powf(p / (p - 1.0))),
    };
    if !(current > 0.0) || !current.is_finite() {
        return Err(Error::OutOfRange(format!("drive must be positive and finite (I = {current})")));
    }
    let rn = unit_volume_radius(profile.n);
    // Bracket in ln R around R_N, then bisect; 𝓘 is strictly decreasing.
    let f = |lr: f64| ball_mass_map(&profile, lr.exp()).map(|v| v - current);
    let (mut lo, mut hi) = (rn.ln(), rn.ln());
    let mut k = 0;
    while f(lo)? < 0.0 {
        lo -= 1.0;
        k += 1;
        if k > 2000 {
            return Err(Error::BisectionFailure("no lower bracket for R".into()));
        }
    }
    while f(hi)? > 0.0 {
        hi += 1.0;
        k += 1;
        if k > 2000 {
            return Err(Error::BisectionFailure("no upper bracket for R".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_gamma = (0.5 * (lo + hi)).exp();
    let nf = profile.n as f64;
    let amp = r_gamma.powf(-2.0 / (p - 1.0));
    let tail = if profile.n == 2 {
        let a = amp * profile.u1prime;
        (a, -a * r_gamma.ln())
    } else {
        let a = -profile.u1prime / (nf - 2.0) * r_gamma.powf(nf - 2.0) * amp;
        (a, profile.u1prime / (nf - 2.0) * amp)
    };
    let mut sol = BallSolution { n: profile.n, p, lambda, current, r_gamma, gamma: 0.0, alpha: 0.0, rn, tail, profile };
    sol.gamma = sol.v(rn);
    sol.alpha = sol.gamma / lambda.powf(1.0 / (p - 1.0));
    Ok(sol)
}

impl BallSolution {
    pub fn profile(&self) -> &Arc<EmdenProfile> {
        &self.profile
    }

    /// v(r) = λ^{1/(p-1)}(α + λψ).
    pub fn v(&self, r: f64) -> f64 {
        let amp = self.r_gamma.powf(-2.0 / (self.p - 1.0));
        if r <= self.r_gamma {
            amp * self.profile.u(r / self.r_gamma)
        } else if self.n == 2 {
            self.tail.0 * r.ln() + self.tail.1
        } else {
            self.tail.0 * r.powf(2.0 - self.n as f64) + self.tail.1
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.lambda.powf(-self.p / (self.p - 1.0)) * (self.v(r) - self.gamma)
    }

    pub fn psi_max(&self) -> f64 {
        self.psi(0.0)
    }

    /// α + λψ at radius r.
    pub fn u(&self, r: f64) -> f64 {
        self.alpha + self.lambda * self.psi(r)
    }

    /// Rescaled field v = λψ/|α| used near the singular limit.
    pub fn rescaled(&self, r: f64) -> f64 {
        self.lambda * self.psi(r) / self.alpha.abs()
    }

    fn plasma_radius(&self) -> f64 {
        self.r_gamma.min(self.rn)
    }

    /// ∫[α+λψ]_+^k over the ball.
    pub fn positive_power_integral(&self, k: f64) -> f64 {
        let (nf, p) = (self.n as f64, self.p);
        let rho = self.plasma_radius() / self.r_gamma;
        let vk = self.r_gamma.powf(nf - 2.0 * k / (p - 1.0)) * self.profile.mass(k, rho);
        self.lambda.powf(-k / (p - 1.0)) * vk
    }

    /// ∫[α+λψ]_+^{p+1}.
    pub fn entropy_integral(&self) -> f64 {
        self.positive_power_integral(self.p + 1.0)
    }

    /// E = ½∫|∇ψ|² through λ∫|∇ψ|² = ∫[α+λψ]_+^{p+1} - α.
    pub fn energy(&self) -> f64 {
        0.5 * (self.entropy_integral() - self.alpha) / self.lambda
    }

    pub fn plasma_grad(&self) -> f64 {
        if self.alpha < 0.0 {
            self.entropy_integral() / self.lambda
        } else {
            2.0 * self.energy()
        }
    }

    pub fn vacuum_grad(&self) -> f64 {
        2.0 * self.energy() - self.plasma_grad()
    }

    pub fn plasma_volume(&self) -> f64 {
        omega(self.n) * self.plasma_radius().powi(self.n as i32)
    }

    /// σ = (λ / |α|^{1-p/p_N})^{N/2}.
    pub fn sigma(&self) -> f64 {
        let pn = critical_exponent(self.n);
        (self.lambda / self.alpha.abs().powf(1.0 - self.p / pn)).powf(self.n as f64 / 2.0)
    }

    /// μ = λ|α|^{p-1}.
    pub fn mu(&self) -> f64 {
        self.lambda * self.alpha.abs().powf(self.p - 1.0)
    }

    pub fn eps(&self) -> f64 {
        self.mu().powf(-0.5)
    }

    /// Spike radius in units of R_0 ε.
    pub fn spike_radius_ratio(&self) -> Option<f64> {
        if self.n < 3 {
            return None;
        }
        Some(self.r_gamma / (matching_radius(&self.profile, 0.0) * self.eps()))
    }

    /// Radial (r, v, ψ) samples on [0, R_N].
    pub fn samples(&self, count: usize) -> Vec<(f64, f64, f64)> {
        (0..=count)
            .map(|i| {
                let r = self.rn * i as f64 / count as f64;
                (r, self.v(r), self.psi(r))
            })
            .collect()
    }

    /// Ground state with a = 0 for the same (N, p).
    pub fn ground_state(&self) -> Result<GroundState> {
        GroundState::new(self.profile.clone(), 0.0)
    }
}

impl EmdenConstants {
    /// All exported constants of a profile; ground-state entries need N >= 3.
    pub fn from_profile(profile: Arc<EmdenProfile>) -> Result<Self> {
        let ball = BallConstants::new(&profile);
        let ground = if profile.n >= 3 { Some(GroundState::new(profile.clone(), 0.0)?) } else { None };
        Ok(EmdenConstants {
            N: profile.n,
            p: profile.p,
            u0: profile.u0,
            u1prime: profile.u1prime,
            Ip: profile.ip,
            Ip1: profile.ip1,
            R0: ground.as_ref().map(|g| g.ra),
            Mp0: ground.as_ref().map(|g| g.mpa),
            Mp10: ground.as_ref().map(|g| g.mp1a),
            Istar: ball.istar,
            lambdastar: ball.lambdastar,
            cN: (profile.n >= 3).then_some(ball.cn),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n: usize, p: f64) -> Arc<EmdenProfile> {
        Arc::new(EmdenProfile::shoot(n, p, 1e-10).unwrap())
    }

    #[test]
    fn thresholds_three_two() {
        let c = BallConstants::new(&base(3, 2.0));
        assert!((c.istar - 212.596).abs() < 1e-2, "{}", c.istar);
        assert!((c.lambdastar - 14.58066).abs() < 1e-4);
        assert!((c.cn - 0.128278).abs() < 1e-5);
    }

    #[test]
    fn closed_form_alpha() {
        let b = base(3, 2.0);
        let c = BallConstants::new(&b);
        for k in [2.0, 10.0, 100.0] {
            let s = solve_ball(b.clone(), Drive::Lambda(k * c.lambdastar)).unwrap();
            let a = c.alpha_closed(s.lambda).unwrap();
            assert!(s.alpha < 0.0);
            assert!((s.alpha - a).abs() / a.abs() < 1e-6, "{k}: {} vs {a}", s.alpha);
            // The drive is reproduced and the constraint holds.
            assert!((ball_mass_map(&b, s.r_gamma).unwrap() - s.current).abs() / s.current < 1e-12);
            assert!((s.positive_power_integral(2.0) - 1.0).abs() < 1e-8);
        }
        let s = solve_ball(b.clone(), Drive::Lambda(c.lambdastar)).unwrap();
        assert!(s.gamma.abs() < 1e-9 && s.alpha.abs() < 1e-9);
    }

    #[test]
    fn positive_regime() {
        let b = base(3, 2.0);
        let c = BallConstants::new(&b);
        let s = solve_ball(b.clone(), Drive::Lambda(0.5 * c.lambdastar)).unwrap();
        assert!(s.alpha > 0.0 && s.gamma > 0.0 && s.r_gamma > s.rn);
        assert!((s.positive_power_integral(2.0) - 1.0).abs() < 1e-8);
        let tiny = solve_ball(b, Drive::Current(1e-8)).unwrap();
        assert!(tiny.gamma > 0.0 && tiny.gamma < 1e-3 && tiny.r_gamma > 1e2);
    }

    #[test]
    fn planar_tail_is_c1() {
        let b = base(2, 2.0);
        let c = BallConstants::new(&b);
        let s = solve_ball(b, Drive::Lambda(3.0 * c.lambdastar)).unwrap();
        let r = s.r_gamma;
        let d = 1e-7;
        let left = (s.v(r) - s.v(r - d)) / d;
        let right = (s.v(r + d) - s.v(r)) / d;
        assert!(s.v(r).abs() < 1e-9);
        assert!((left - right).abs() < 1e-4 * left.abs());
        assert!(s.alpha < 0.0);
    }
}
