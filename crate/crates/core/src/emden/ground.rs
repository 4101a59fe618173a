//! Entire radial profiles w_a: a rescaled Lane–Emden core glued to a harmonic tail.

use std::sync::Arc;

use super::profile::{radial_integral, EmdenProfile};
use crate::error::{Error, Result};
use crate::geometry::omega;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub base: Arc<EmdenProfile>,
    pub a: f64,
    pub ra: f64,
    /// ∫[w_a - 1]_+^p by quadrature.
    pub mpa: f64,
    /// ∫[w_a - 1]_+^{p+1} by quadrature.
    pub mp1a: f64,
}

impl GroundState {
    pub fn new(base: Arc<EmdenProfile>, a: f64) -> Result<Self> {
        if base.n < 3 {
            return Err(Error::DimensionUnsupported(base.n));
        }
        if !(0.0..1.0).contains(&a) {
            return Err(Error::OutOfRange(format!("asymptote a = {a} is not in [0, 1)")));
        }
        let ra = matching_radius(&base, a);
        let mut gs = GroundState { base, a, ra, mpa: 0.0, mp1a: 0.0 };
        let p = gs.base.p;
        gs.mpa = gs.core_mass(p);
        gs.mp1a = gs.core_mass(p + 1.0);
        Ok(gs)
    }

    fn core_amplitude(&self) -> f64 {
        self.ra.powf(2.0 / (1.0 - self.base.p))
    }

    fn core_mass(&self, k: f64) -> f64 {
        let c = self.core_amplitude();
        radial_integral(self.base.n, 0.0, self.ra, 40_000, |r| (c * self.base.u(r / self.ra)).powf(k))
    }

    pub fn w(&self, r: f64) -> f64 {
        if r <= self.ra {
            1.0 + self.core_amplitude() * self.base.u(r / self.ra)
        } else {
            self.a + (self.ra / r).powf(self.base.n as f64 - 2.0) * (1.0 - self.a)
        }
    }

    pub fn dw(&self, r: f64) -> f64 {
        let nf = self.base.n as f64;
        if r <= self.ra {
            self.core_amplitude() / self.ra * self.base.du(r / self.ra)
        } else {
            -(nf - 2.0) * (1.0 - self.a) * self.ra.powf(nf - 2.0) * r.powf(1.0 - nf)
        }
    }

    /// Closed form I_p / R_a^{2/(p-1) - N + 2}.
    pub fn mpa_closed(&self) -> f64 {
        let (n, p) = (self.base.n as f64, self.base.p);
        self.base.ip / self.ra.powf(2.0 / (p - 1.0) - n + 2.0)
    }

    /// Closed form I_{p+1} / R_a^{4/(p-1) - N + 2}.
    pub fn mp1a_closed(&self) -> f64 {
        let (n, p) = (self.base.n as f64, self.base.p);
        self.base.ip1 / self.ra.powf(4.0 / (p - 1.0) - n + 2.0)
    }

    /// Jumps of (w, w') across r = R_a.
    pub fn matching_jump(&self) -> (f64, f64) {
        let nf = self.base.n as f64;
        let inner_w = 1.0 + self.core_amplitude() * self.base.u(1.0 - 1e-15);
        let inner_dw = self.core_amplitude() / self.ra * self.base.u1prime;
        let outer_dw = -(nf - 2.0) * (1.0 - self.a) / self.ra;
        ((inner_w - 1.0).abs(), (inner_dw - outer_dw).abs())
    }
}

/// R_a = ((-u'(1)) / ((N-2)(1-a)))^{(p-1)/2}.
pub fn matching_radius(base: &EmdenProfile, a: f64) -> f64 {
    let nf = base.n as f64;
    ((-base.u1prime) / ((nf - 2.0) * (1.0 - a))).powf((base.p - 1.0) / 2.0)
}

/// M_{p,0} written directly in terms of u'(1).
pub fn mp0_closed(base: &EmdenProfile) -> f64 {
    let (n, p) = (base.n as f64, base.p);
    let k = (n / 2.0) * (1.0 - p * (n - 2.0) / n);
    n * omega(base.n) * (n - 2.0).powf(k) * (-base.u1prime).powf(1.0 - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Arc<EmdenProfile> {
        Arc::new(EmdenProfile::shoot(3, 2.0, 1e-10).unwrap())
    }

    #[test]
    fn masses_match_closed_forms() {
        let b = base();
        let g = GroundState::new(b.clone(), 0.0).unwrap();
        assert!((g.ra - 3.23960).abs() < 1e-4);
        assert!((g.mpa - 40.70996).abs() < 1e-3, "{}", g.mpa);
        assert!((g.mpa - g.mpa_closed()).abs() / g.mpa < 1e-8);
        assert!((g.mp1a - g.mp1a_closed()).abs() / g.mp1a < 1e-8);
        assert!((mp0_closed(&b) - g.mpa).abs() / g.mpa < 1e-8);
    }

    #[test]
    fn c1_matching_and_decay() {
        let b = base();
        for a in [0.0, 0.3, 0.9] {
            let g = GroundState::new(b.clone(), a).unwrap();
            let (j0, j1) = g.matching_jump();
            assert!(j0 < 1e-9 && j1 < 1e-9, "{a}: {j0} {j1}");
            assert!((g.w(1e8) - a).abs() < 1e-6);
        }
    }

    #[test]
    fn planar_is_unsupported() {
        let b = Arc::new(EmdenProfile::shoot(2, 2.0, 1e-10).unwrap());
        assert!(matches!(GroundState::new(b, 0.0), Err(Error::DimensionUnsupported(2))));
        assert!(matches!(GroundState::new(base(), 1.0), Err(Error::OutOfRange(_))));
    }
}
