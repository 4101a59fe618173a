//! Dormand–Prince 5(4) integration of u'' + (N-1)/r u' = -|u|^{p-1}u with dense output.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order minus 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Hairer's dense output coefficients
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type State = [f64; 2];

#[derive(Debug, Clone)]
struct DenseStep {
    r0: f64,
    h: f64,
    rc: [State; 5],
}

impl DenseStep {
    fn eval(&self, r: f64) -> State {
        let t = ((r - self.r0) / self.h).clamp(0.0, 1.0);
        let s = 1.0 - t;
        let mut y = [0.0; 2];
        for (i, yi) in y.iter_mut().enumerate() {
            let rc = |k: usize| self.rc[k][i];
            *yi = rc(0) + t * (rc(1) + s * (rc(2) + t * (rc(3) + s * rc(4))));
        }
        y
    }
}

/// Solution of the radial problem from u(0) = 1 up to (and slightly past) its first zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: usize,
    p: f64,
    r_start: f64,
    steps: Vec<DenseStep>,
    /// First zero of u.
    pub zero: f64,
}

impl Trajectory {
    fn series(&self, r: f64) -> State {
        let nf = self.n as f64;
        let r2 = r * r;
        let u = 1.0 - r2 / (2.0 * nf) + self.p * r2 * r2 / (8.0 * nf * (nf + 2.0));
        let w = -r / nf + self.p * r * r2 / (2.0 * nf * (nf + 2.0));
        [u, w]
    }

    /// (u, u') at radius `r`, for 0 <= r <= zero.
    pub fn eval(&self, r: f64) -> State {
        if r <= self.r_start || self.steps.is_empty() {
            return self.series(r);
        }
        let k = self.steps.partition_point(|s| s.r0 + s.h < r);
        self.steps[k.min(self.steps.len() - 1)].eval(r)
    }

    pub fn steps(&self) -> usize {
        self.steps.len()
    }
}

fn rhs(n: usize, p: f64, r: f64, y: &State) -> State {
    let u = y[0];
    let f = u.abs().powf(p) * u.signum();
    [y[1], -(n as f64 - 1.0) / r * y[1] - f]
}

/// Integrates from u(0) = 1 until u changes sign; locates the zero on the dense output.
pub fn shoot(n: usize, p: f64, rtol: f64, max_steps: usize) -> Result<Trajectory> {
    let atol = rtol;
    let r_start = 1e-3;
    let mut traj = Trajectory { n, p, r_start, steps: Vec::new(), zero: f64::NAN };
    let mut r = r_start;
    let mut y = traj.series(r);
    let mut h = 1e-3;
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(n, p, r, &y);
    let mut rejected_in_row = 0;
    while traj.steps.len() < max_steps {
        if h < 1e-14 * r {
            return Err(Error::StiffnessFailure(format!("step size underflow at r = {r:.6e}")));
        }
        for s in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..2 {
                    yi[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = rhs(n, p, r + C[s] * h, &yi);
        }
        let mut y1 = y;
        for i in 0..2 {
            for (j, kj) in k.iter().enumerate().take(6) {
                y1[i] += h * A[6][j] * kj[i];
            }
        }
        let mut err = 0.0;
        for i in 0..2 {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = atol + rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err > 1.0 {
            rejected_in_row += 1;
            if rejected_in_row > 60 {
                return Err(Error::StiffnessFailure(format!("repeated step rejection at r = {r:.6e}")));
            }
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            continue;
        }
        rejected_in_row = 0;
        let mut rc = [[0.0; 2]; 5];
        for i in 0..2 {
            let dy = y1[i] - y[i];
            let bspl = h * k[0][i] - dy;
            rc[0][i] = y[i];
            rc[1][i] = dy;
            rc[2][i] = bspl;
            rc[3][i] = dy - h * k[6][i] - bspl;
            rc[4][i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
        }
        let step = DenseStep { r0: r, h, rc };
        let crossed = y1[0] <= 0.0;
        traj.steps.push(step);
        if crossed {
            let st = traj.steps.last().unwrap();
            let (mut lo, mut hi) = (st.r0, st.r0 + st.h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if st.eval(mid)[0] > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            traj.zero = 0.5 * (lo + hi);
            return Ok(traj);
        }
        r += h;
        y = y1;
        k[0] = k[6];
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Err(Error::NoZeroFound { steps: traj.steps.len(), r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_case_hits_bessel_zero() {
        // p = 1, N = 2: u = J_0(r), first zero j_{0,1}.
        let t = shoot(2, 1.0, 1e-13, 100_000).unwrap();
        assert!((t.zero - 2.404825557695773).abs() < 1e-10, "{}", t.zero);
        // N = 3: u = sin(r)/r, first zero pi.
        let t = shoot(3, 1.0, 1e-13, 100_000).unwrap();
        assert!((t.zero - std::f64::consts::PI).abs() < 1e-10);
        let [u, w] = t.eval(1.0);
        assert!((u - 1f64.sin()).abs() < 1e-11);
        assert!((w - (1f64.cos() - 1f64.sin())).abs() < 1e-11);
    }

    #[test]
    fn planar_large_exponent_reaches_zero() {
        let t = shoot(2, 39.0, 1e-12, 1_000_000).unwrap();
        assert!(t.zero.is_finite() && t.zero > 1.0);
    }
}
