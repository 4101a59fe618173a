//! Reference values computed independently of the library: a fixed-step RK4
//! Lane–Emden integrator, Bessel J0 by its power series, and a few closed forms.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Volume of the unit ball in R^N.
pub fn omega(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        _ => panic!("no table entry for N = {n}"),
    }
}

pub fn unit_radius(n: usize) -> f64 {
    (1.0 / omega(n)).powf(1.0 / n as f64)
}

/// p_N = N/(N-2).
pub fn critical(n: usize) -> f64 {
    n as f64 / (n as f64 - 2.0)
}

/// θ'' + (N-1)/ξ θ' + θ^p = 0, θ(0) = 1, θ'(0) = 0 up to the first zero ξ_1.
/// Returns (ξ_1, θ'(ξ_1)).
pub fn emden_zero(n: usize, p: f64) -> (f64, f64) {
    let nf = n as f64;
    let f = |x: f64, y: [f64; 2]| -> [f64; 2] {
        let t = y[0].max(0.0);
        [y[1], -t.powf(p) - (nf - 1.0) / x * y[1]]
    };
    // series start away from the singular point
    let x0 = 1e-4;
    let mut x = x0;
    let mut y = [1.0 - x0 * x0 / (2.0 * nf), -x0 / nf];
    let dx = 1e-4;
    loop {
        let k1 = f(x, y);
        let k2 = f(x + dx / 2.0, [y[0] + dx / 2.0 * k1[0], y[1] + dx / 2.0 * k1[1]]);
        let k3 = f(x + dx / 2.0, [y[0] + dx / 2.0 * k2[0], y[1] + dx / 2.0 * k2[1]]);
        let k4 = f(x + dx, [y[0] + dx * k3[0], y[1] + dx * k3[1]]);
        let next = [
            y[0] + dx / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + dx / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if next[0] <= 0.0 {
            // Newton on the cubic Hermite interpolant between x and x + dx
            let (y0, d0, y1, d1) = (y[0], y[1], next[0], next[1]);
            let mut t = y0 / (y0 - y1);
            for _ in 0..50 {
                let (h00, h10, h01, h11) = hermite(t);
                let (g00, g10, g01, g11) = hermite_dt(t);
                let v = h00 * y0 + h10 * dx * d0 + h01 * y1 + h11 * dx * d1;
                let dv = g00 * y0 + g10 * dx * d0 + g01 * y1 + g11 * dx * d1;
                t -= v / dv;
            }
            let (g00, g10, g01, g11) = hermite_dt(t);
            let slope = (g00 * y0 + g10 * dx * d0 + g01 * y1 + g11 * dx * d1) / dx;
            return (x + t * dx, slope);
        }
        y = next;
        x += dx;
    }
}

fn hermite(t: f64) -> (f64, f64, f64, f64) {
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2)
}

fn hermite_dt(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t, 3.0 * t2 - 4.0 * t + 1.0, -6.0 * t2 + 6.0 * t, 3.0 * t2 - 2.0 * t)
}

/// u'(1) for the profile rescaled to vanish at r = 1: u(r) = ξ_1^{2/(p-1)} θ(ξ_1 r).
pub fn u1prime(n: usize, p: f64) -> f64 {
    let (xi, dtheta) = emden_zero(n, p);
    xi.powf(2.0 / (p - 1.0) + 1.0) * dtheta
}

/// I_p = Nω_N(-u'(1)).
pub fn ip(n: usize, p: f64) -> f64 {
    n as f64 * omega(n) * -u1prime(n, p)
}

/// Ground-state radius and mass from matching w_0 = (R_0/r)^{N-2} outside B_{R_0}.
pub fn ground(n: usize, p: f64) -> (f64, f64) {
    let nf = n as f64;
    let amp = (nf - 2.0) / -u1prime(n, p);
    let r0 = amp.powf(-(p - 1.0) / 2.0);
    (r0, nf * (nf - 2.0) * omega(n) * r0.powf(nf - 2.0))
}

/// (λ*, c_N) for the unit-volume ball.
pub fn ball_threshold(n: usize, p: f64) -> (f64, f64) {
    let nf = n as f64;
    let rn = unit_radius(n);
    let istar = ip(n, p) / rn.powf(2.0 * p / (p - 1.0) - nf);
    (istar.powf((p - 1.0) / p), 1.0 / (nf * (nf - 2.0) * omega(n) * rn.powf(nf - 2.0)))
}

/// J_0 by its power series.
pub fn bessel_j0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= -(x * x / 4.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

/// First positive zero of J_0 by bisection.
pub fn j01() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
