//! Dimensional constants shared by every module.

use std::f64::consts::PI;

/// Volume of the unit ball in R^N.
pub fn omega(n: usize) -> f64 {
    // pi^{N/2} / Gamma(N/2 + 1), using the two-step recursion omega_N = 2 pi/N omega_{N-2}.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * omega(n - 2),
    }
}

/// Critical exponent N/(N-2); infinite in the plane.
pub fn critical_exponent(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        n as f64 / (n as f64 - 2.0)
    }
}

/// Radius of the ball of unit volume.
pub fn unit_volume_radius(n: usize) -> f64 {
    omega(n).powf(-1.0 / n as f64)
}

/// Fundamental solution of -Delta: |x|^{2-N}/(N(N-2)omega_N), or -ln|x|/(2 pi) in the plane.
pub fn fundamental(n: usize, r: f64) -> f64 {
    if n == 2 {
        -r.ln() / (2.0 * PI)
    } else {
        let nf = n as f64;
        r.powf(2.0 - nf) / (nf * (nf - 2.0) * omega(n))
    }
}

/// Radial derivative of [`fundamental`].
pub fn fundamental_dr(n: usize, r: f64) -> f64 {
    if n == 2 {
        -1.0 / (2.0 * PI * r)
    } else {
        let nf = n as f64;
        -r.powf(1.0 - nf) / (nf * omega(n))
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((omega(2) - PI).abs() < 1e-15);
        assert!((omega(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((omega(4) - PI * PI / 2.0).abs() < 1e-14);
        assert!((unit_volume_radius(3) - 0.620350490899400).abs() < 1e-12);
    }

    #[test]
    fn fundamental_derivative_matches() {
        for n in [2, 3, 4] {
            let r = 0.37;
            let d = (fundamental(n, r + 1e-6) - fundamental(n, r - 1e-6)) / 2e-6;
            assert!((d - fundamental_dr(n, r)).abs() < 1e-6 * d.abs());
        }
    }
}
