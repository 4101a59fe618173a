//! Preconditioned conjugate gradients and MINRES on plain vectors.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves A x = b for SPD A; `x` holds the initial guess.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats::default());
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    for it in 0..max_iter {
        if res <= tol {
            return Ok(KrylovStats { iterations: it, relative_residual: res });
        }
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::SolverDivergence { iterations: it, residual: res });
        }
        let a = rz / pq;
        for i in 0..n {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        res = norm2(&r) / bnorm;
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= tol {
        return Ok(KrylovStats { iterations: max_iter, relative_residual: res });
    }
    Err(Error::SolverDivergence { iterations: max_iter, residual: res })
}

/// Preconditioned MINRES for symmetric (possibly indefinite) A with SPD preconditioner.
///
/// Stops when the preconditioned residual norm drops by `tol`; returns the
/// true relative residual.
pub fn minres(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<KrylovStats> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(KrylovStats::default());
    }
    let mut r1 = vec![0.0; n];
    apply(x, &mut r1);
    for i in 0..n {
        r1[i] = b[i] - r1[i];
    }
    let mut y = vec![0.0; n];
    precond(&r1, &mut y);
    let beta1 = dot(&r1, &y);
    if beta1 < 0.0 {
        return Err(Error::NonConvergence("MINRES preconditioner is not positive definite".into()));
    }
    let beta1 = beta1.sqrt();
    if beta1 == 0.0 {
        return Ok(KrylovStats::default());
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut iters = 0;
    for itn in 1..=max_iter {
        iters = itn;
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        apply(&v, &mut y);
        if itn >= 2 {
            let c = beta / oldb;
            for i in 0..n {
                y[i] -= c * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let c = alfa / beta;
        for i in 0..n {
            y[i] -= c * r2[i];
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond(&r2, &mut y);
        oldb = beta;
        let bb = dot(&r2, &y);
        if bb < 0.0 {
            return Err(Error::NonConvergence("MINRES preconditioner is not positive definite".into()));
        }
        beta = bb.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        for i in 0..n {
            let w1 = w2[i];
            w2[i] = w[i];
            w[i] = (v[i] - oldeps * w1 - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        if phibar / beta1 <= tol || beta == 0.0 {
            break;
        }
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    let res = r.iter().zip(b).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / bnorm;
    Ok(KrylovStats { iterations: iters, relative_residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(shift: f64) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            let n = x.len();
            for i in 0..n {
                let mut s = (2.0 - shift) * x[i];
                if i > 0 {
                    s -= x[i - 1];
                }
                if i + 1 < n {
                    s -= x[i + 1];
                }
                y[i] = s;
            }
        }
    }

    #[test]
    fn cg_and_minres_agree() {
        let n = 50;
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let id = |r: &[f64], z: &mut [f64]| z.copy_from_slice(r);
        let mut x1 = vec![0.0; n];
        pcg(tridiag(0.0), id, &b, &mut x1, 1e-12, 500).unwrap();
        let mut x2 = vec![0.0; n];
        let st = minres(tridiag(0.0), id, &b, &mut x2, 1e-12, 500).unwrap();
        assert!(st.relative_residual < 1e-10);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-8);
        }
        // indefinite: shift past the lowest eigenvalues
        let mut x3 = vec![0.0; n];
        let st = minres(tridiag(0.5), id, &b, &mut x3, 1e-12, 2000).unwrap();
        assert!(st.relative_residual < 1e-9, "{}", st.relative_residual);
    }
}
