//! Greedy spike extraction, per-spike masses, profile fits, roundness and necks.

use serde::{Deserialize, Serialize};

use super::field::{Field, RescaledField};
use crate::emden::GroundState;
use crate::error::{Error, Result};
use crate::geometry::dist;

#[derive(Debug, Clone, Copy)]
pub struct SpikeOptions {
    /// Detection threshold: v(z) ≥ 1 + sigma_min.
    pub sigma_min: f64,
    /// Window radius R in units of R_0.
    pub r_factor: f64,
    /// Maxima closer than merge_factor·Rε are merged.
    pub merge_factor: f64,
}

impl Default for SpikeOptions {
    fn default() -> Self {
        SpikeOptions { sigma_min: 0.1, r_factor: 4.0, merge_factor: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spike {
    pub z: Vec<f64>,
    pub height: f64,
    /// μ^{N/2}∫_{B_{Rε}(z)}[v-1]_+^p
    pub mass: f64,
    /// sup over |y| ≤ R of |v(z+εy) - w_0(|y|)|
    pub profile_error: f64,
    pub near_boundary: bool,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Roundness {
    /// Inner and outer radii of the plasma component in units of ε.
    pub rho_in: f64,
    pub rho_out: f64,
    pub ratio_in: f64,
    pub ratio_out: f64,
    /// Neck check on 2εR_0 ≤ |x-z| ≤ 2εR; absent for N = 2.
    pub neck_nodes: usize,
    pub neck_violations: usize,
    /// Worst v/(lower bound) and v/(upper bound) over the annulus.
    pub neck_lower_margin: Option<f64>,
    pub neck_upper_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpikeReport {
    pub spikes: Vec<Spike>,
    pub sigma: f64,
    pub quantum: f64,
    pub roundness: Vec<Roundness>,
    pub farfield_error: Option<f64>,
    /// Fitted C_* = R^{N-2} max v off the balls B_{2Rε}(z_i), on the scan lattice.
    pub decay_constant: Option<f64>,
    pub mu: f64,
    pub eps: f64,
    /// Window radius R.
    pub window: f64,
    /// Grid spacing over ε, when v comes from a grid.
    pub interpolation_scale: Option<f64>,
}

impl SpikeReport {
    pub fn count(&self) -> usize {
        self.spikes.iter().map(|s| s.multiplicity).sum()
    }
}

fn unit_directions(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..72)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 72.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let m = 194;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|k| {
            let y = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
            let r = (1.0 - y * y).sqrt();
            let t = golden * k as f64;
            let mut d = vec![r * t.cos(), y, r * t.sin()];
            d.resize(n, 0.0);
            let s = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Compass search for a local maximum of v starting at x.
fn climb(field: &dyn Field, x0: &[f64], step0: f64, tol: f64) -> (Vec<f64>, f64) {
    let n = field.dim();
    let mut x = x0.to_vec();
    let mut best = field.value(&x);
    let mut step = step0;
    while step > tol {
        let mut moved = false;
        for d in 0..n {
            for s in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] += s * step;
                let v = field.value(&y);
                if v > best {
                    best = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, best)
}

/// Distance along the ray z + t·dir at which v first drops to 1, searched up to t_max.
fn exit_radius(field: &dyn Field, z: &[f64], dir: &[f64], dt: f64, t_max: f64) -> f64 {
    let at = |t: f64| -> f64 {
        let x: Vec<f64> = z.iter().zip(dir).map(|(a, b)| a + t * b).collect();
        field.value(&x)
    };
    let mut lo = 0.0;
    let mut hi = dt;
    while at(hi) > 1.0 {
        lo = hi;
        hi += dt;
        if hi >= t_max {
            return t_max;
        }
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Calls f at the points z + h·k (k integer vector) with |h·k| ≤ radius.
fn for_each_local(n: usize, z: &[f64], h: f64, radius: f64, mut f: impl FnMut(&[f64], f64)) {
    let k = (radius / h).ceil() as i64;
    let span = |d: usize| if d < n { k } else { 0 };
    let mut x = vec![0.0; n];
    for c in -span(2)..=span(2) {
        for b in -span(1)..=span(1) {
            for a in -span(0)..=span(0) {
                let off = [a, b, c];
                let mut r2 = 0.0;
                for d in 0..n {
                    let o = h * off[d] as f64;
                    x[d] = z[d] + o;
                    r2 += o * o;
                }
                if r2 <= radius * radius {
                    f(&x, r2.sqrt());
                }
            }
        }
    }
}

/// Component radii of {v > 1} around z, as (min, max) over ray directions.
fn component_radii(field: &dyn Field, z: &[f64], eps: f64, r0: f64, limit: f64) -> (f64, f64) {
    let dt = eps * r0 / 64.0;
    let mut rin = f64::INFINITY;
    let mut rout: f64 = 0.0;
    for dir in unit_directions(field.dim()) {
        let t = exit_radius(field, z, &dir, dt, limit);
        rin = rin.min(t);
        rout = rout.max(t);
    }
    (rin, rout)
}

fn spike_mass(field: &dyn Field, z: &[f64], p: f64, eps: f64, r0: f64, window: f64, mu: f64) -> f64 {
    let n = field.dim();
    let (_, rout) = component_radii(field, z, eps, r0, window * eps);
    let reach = (1.25 * rout).min(window * eps);
    let per = if n == 2 { 96.0 } else { 28.0 };
    let mut h = rout / per;
    if let Some(g) = field.spacing() {
        h = h.min(0.5 * g);
    }
    let mut acc = 0.0;
    for_each_local(n, z, h, reach, |x, _| acc += (field.value(x) - 1.0).max(0.0).powf(p));
    mu.powf(n as f64 / 2.0) * acc * h.powi(n as i32)
}

fn profile_error(field: &dyn Field, z: &[f64], eps: f64, window: f64, ground: &GroundState) -> f64 {
    let n = field.dim();
    let h = window / if n == 2 { 40.0 } else { 16.0 };
    let mut worst: f64 = 0.0;
    for_each_local(n, &vec![0.0; n], h, window, |y, r| {
        let x: Vec<f64> = z.iter().zip(y).map(|(a, b)| a + eps * b).collect();
        if field.boundary_distance(&x) > 0.0 {
            worst = worst.max((field.value(&x) - ground.w(r)).abs());
        }
    });
    worst
}

/// Greedy extraction of spikes from v: highest maxima first, each one
/// excising B_{2Rε} (merge_factor·Rε) around it.
pub fn detect_spikes(rf: &RescaledField, ground: &GroundState, opts: SpikeOptions) -> Result<SpikeReport> {
    if ground.a != 0.0 {
        return Err(Error::OutOfRange("spike profiles are compared with w_0 (a = 0)".into()));
    }
    if !(opts.sigma_min > 0.0) || opts.r_factor < 1.0 {
        return Err(Error::OutOfRange(format!("sigma_min = {} and R/R_0 = {} required positive and >= 1", opts.sigma_min, opts.r_factor)));
    }
    let field = rf.field.as_ref();
    let (eps, r0) = (rf.eps, ground.ra);
    let window = opts.r_factor * r0;
    let lat = field.scan();
    let mut candidates: Vec<(Vec<f64>, f64)> = lat
        .local_maxima()
        .into_iter()
        .map(|i| {
            let x = lat.position(i);
            climb(field, &x[..lat.n], 0.5 * lat.h, 1e-4 * eps * r0)
        })
        .filter(|(_, v)| *v >= 1.0 + opts.sigma_min)
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
    let merge = opts.merge_factor * window * eps;
    let mut spikes: Vec<Spike> = Vec::new();
    for (z, height) in candidates {
        if let Some(s) = spikes.iter_mut().find(|s| dist(&s.z, &z) < merge) {
            if dist(&s.z, &z) > 0.5 * r0 * eps {
                s.multiplicity += 1;
            }
            continue;
        }
        spikes.push(Spike {
            near_boundary: field.boundary_distance(&z) < 10.0 * eps * r0,
            mass: spike_mass(field, &z, rf.p, eps, r0, window, rf.mu),
            profile_error: profile_error(field, &z, eps, window, ground),
            z,
            height,
            multiplicity: 1,
        });
    }
    let sigma = rf.sigma_quadrature().unwrap_or_else(|| spikes.iter().map(|s| s.mass).sum());
    let decay_constant = (!spikes.is_empty()).then(|| {
        let cut = 2.0 * window * eps;
        let off = (0..lat.values.len())
            .filter(|&i| !lat.values[i].is_nan())
            .filter(|&i| {
                let x = lat.position(i);
                spikes.iter().all(|s| dist(&x[..lat.n], &s.z) >= cut)
            })
            .map(|i| lat.values[i])
            .fold(0.0, f64::max);
        window.powf(lat.n as f64 - 2.0) * off
    });
    Ok(SpikeReport {
        quantum: sigma / ground.mpa,
        sigma,
        spikes,
        roundness: Vec::new(),
        farfield_error: None,
        decay_constant,
        mu: rf.mu,
        eps,
        window,
        interpolation_scale: field.spacing().map(|h| h / eps),
    })
}

/// Roundness of each plasma component and the neck bounds
/// (R_0ε/(2|x-z|))^{N-2} ≤ v ≤ (2R_0ε/|x-z|)^{N-2} on 2εR_0 ≤ |x-z| ≤ 2εR.
pub fn roundness_and_neck(rf: &RescaledField, report: &SpikeReport, ground: &GroundState) -> Result<Vec<Roundness>> {
    if report.spikes.is_empty() {
        return Err(Error::EmptyReport);
    }
    let field = rf.field.as_ref();
    let n = field.dim();
    let (eps, r0) = (report.eps, ground.ra);
    let mut out = Vec::new();
    for s in &report.spikes {
        let (rin, rout) = component_radii(field, &s.z, eps, r0, report.window * eps);
        let mut r = Roundness {
            rho_in: rin / eps,
            rho_out: rout / eps,
            ratio_in: rin / (eps * r0),
            ratio_out: rout / (eps * r0),
            neck_nodes: 0,
            neck_violations: 0,
            neck_lower_margin: None,
            neck_upper_margin: None,
        };
        if n >= 3 {
            let k = n as f64 - 2.0;
            let (inner, outer) = (2.0 * eps * r0, 2.0 * eps * report.window);
            let mut h = eps * r0 / 4.0;
            if let Some(g) = field.spacing() {
                h = h.max(g);
            }
            let (mut lo_m, mut hi_m) = (f64::INFINITY, 0.0f64);
            for_each_local(n, &s.z, h, outer, |x, d| {
                if d < inner || field.boundary_distance(x) <= 0.0 {
                    return;
                }
                let v = field.value(x);
                let lower = (eps * r0 / (2.0 * d)).powf(k);
                let upper = (2.0 * eps * r0 / d).powf(k);
                r.neck_nodes += 1;
                if v < lower || v > upper {
                    r.neck_violations += 1;
                }
                lo_m = lo_m.min(v / lower);
                hi_m = hi_m.max(v / upper);
            });
            if r.neck_nodes > 0 {
                r.neck_lower_margin = Some(lo_m);
                r.neck_upper_margin = Some(hi_m);
            }
        }
        out.push(r);
    }
    Ok(out)
}
