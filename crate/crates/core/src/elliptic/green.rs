//! Dirichlet Green functions, Robin function, harmonic centers and the Kirchhoff–Routh Hamiltonian.

use std::collections::HashMap;

use super::domain::DomainGrid;
use super::poisson::{solve_dirichlet, solve_poisson};
use crate::error::{Error, Result};
use crate::geometry::{dist, fundamental, fundamental_dr, omega};

#[derive(Debug, Clone)]
pub struct GreenTable {
    pub source: usize,
    /// Discrete G(·, y).
    pub g: Vec<f64>,
    /// Φ(· - y); infinite at the source.
    pub phi: Vec<f64>,
    /// H(·, y), from the harmonic boundary-value problem.
    pub regular: Vec<f64>,
}

pub fn green_function(domain: &DomainGrid, y: usize) -> Result<GreenTable> {
    let mut rhs = vec![0.0; domain.len()];
    rhs[y] = 1.0 / domain.cell_volume();
    let g = solve_poisson(domain, &rhs)?;
    let yp = domain.position(y);
    let phi = (0..domain.len()).map(|i| fundamental(domain.n, dist(&domain.position(i), &yp))).collect();
    let regular = regular_part(domain, &yp)?;
    Ok(GreenTable { source: y, g, phi, regular })
}

/// H(·, y): harmonic in Ω with boundary values -Φ(· - y).
pub fn regular_part(domain: &DomainGrid, y: &[f64; 3]) -> Result<Vec<f64>> {
    let n = domain.n;
    let zero = vec![0.0; domain.len()];
    solve_dirichlet(domain, &zero, |x| -fundamental(n, dist(x, y)))
}

/// H(x, x) at an interior node at least 3h from the boundary.
pub fn robin_function(domain: &DomainGrid, x: usize) -> Result<f64> {
    let xp = domain.position(x);
    if domain.boundary_distance(&xp) < 3.0 * domain.h - 1e-12 {
        return Err(Error::TooCloseToBoundary);
    }
    Ok(regular_part(domain, &xp)?[x])
}

/// Image-charge Green function of the ball of radius R centered at 0.
pub fn ball_green(n: usize, radius: f64, x: &[f64], y: &[f64]) -> f64 {
    fundamental(n, dist(x, y)) + ball_regular(n, radius, x, y)
}

/// Regular part H(x, y) for the ball.
pub fn ball_regular(n: usize, radius: f64, x: &[f64], y: &[f64]) -> f64 {
    let ny = crate::geometry::norm(y);
    if ny < 1e-300 {
        return -fundamental(n, radius);
    }
    let ystar: Vec<f64> = y.iter().map(|v| v * radius * radius / (ny * ny)).collect();
    let d = dist(x, &ystar);
    if n == 2 {
        (ny * d / radius).ln() / (2.0 * std::f64::consts::PI)
    } else {
        -(radius / ny).powf(n as f64 - 2.0) * fundamental(n, d)
    }
}

/// Closed-form Robin function of the ball.
pub fn ball_robin(n: usize, radius: f64, x: &[f64]) -> f64 {
    let r2 = x.iter().map(|v| v * v).sum::<f64>();
    if n == 2 {
        ((radius * radius - r2) / radius).ln() / (2.0 * std::f64::consts::PI)
    } else {
        let nf = n as f64;
        -(radius / (radius * radius - r2)).powf(nf - 2.0) / (nf * (nf - 2.0) * omega(n))
    }
}

/// Local maximizers of the Robin function H(x, x) over interior nodes.
pub fn harmonic_centers(domain: &DomainGrid) -> Result<Vec<usize>> {
    let h = domain.h;
    let admissible: Vec<usize> =
        (0..domain.len()).filter(|&i| domain.boundary_distance(&domain.position(i)) >= 3.0 * h - 1e-12).collect();
    if admissible.is_empty() {
        return Err(Error::TooCloseToBoundary);
    }
    let mut cache: HashMap<usize, f64> = HashMap::new();
    let eval = |i: usize, cache: &mut HashMap<usize, f64>| -> Result<f64> {
        if let Some(v) = cache.get(&i) {
            return Ok(*v);
        }
        let v = robin_function(domain, i)?;
        cache.insert(i, v);
        Ok(v)
    };
    // coarse scan on a sub-lattice
    let extent = domain.dims.iter().take(domain.n).cloned().max().unwrap_or(1);
    let stride = (extent / 10).max(1) as u32;
    let coarse: Vec<usize> = admissible
        .iter()
        .cloned()
        .filter(|&i| domain.lattice_coords(i).iter().take(domain.n).all(|c| c % stride == 0))
        .collect();
    let seeds = if coarse.is_empty() { admissible.clone() } else { coarse };
    let mut seed_vals = Vec::new();
    for &i in &seeds {
        seed_vals.push((i, eval(i, &mut cache)?));
    }
    let is_admissible = |i: usize| domain.boundary_distance(&domain.position(i)) >= 3.0 * h - 1e-12;
    let offsets = |n: usize| -> Vec<[i64; 3]> {
        let mut v = Vec::new();
        let r = |d: usize| if d < n { -1..=1 } else { 0..=0 };
        for a in r(0) {
            for b in r(1) {
                for c in r(2) {
                    if (a, b, c) != (0, 0, 0) {
                        v.push([a, b, c]);
                    }
                }
            }
        }
        v
    };
    let offs = offsets(domain.n);
    // coarse local maxima: no sampled point within 1.5 strides is higher
    let radius = 1.5 * stride as f64 * h;
    let mut starts = Vec::new();
    for &(i, v) in &seed_vals {
        let xi = domain.position(i);
        let higher = seed_vals.iter().any(|&(j, w)| j != i && w > v && dist(&xi, &domain.position(j)) <= radius);
        if !higher {
            starts.push(i);
        }
    }
    let mut found: Vec<usize> = Vec::new();
    for s in starts {
        let mut cur = s;
        let mut val = eval(cur, &mut cache)?;
        loop {
            let c = domain.lattice_coords(cur);
            let mut best = (cur, val);
            for o in &offs {
                let q = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
                if let Some(j) = domain.node_at(q) {
                    if is_admissible(j) {
                        let w = eval(j, &mut cache)?;
                        if w > best.1 + 1e-13 * w.abs() {
                            best = (j, w);
                        }
                    }
                }
            }
            if best.0 == cur {
                break;
            }
            cur = best.0;
            val = best.1;
        }
        if !found.contains(&cur) {
            found.push(cur);
        }
    }
    found.sort_unstable();
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct KirchhoffRouth {
    pub value: f64,
    pub gradient: Vec<[f64; 3]>,
}

/// 𝓗 = Σ k_j² H(x_j,x_j) + Σ_{i≠j} k_i k_j G(x_i,x_j) and its gradient.
pub fn kirchhoff_routh(domain: &DomainGrid, points: &[usize], k: &[f64]) -> Result<KirchhoffRouth> {
    let n = domain.n;
    let h = domain.h;
    if points.len() != k.len() || points.is_empty() {
        return Err(Error::OutOfRange("points and weights must be nonempty and of equal length".into()));
    }
    if k.iter().any(|&v| v == 0.0) {
        return Err(Error::OutOfRange("weights must be nonzero".into()));
    }
    let pos: Vec<[f64; 3]> = points.iter().map(|&i| domain.position(i)).collect();
    for a in 0..pos.len() {
        if domain.boundary_distance(&pos[a]) < 3.0 * h - 1e-12 {
            return Err(Error::TooCloseToBoundary);
        }
        for b in 0..a {
            if dist(&pos[a], &pos[b]) < 3.0 * h - 1e-12 {
                return Err(Error::PointsTooClose(format!("points {b} and {a}")));
            }
        }
    }
    let regs: Vec<Vec<f64>> = pos.iter().map(|y| regular_part(domain, y)).collect::<Result<_>>()?;
    let grad_at = |field: &[f64], node: usize| -> [f64; 3] {
        let mut g = [0.0; 3];
        for d in 0..n {
            let fwd = domain.neighbor(node, 2 * d).map(|j| field[j]);
            let bwd = domain.neighbor(node, 2 * d + 1).map(|j| field[j]);
            if let (Some(a), Some(b)) = (fwd, bwd) {
                g[d] = (a - b) / (2.0 * h);
            }
        }
        g
    };
    let m = points.len();
    let mut value = 0.0;
    let mut gradient = vec![[0.0; 3]; m];
    for j in 0..m {
        value += k[j] * k[j] * regs[j][points[j]];
        let gr = grad_at(&regs[j], points[j]);
        for d in 0..n {
            gradient[j][d] += 2.0 * k[j] * k[j] * gr[d];
        }
        for i in 0..m {
            if i == j {
                continue;
            }
            let r = dist(&pos[i], &pos[j]);
            value += k[i] * k[j] * (fundamental(n, r) + regs[j][points[i]]);
            let gi = grad_at(&regs[i], points[j]);
            for d in 0..n {
                let dphi = fundamental_dr(n, r) * (pos[j][d] - pos[i][d]) / r;
                gradient[j][d] += 2.0 * k[i] * k[j] * (dphi + gi[d]);
            }
        }
    }
    Ok(KirchhoffRouth { value, gradient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::domain::Shape;

    #[test]
    fn disk_center_robin() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 64.0).unwrap();
        let c = g.nearest_node(&[0.0, 0.0]).unwrap();
        let r = std::f64::consts::PI.powf(-0.5);
        let exact = r.ln() / (2.0 * std::f64::consts::PI);
        assert!((robin_function(&g, c).unwrap() - exact).abs() < 1e-8);
        assert!((ball_robin(2, r, &[0.0, 0.0]) - exact).abs() < 1e-15);
    }

    #[test]
    fn reciprocity_and_sign() {
        let g = DomainGrid::new(Shape::unit_square(), 1.0 / 32.0).unwrap();
        let a = g.nearest_node(&[0.3, 0.4]).unwrap();
        let b = g.nearest_node(&[0.7, 0.6]).unwrap();
        let ga = green_function(&g, a).unwrap();
        let gb = green_function(&g, b).unwrap();
        assert!((ga.g[b] - gb.g[a]).abs() < 1e-10 * ga.g[b].abs());
        assert!(ga.g.iter().all(|&v| v >= -1e-12));
        assert!(ga.regular.iter().all(|&v| v <= 1e-12));
    }

    #[test]
    fn ball_image_green_vanishes_on_sphere() {
        let y = [0.2, -0.1, 0.3];
        let x = [0.0, 0.6, 0.8];
        assert!(ball_green(3, 1.0, &x, &y).abs() < 1e-14);
        let x2 = [0.6, 0.8];
        assert!(ball_green(2, 1.0, &x2, &[0.3, 0.1]).abs() < 1e-14);
    }
}
