//! Uniform-lattice discretizations of bounded domains.
//!
//! Interior nodes carry unknowns. A link from an interior node to a lattice
//! neighbour outside the domain is a *boundary link*; its length fraction θ
//! (distance to the boundary crossing over h) enters the diagonal as
//! 1/(θh²), which keeps the operator symmetric and the solution second-order
//! accurate on curved boundaries.

use std::collections::VecDeque;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use super::multigrid::Multigrid;
use crate::error::{Error, Result};
use crate::geometry::{omega, unit_volume_radius};

pub const NONE: u32 = u32::MAX;
const MIN_THETA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Rectangle { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, semi: Vec<f64> },
    /// 0/1 raster; node (i,j,k) sits at h·(i,j,k).
    Mask { dims: Vec<usize>, h: f64, cells: Vec<bool> },
}

impl Shape {
    /// Disk (N = 2) or ball (N >= 3) of unit volume centered at the origin.
    pub fn unit_ball(n: usize) -> Shape {
        Shape::Ball { center: vec![0.0; n], radius: unit_volume_radius(n) }
    }

    pub fn unit_square() -> Shape {
        Shape::Rectangle { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Rectangle { lo, .. } => lo.len(),
            Shape::Ball { center, .. } | Shape::Ellipsoid { center, .. } => center.len(),
            Shape::Mask { dims, .. } => dims.len(),
        }
    }

    /// Reads a mask raster: header `N h nx ny [nz]`, then 0/1 values with x fastest.
    pub fn read_mask(path: &Path) -> Result<Shape> {
        let text = std::fs::read_to_string(path)?;
        Shape::parse_mask(&text)
    }

    pub fn parse_mask(text: &str) -> Result<Shape> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Domain("empty mask file".into()))?.split_whitespace().collect();
        let bad = |m: &str| Error::Domain(format!("mask header: {m}"));
        let n: usize = header.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("N"))?;
        if !(2..=3).contains(&n) || header.len() != 2 + n {
            return Err(bad("expected `N h nx ny [nz]` with N in {2,3}"));
        }
        let h: f64 = header[1].parse().map_err(|_| bad("h"))?;
        let dims: Vec<usize> = header[2..].iter().map(|s| s.parse().map_err(|_| bad("size"))).collect::<Result<_>>()?;
        let mut cells = Vec::with_capacity(dims.iter().product());
        for l in lines {
            for tok in l.split_whitespace() {
                for ch in tok.chars() {
                    match ch {
                        '0' => cells.push(false),
                        '1' => cells.push(true),
                        _ => return Err(Error::Domain(format!("mask value `{ch}` is not 0/1"))),
                    }
                }
            }
        }
        if cells.len() != dims.iter().product::<usize>() {
            return Err(Error::Domain(format!("mask has {} values, header says {}", cells.len(), dims.iter().product::<usize>())));
        }
        Ok(Shape::Mask { dims, h, cells })
    }

    /// Signed level: negative inside. Masks have no level function.
    fn level(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Rectangle { lo, hi } => {
                (0..lo.len()).map(|d| (lo[d] - x[d]).max(x[d] - hi[d])).fold(f64::NEG_INFINITY, f64::max)
            }
            Shape::Ball { center, radius } => crate::geometry::dist(x, center) - radius,
            Shape::Ellipsoid { center, semi } => {
                let s: f64 = (0..center.len()).map(|d| ((x[d] - center[d]) / semi[d]).powi(2)).sum();
                // scaled so the level behaves like a distance near the boundary
                (s.sqrt() - 1.0) * semi.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            Shape::Mask { .. } => unreachable!("masks are evaluated on the raster"),
        }
    }

    /// Analytic volume where available.
    pub fn volume(&self) -> Option<f64> {
        match self {
            Shape::Rectangle { lo, hi } => Some(lo.iter().zip(hi).map(|(a, b)| b - a).product()),
            Shape::Ball { radius, center } => Some(omega(center.len()) * radius.powi(center.len() as i32)),
            Shape::Ellipsoid { semi, .. } => Some(omega(semi.len()) * semi.iter().product::<f64>()),
            Shape::Mask { .. } => None,
        }
    }

    /// Analytic inradius where available.
    pub fn inradius(&self) -> Option<f64> {
        match self {
            Shape::Rectangle { lo, hi } => Some(lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min)),
            Shape::Ball { radius, .. } => Some(*radius),
            Shape::Ellipsoid { semi, .. } => Some(semi.iter().cloned().fold(f64::INFINITY, f64::min)),
            Shape::Mask { .. } => None,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Shape::Mask { .. })
    }
}

#[derive(Debug)]
pub struct DomainGrid {
    pub n: usize,
    pub h: f64,
    pub shape: Shape,
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    lattice: Vec<u32>,
    nodes: Vec<[u32; 3]>,
    nbr: Vec<[u32; 6]>,
    theta: Vec<[f64; 6]>,
    diag: Vec<f64>,
    pub measure: f64,
    pub inradius: f64,
    mg: OnceLock<Arc<Multigrid>>,
}

impl DomainGrid {
    pub fn new(shape: Shape, h: f64) -> Result<Self> {
        let g = Self::build(shape, h)?;
        if g.nodes.is_empty() {
            return Err(Error::Domain("no interior nodes at this spacing".into()));
        }
        if !g.is_connected() {
            return Err(Error::Domain("interior is not connected".into()));
        }
        Ok(g)
    }

    fn build(shape: Shape, h: f64) -> Result<Self> {
        let n = shape.dim();
        if !(2..=3).contains(&n) {
            return Err(Error::DimensionUnsupported(n));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!("spacing h = {h} must be positive")));
        }
        let mut origin = [0.0; 3];
        let mut dims = [1usize; 3];
        match &shape {
            Shape::Rectangle { lo, hi } => {
                for d in 0..n {
                    if !(hi[d] > lo[d]) {
                        return Err(Error::Domain("rectangle needs hi > lo".into()));
                    }
                    origin[d] = lo[d];
                    dims[d] = ((hi[d] - lo[d]) / h).floor() as usize + 2;
                }
            }
            Shape::Ball { center, .. } | Shape::Ellipsoid { center, .. } => {
                let ext: Vec<f64> = match &shape {
                    Shape::Ball { radius, .. } => vec![*radius; n],
                    Shape::Ellipsoid { semi, .. } => semi.clone(),
                    _ => unreachable!(),
                };
                for d in 0..n {
                    if !(ext[d] > 0.0) {
                        return Err(Error::Domain("radius must be positive".into()));
                    }
                    let m = (ext[d] / h).ceil() as usize + 1;
                    origin[d] = center[d] - m as f64 * h;
                    dims[d] = 2 * m + 1;
                }
            }
            Shape::Mask { dims: md, h: mh, .. } => {
                let stride = (h / mh).round() as usize;
                if stride == 0 || ((h / mh) - stride as f64).abs() > 1e-9 || !stride.is_power_of_two() {
                    return Err(Error::Domain(format!("mask spacing {mh} cannot be used at h = {h}")));
                }
                for d in 0..n {
                    dims[d] = (md[d] - 1) / stride + 1;
                }
            }
        }
        let total = dims[0] * dims[1] * dims[2];
        let pos = |i: usize, j: usize, k: usize| [origin[0] + i as f64 * h, origin[1] + j as f64 * h, origin[2] + k as f64 * h];
        let inside = |i: usize, j: usize, k: usize| -> bool {
            match &shape {
                Shape::Mask { dims: md, h: mh, cells } => {
                    let s = (h / mh).round() as usize;
                    let (a, b, c) = (i * s, j * s, k * s);
                    let lin = a + md[0] * (b + if n == 3 { md[1] * c } else { 0 });
                    cells[lin]
                }
                _ => shape.level(&pos(i, j, k)[..n]) < -1e-9 * h,
            }
        };
        let mut lattice = vec![NONE; total];
        let mut nodes = Vec::new();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    if inside(i, j, k) {
                        lattice[i + dims[0] * (j + dims[1] * k)] = nodes.len() as u32;
                        nodes.push([i as u32, j as u32, k as u32]);
                    }
                }
            }
        }
        let mut g = DomainGrid {
            n,
            h,
            shape,
            dims,
            origin,
            lattice,
            nodes,
            nbr: Vec::new(),
            theta: Vec::new(),
            diag: Vec::new(),
            measure: 0.0,
            inradius: 0.0,
            mg: OnceLock::new(),
        };
        g.links();
        g.measure = g.nodes.len() as f64 * h.powi(n as i32);
        g.inradius = match g.shape.inradius() {
            Some(r) => r,
            None => g.lattice_inradius(),
        };
        Ok(g)
    }

    fn links(&mut self) {
        let n = self.n;
        let h2 = 1.0 / (self.h * self.h);
        let mut nbr = Vec::with_capacity(self.nodes.len());
        let mut theta = Vec::with_capacity(self.nodes.len());
        let mut diag = Vec::with_capacity(self.nodes.len());
        for idx in 0..self.nodes.len() {
            let c = self.nodes[idx];
            let mut nb = [NONE; 6];
            let mut th = [1.0; 6];
            let mut dg = 0.0;
            for d in 0..2 * n {
                let axis = d / 2;
                let step: i64 = if d % 2 == 0 { 1 } else { -1 };
                let mut q = [c[0] as i64, c[1] as i64, c[2] as i64];
                q[axis] += step;
                let j = self.lattice_index(q);
                if j != NONE {
                    nb[d] = j;
                    dg += h2;
                } else {
                    th[d] = self.boundary_fraction(idx, axis, step as f64);
                    dg += h2 / th[d];
                }
            }
            nbr.push(nb);
            theta.push(th);
            diag.push(dg);
        }
        self.nbr = nbr;
        self.theta = theta;
        self.diag = diag;
    }

    fn boundary_fraction(&self, idx: usize, axis: usize, dir: f64) -> f64 {
        if matches!(self.shape, Shape::Mask { .. }) {
            return 1.0;
        }
        let x0 = self.position(idx);
        let at = |t: f64| {
            let mut x = x0;
            x[axis] += dir * t * self.h;
            self.shape.level(&x[..self.n])
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        if at(hi) < 0.0 {
            // neighbour lies inside within tolerance; treat as a full link
            return 1.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if at(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        if t > 1.0 - 1e-9 {
            1.0
        } else {
            t.max(MIN_THETA)
        }
    }

    fn lattice_index(&self, q: [i64; 3]) -> u32 {
        for d in 0..3 {
            if q[d] < 0 || q[d] >= self.dims[d] as i64 {
                return NONE;
            }
        }
        self.lattice[q[0] as usize + self.dims[0] * (q[1] as usize + self.dims[1] * q[2] as usize)]
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.nbr[i][..2 * self.n] {
                if j != NONE && !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    queue.push_back(j as usize);
                }
            }
        }
        count == self.nodes.len()
    }

    fn lattice_inradius(&self) -> f64 {
        let bpts: Vec<[f64; 3]> = self.boundary_points().map(|(_, x)| x).collect();
        let mut best: f64 = 0.0;
        for i in 0..self.len() {
            let x = self.position(i);
            let d = bpts.iter().map(|b| crate::geometry::dist(&x, b)).fold(f64::INFINITY, f64::min);
            best = best.max(d);
        }
        best
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lattice_coords(&self, i: usize) -> [u32; 3] {
        self.nodes[i]
    }

    /// Interior node at integer lattice coordinates, if any.
    pub fn node_at(&self, q: [i64; 3]) -> Option<usize> {
        let j = self.lattice_index(q);
        (j != NONE).then_some(j as usize)
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        let c = self.nodes[i];
        let mut x = [0.0; 3];
        for d in 0..self.n {
            x[d] = self.origin[d] + c[d] as f64 * self.h;
        }
        x
    }

    /// Interior node closest to x.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        let mut q = [0i64; 3];
        for d in 0..self.n {
            q[d] = ((x[d] - self.origin[d]) / self.h).round() as i64;
        }
        self.node_at(q)
    }

    /// Interior neighbour in direction d (axis d/2, sign + for even d).
    pub fn neighbor(&self, i: usize, d: usize) -> Option<usize> {
        let j = self.nbr[i][d];
        (j != NONE).then_some(j as usize)
    }

    /// Boundary-link fraction in direction d (1 for interior links).
    pub fn theta(&self, i: usize, d: usize) -> f64 {
        self.theta[i][d]
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// Boundary crossing points: (node, point) for every boundary link.
    pub fn boundary_points(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        (0..self.len()).flat_map(move |i| {
            (0..2 * self.n).filter_map(move |d| {
                if self.nbr[i][d] != NONE {
                    return None;
                }
                let mut x = self.position(i);
                let s = if d % 2 == 0 { 1.0 } else { -1.0 };
                x[d / 2] += s * self.theta[i][d] * self.h;
                Some((i, x))
            })
        })
    }

    /// Whether node i has a boundary link.
    pub fn touches_boundary(&self, i: usize) -> bool {
        self.nbr[i][..2 * self.n].iter().any(|&j| j == NONE)
    }

    /// Distance from node i to the nearest boundary crossing along lattice axes (lower-bounded by geometry).
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Mask { .. } => self.boundary_points().map(|(_, b)| crate::geometry::dist(x, &b)).fold(f64::INFINITY, f64::min),
            Shape::Ball { center, radius } => radius - crate::geometry::dist(&x[..self.n], center),
            Shape::Rectangle { lo, hi } => (0..self.n).map(|d| (x[d] - lo[d]).min(hi[d] - x[d])).fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid { .. } => -self.shape.level(&x[..self.n]),
        }
    }

    /// y = A x with A the discrete -Δ.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let h2 = 1.0 / (self.h * self.h);
        let nd = 2 * self.n;
        for i in 0..x.len() {
            let mut s = self.diag[i] * x[i];
            for &j in &self.nbr[i][..nd] {
                if j != NONE {
                    s -= h2 * x[j as usize];
                }
            }
            y[i] = s;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y
    }

    /// One Gauss–Seidel sweep on A x = b, forward or backward.
    pub fn gauss_seidel(&self, x: &mut [f64], b: &[f64], forward: bool) {
        let h2 = 1.0 / (self.h * self.h);
        let nd = 2 * self.n;
        let len = x.len();
        let mut sweep = |i: usize| {
            let mut s = b[i];
            for &j in &self.nbr[i][..nd] {
                if j != NONE {
                    s += h2 * x[j as usize];
                }
            }
            x[i] = s / self.diag[i];
        };
        if forward {
            (0..len).for_each(&mut sweep);
        } else {
            (0..len).rev().for_each(&mut sweep);
        }
    }

    /// h^N Σ f.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    /// ∫|∇φ|² = h^N φ·Aφ.
    pub fn dirichlet_energy(&self, phi: &[f64]) -> f64 {
        let ap = self.apply_vec(phi);
        phi.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume()
    }

    /// Calls `f(i, j_or_none, value_i_weight, edge_energy)` for every link of ∫|∇φ|².
    ///
    /// Interior edges are visited once (positive directions). Boundary links
    /// report `None` with the link fraction θ.
    pub fn for_each_edge(&self, phi: &[f64], mut f: impl FnMut(usize, Option<usize>, f64, f64)) {
        let w = self.h.powi(self.n as i32 - 2);
        for i in 0..self.len() {
            for d in 0..2 * self.n {
                let j = self.nbr[i][d];
                if j == NONE {
                    let th = self.theta[i][d];
                    f(i, None, th, w * phi[i] * phi[i] / th);
                } else if d % 2 == 0 {
                    let dv = phi[i] - phi[j as usize];
                    f(i, Some(j as usize), 1.0, w * dv * dv);
                }
            }
        }
    }

    /// Right-hand side contribution of Dirichlet data g on the boundary links.
    pub fn boundary_rhs(&self, g: impl Fn(&[f64; 3]) -> f64) -> Vec<f64> {
        let h2 = 1.0 / (self.h * self.h);
        let mut rhs = vec![0.0; self.len()];
        for i in 0..self.len() {
            for d in 0..2 * self.n {
                if self.nbr[i][d] == NONE {
                    let th = self.theta[i][d];
                    let mut x = self.position(i);
                    x[d / 2] += if d % 2 == 0 { th * self.h } else { -th * self.h };
                    rhs[i] += g(&x) * h2 / th;
                }
            }
        }
        rhs
    }

    /// Multilinear interpolation of a nodal field (zero at non-interior lattice nodes).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for d in 0..self.n {
            let s = (x[d] - self.origin[d]) / self.h;
            let f = s.floor();
            base[d] = f as i64;
            frac[d] = s - f;
        }
        let corners = 1usize << self.n;
        let mut acc = 0.0;
        for c in 0..corners {
            let mut q = base;
            let mut w = 1.0;
            for d in 0..self.n {
                if c >> d & 1 == 1 {
                    q[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w == 0.0 {
                continue;
            }
            if let Some(j) = self.node_at(q) {
                acc += w * values[j];
            }
        }
        acc
    }

    /// Twice-coarser discretization of the same shape, if it still has enough structure.
    pub fn coarsen(&self) -> Option<DomainGrid> {
        let shape = match &self.shape {
            Shape::Mask { .. } => self.shape.clone(),
            s => s.clone(),
        };
        let g = DomainGrid::build(shape, 2.0 * self.h).ok()?;
        if g.nodes.is_empty() {
            return None;
        }
        Some(g)
    }

    /// Cached multigrid hierarchy.
    pub fn multigrid(&self) -> Arc<Multigrid> {
        self.mg.get_or_init(|| Arc::new(Multigrid::new(self))).clone()
    }

    /// Fractional position of x in this lattice.
    pub fn lattice_position(&self, x: &[f64]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for d in 0..self.n {
            s[d] = (x[d] - self.origin[d]) / self.h;
        }
        s
    }

    /// Writes a nodal field as CSV rows `x[,y[,z]],value`.
    pub fn write_field_csv(&self, path: &Path, values: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = ["x", "y", "z"][..self.n].to_vec();
        header.push("value");
        w.write_record(&header)?;
        for (i, v) in values.iter().enumerate() {
            let x = self.position(i);
            let mut row: Vec<String> = x[..self.n].iter().map(|c| c.to_string()).collect();
            row.push(v.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// A stable identifier for output files.
    pub fn describe(&self) -> String {
        let s = match &self.shape {
            Shape::Rectangle { lo, hi } => format!("rectangle {:?}-{:?}", lo, hi),
            Shape::Ball { radius, .. } => format!("{} radius {radius}", if self.n == 2 { "disk" } else { "ball" }),
            Shape::Ellipsoid { semi, .. } => format!("ellipse {:?}", semi),
            Shape::Mask { dims, .. } => format!("mask {:?}", dims),
        };
        format!("{s}, N = {}, h = {}", self.n, self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_volume_close_to_analytic() {
        for (shape, h) in [(Shape::unit_ball(2), 1.0 / 128.0), (Shape::unit_ball(3), 1.0 / 32.0), (Shape::unit_square(), 1.0 / 64.0)] {
            let g = DomainGrid::new(shape.clone(), h).unwrap();
            let exact = shape.volume().unwrap();
            let perimeter = match g.n {
                2 => 2.0 * (std::f64::consts::PI).sqrt() * 2.0,
                _ => 6.0,
            };
            assert!((g.measure - exact).abs() <= 2.0 * h * perimeter, "{} vs {exact}", g.measure);
        }
    }

    #[test]
    fn square_links_are_full() {
        let g = DomainGrid::new(Shape::unit_square(), 0.125).unwrap();
        assert_eq!(g.len(), 49);
        for i in 0..g.len() {
            for d in 0..4 {
                assert_eq!(g.theta(i, d), 1.0);
            }
        }
    }

    #[test]
    fn mask_parse_and_disconnected() {
        let text = "2 0.25 5 5\n00000\n01110\n01110\n01110\n00000\n";
        let g = DomainGrid::new(Shape::parse_mask(text).unwrap(), 0.25).unwrap();
        assert_eq!(g.len(), 9);
        let split = "2 0.25 5 3\n00000\n01010\n00000\n";
        assert!(DomainGrid::new(Shape::parse_mask(split).unwrap(), 0.25).is_err());
        assert!(Shape::parse_mask("2 0.25 3 3\n000\n020\n000\n").is_err());
    }

    #[test]
    fn energy_matches_edge_sum() {
        let g = DomainGrid::new(Shape::unit_ball(2), 1.0 / 32.0).unwrap();
        let phi: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut s = 0.0;
        g.for_each_edge(&phi, |_, _, _, e| s += e);
        let e = g.dirichlet_energy(&phi);
        assert!((s - e).abs() < 1e-10 * e);
    }
}
