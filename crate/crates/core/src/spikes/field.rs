//! Scalar fields the spike detector can probe: grid solutions, exact ball
//! solutions and synthetic spike superpositions.

use std::sync::Arc;

use crate::elliptic::DomainGrid;
use crate::emden::{BallSolution, SpikeFamily};
use crate::error::{Error, Result};
use crate::geometry::{critical_exponent, dist, norm};
use crate::plasma::PlasmaSolution;

/// Values of a field on a uniform lattice; NaN marks points outside the domain.
#[derive(Debug, Clone)]
pub struct ScanLattice {
    pub n: usize,
    pub origin: [f64; 3],
    pub h: f64,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl ScanLattice {
    pub fn index(&self, q: [usize; 3]) -> usize {
        q[0] + self.dims[0] * (q[1] + self.dims[1] * q[2])
    }

    pub fn coords(&self, mut i: usize) -> [usize; 3] {
        let mut q = [0; 3];
        for d in 0..3 {
            q[d] = i % self.dims[d];
            i /= self.dims[d];
        }
        q
    }

    pub fn position(&self, i: usize) -> [f64; 3] {
        let q = self.coords(i);
        let mut x = [0.0; 3];
        for d in 0..self.n {
            x[d] = self.origin[d] + self.h * q[d] as f64;
        }
        x
    }

    /// Indices of points at least as large as every lattice neighbour (3^N stencil).
    pub fn local_maxima(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let reach: [i64; 3] = std::array::from_fn(|d| if d < self.n { 1 } else { 0 });
        for i in 0..self.values.len() {
            let v = self.values[i];
            if !(v > 0.0) {
                continue;
            }
            let q = self.coords(i);
            let mut is_max = true;
            'outer: for dz in -reach[2]..=reach[2] {
                for dy in -reach[1]..=reach[1] {
                    for dx in -reach[0]..=reach[0] {
                        let off = [dx, dy, dz];
                        if off == [0, 0, 0] {
                            continue;
                        }
                        let mut r = [0usize; 3];
                        let mut inside = true;
                        for d in 0..3 {
                            let c = q[d] as i64 + off[d];
                            if c < 0 || c >= self.dims[d] as i64 {
                                inside = false;
                                break;
                            }
                            r[d] = c as usize;
                        }
                        if !inside {
                            continue;
                        }
                        let w = self.values[self.index(r)];
                        if w > v {
                            is_max = false;
                            break 'outer;
                        }
                    }
                }
            }
            if is_max {
                out.push(i);
            }
        }
        out
    }
}

pub trait Field: Send + Sync {
    fn dim(&self) -> usize;
    /// Field value; zero outside the domain.
    fn value(&self, x: &[f64]) -> f64;
    fn boundary_distance(&self, x: &[f64]) -> f64;
    fn scan(&self) -> ScanLattice;
    /// Native resolution of the data, if it comes from a grid.
    fn spacing(&self) -> Option<f64> {
        None
    }
    /// ∫_Ω [v - 1]_+^p when the field knows its own quadrature.
    fn excess_integral(&self, _p: f64) -> Option<f64> {
        None
    }
}

fn box_scan(n: usize, lo: [f64; 3], hi: [f64; 3], per_axis: usize, f: &dyn Fn(&[f64]) -> Option<f64>) -> ScanLattice {
    let h = (0..n).map(|d| (hi[d] - lo[d]) / per_axis as f64).fold(0.0, f64::max);
    let mut dims = [1usize; 3];
    for d in 0..n {
        dims[d] = ((hi[d] - lo[d]) / h).round() as usize + 1;
    }
    let mut lat = ScanLattice { n, origin: lo, h, dims, values: Vec::new() };
    let total = dims.iter().product();
    lat.values = (0..total)
        .map(|i| {
            let x = lat.position(i);
            f(&x[..n]).unwrap_or(f64::NAN)
        })
        .collect();
    lat
}

/// Nodal data of a grid solution, interpolated multilinearly between nodes.
pub struct GridField {
    pub domain: Arc<DomainGrid>,
    pub values: Vec<f64>,
}

impl Field for GridField {
    fn dim(&self) -> usize {
        self.domain.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.domain.interpolate(&self.values, x)
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.domain.boundary_distance(x)
    }

    fn scan(&self) -> ScanLattice {
        let g = &self.domain;
        let mut values = vec![f64::NAN; g.dims.iter().product()];
        for i in 0..g.len() {
            let q = g.lattice_coords(i);
            values[q[0] as usize + g.dims[0] * (q[1] as usize + g.dims[1] * q[2] as usize)] = self.values[i];
        }
        ScanLattice { n: g.n, origin: g.origin, h: g.h, dims: g.dims, values }
    }

    fn spacing(&self) -> Option<f64> {
        Some(self.domain.h)
    }

    fn excess_integral(&self, p: f64) -> Option<f64> {
        let f: Vec<f64> = self.values.iter().map(|v| (v - 1.0).max(0.0).powf(p)).collect();
        Some(self.domain.integrate(&f))
    }
}

/// λψ/|α| of the exact radial ball solution.
pub struct BallField {
    pub sol: BallSolution,
}

impl Field for BallField {
    fn dim(&self) -> usize {
        self.sol.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        if r >= self.sol.rn {
            0.0
        } else {
            self.sol.rescaled(r)
        }
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.sol.rn - norm(x)
    }

    fn scan(&self) -> ScanLattice {
        let (n, r) = (self.sol.n, self.sol.rn);
        let lo = std::array::from_fn(|d| if d < n { -r } else { 0.0 });
        let hi = std::array::from_fn(|d| if d < n { r } else { 0.0 });
        box_scan(n, lo, hi, if n == 2 { 128 } else { 48 }, &|x| (norm(x) < r).then(|| self.sol.rescaled(norm(x))))
    }
}

/// One member of the explicit spike family, centered at `center`, viewed inside
/// a ball of radius `container`.
#[derive(Clone)]
pub struct FamilyField {
    pub family: SpikeFamily,
    pub center: Vec<f64>,
    pub container: f64,
}

impl FamilyField {
    pub fn new(family: SpikeFamily, center: Vec<f64>) -> Self {
        FamilyField { family, center, container: 1.0 }
    }

    fn raw(&self, x: &[f64]) -> f64 {
        self.family.v(dist(x, &self.center))
    }
}

impl Field for FamilyField {
    fn dim(&self) -> usize {
        self.family.ground.base.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        if norm(x) >= self.container {
            0.0
        } else {
            self.raw(x)
        }
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.container - norm(x)
    }

    fn scan(&self) -> ScanLattice {
        Superposition { parts: vec![self.clone()] }.scan()
    }
}

/// Sum of spike family members sharing one container ball.
pub struct Superposition {
    pub parts: Vec<FamilyField>,
}

impl Superposition {
    pub fn container(&self) -> f64 {
        self.parts.first().map(|p| p.container).unwrap_or(1.0)
    }
}

impl Field for Superposition {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if norm(x) >= self.container() {
            0.0
        } else {
            self.parts.iter().map(|f| f.raw(x)).sum()
        }
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.container() - norm(x)
    }

    fn scan(&self) -> ScanLattice {
        let n = self.dim();
        let r = self.container();
        let lo = std::array::from_fn(|d| if d < n { -r } else { 0.0 });
        let hi = std::array::from_fn(|d| if d < n { r } else { 0.0 });
        box_scan(n, lo, hi, if n == 2 { 128 } else { 48 }, &|x| (norm(x) < r).then(|| self.value(x)))
    }
}

/// v with balls cut out (set to zero), used to check that detection exhausts the spikes.
pub struct Excised<'a> {
    pub inner: &'a dyn Field,
    pub balls: Vec<(Vec<f64>, f64)>,
}

impl Excised<'_> {
    fn removed(&self, x: &[f64]) -> bool {
        self.balls.iter().any(|(c, r)| dist(x, c) < *r)
    }
}

impl Field for Excised<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.removed(x) {
            0.0
        } else {
            self.inner.value(x)
        }
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.inner.boundary_distance(x)
    }

    fn scan(&self) -> ScanLattice {
        let mut lat = self.inner.scan();
        for i in 0..lat.values.len() {
            if !lat.values[i].is_nan() && self.removed(&lat.position(i)[..lat.n]) {
                lat.values[i] = 0.0;
            }
        }
        lat
    }

    fn spacing(&self) -> Option<f64> {
        self.inner.spacing()
    }
}

/// v = λψ/|α| together with the blow-up scales μ = λ|α|^{p-1}, ε = μ^{-1/2}.
pub struct RescaledField {
    pub n: usize,
    pub p: f64,
    pub mu: f64,
    pub eps: f64,
    /// (λ/|α|^{1-p/p_N})^{N/2} when v comes from a solution of the constrained problem.
    pub sigma_direct: Option<f64>,
    pub source: String,
    pub field: Box<dyn Field>,
}

fn check_negative(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        return Err(Error::SignMismatch(format!("rescaling needs alpha < 0, got {alpha}")));
    }
    Ok(())
}

fn direct_sigma(n: usize, p: f64, lambda: f64, alpha: f64) -> f64 {
    (lambda / alpha.abs().powf(1.0 - p / critical_exponent(n))).powf(n as f64 / 2.0)
}

impl RescaledField {
    pub fn from_grid(domain: Arc<DomainGrid>, sol: &PlasmaSolution) -> Result<Self> {
        check_negative(sol.alpha)?;
        let scale = sol.lambda / sol.alpha.abs();
        let values = sol.psi.iter().map(|v| v * scale).collect();
        let n = domain.n;
        let mu = sol.lambda * sol.alpha.abs().powf(sol.p - 1.0);
        Ok(RescaledField {
            n,
            p: sol.p,
            mu,
            eps: mu.powf(-0.5),
            sigma_direct: Some(direct_sigma(n, sol.p, sol.lambda, sol.alpha)),
            source: format!("grid solution, {}, lambda = {}", domain.describe(), sol.lambda),
            field: Box::new(GridField { domain, values }),
        })
    }

    pub fn from_ball(sol: &BallSolution) -> Result<Self> {
        check_negative(sol.alpha)?;
        Ok(RescaledField {
            n: sol.n,
            p: sol.p,
            mu: sol.mu(),
            eps: sol.eps(),
            sigma_direct: Some(sol.sigma()),
            source: format!("ball solution, N = {}, p = {}, lambda = {}", sol.n, sol.p, sol.lambda),
            field: Box::new(BallField { sol: sol.clone() }),
        })
    }

    /// A synthetic field with prescribed μ.
    pub fn synthetic(field: Box<dyn Field>, p: f64, mu: f64, source: &str) -> Self {
        RescaledField { n: field.dim(), p, mu, eps: mu.powf(-0.5), sigma_direct: None, source: source.into(), field }
    }

    /// μ^{N/2}∫[v-1]_+^p by the field's own quadrature, if available.
    pub fn sigma_quadrature(&self) -> Option<f64> {
        self.field.excess_integral(self.p).map(|m| self.mu.powf(self.n as f64 / 2.0) * m)
    }
}
