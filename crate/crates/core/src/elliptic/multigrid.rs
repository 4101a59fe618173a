//! Geometric multigrid V-cycle built from rediscretizations at h, 2h, 4h, ...
//!
//! Used only as a symmetric preconditioner, so the coarse operators need not
//! be Galerkin products.

use nalgebra::{DMatrix, DVector};

use super::domain::DomainGrid;

const COARSEST_NODES: usize = 400;
const DENSE_LIMIT: usize = 1500;

#[derive(Debug)]
struct Transfer {
    // CSR rows over fine nodes: (coarse index, weight)
    start: Vec<u32>,
    cols: Vec<u32>,
    weights: Vec<f32>,
}

impl Transfer {
    fn new(fine: &DomainGrid, coarse: &DomainGrid) -> Self {
        let n = fine.n;
        let mut start = Vec::with_capacity(fine.len() + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        start.push(0);
        for i in 0..fine.len() {
            let s = coarse.lattice_position(&fine.position(i));
            let mut base = [0i64; 3];
            let mut frac = [0.0; 3];
            for d in 0..n {
                let f = (s[d] + 1e-9).floor();
                base[d] = f as i64;
                frac[d] = if (s[d] - f).abs() < 1e-6 { 0.0 } else { s[d] - f };
            }
            for c in 0..(1usize << n) {
                let mut q = base;
                let mut w = 1.0;
                for d in 0..n {
                    if c >> d & 1 == 1 {
                        q[d] += 1;
                        w *= frac[d];
                    } else {
                        w *= 1.0 - frac[d];
                    }
                }
                if w > 0.0 {
                    if let Some(j) = coarse.node_at(q) {
                        cols.push(j as u32);
                        weights.push(w as f32);
                    }
                }
            }
            start.push(cols.len() as u32);
        }
        Transfer { start, cols, weights }
    }

    fn prolong_add(&self, xc: &[f64], xf: &mut [f64]) {
        for (i, x) in xf.iter_mut().enumerate() {
            let (a, b) = (self.start[i] as usize, self.start[i + 1] as usize);
            let mut s = 0.0;
            for k in a..b {
                s += self.weights[k] as f64 * xc[self.cols[k] as usize];
            }
            *x += s;
        }
    }

    fn restrict(&self, rf: &[f64], rc: &mut [f64], scale: f64) {
        rc.iter_mut().for_each(|v| *v = 0.0);
        for (i, r) in rf.iter().enumerate() {
            let (a, b) = (self.start[i] as usize, self.start[i + 1] as usize);
            for k in a..b {
                rc[self.cols[k] as usize] += scale * self.weights[k] as f64 * r;
            }
        }
    }
}

#[derive(Debug)]
enum Coarsest {
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Sweeps(usize),
}

#[derive(Debug)]
pub struct Multigrid {
    coarse: Vec<DomainGrid>,
    transfers: Vec<Transfer>,
    coarsest: Coarsest,
    sweeps: usize,
}

fn dense_operator(g: &DomainGrid) -> DMatrix<f64> {
    let m = g.len();
    let mut a = DMatrix::zeros(m, m);
    let h2 = 1.0 / (g.h * g.h);
    for i in 0..m {
        a[(i, i)] = g.diag()[i];
        for d in 0..2 * g.n {
            if let Some(j) = g.neighbor(i, d) {
                a[(i, j)] = -h2;
            }
        }
    }
    a
}

impl Multigrid {
    pub fn new(fine: &DomainGrid) -> Self {
        let mut coarse: Vec<DomainGrid> = Vec::new();
        let mut transfers = Vec::new();
        loop {
            let cur = coarse.last().unwrap_or(fine);
            if cur.len() <= COARSEST_NODES {
                break;
            }
            let Some(next) = cur.coarsen() else { break };
            if next.len() * 2 > cur.len() {
                break;
            }
            transfers.push(Transfer::new(cur, &next));
            coarse.push(next);
        }
        let last = coarse.last().unwrap_or(fine);
        let coarsest = if last.len() <= DENSE_LIMIT {
            match dense_operator(last).cholesky() {
                Some(c) => Coarsest::Dense(c),
                None => Coarsest::Sweeps(40),
            }
        } else {
            Coarsest::Sweeps(40)
        };
        Multigrid { coarse, transfers, coarsest, sweeps: 1 }
    }

    pub fn levels(&self) -> usize {
        self.coarse.len() + 1
    }

    /// x ≈ A^{-1} b by one symmetric V-cycle from a zero initial guess.
    pub fn vcycle(&self, fine: &DomainGrid, b: &[f64], x: &mut [f64]) {
        self.cycle(0, fine, b, x);
    }

    fn cycle(&self, level: usize, grid: &DomainGrid, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        if level == self.coarse.len() {
            match &self.coarsest {
                Coarsest::Dense(ch) => {
                    let sol = ch.solve(&DVector::from_column_slice(b));
                    x.copy_from_slice(sol.as_slice());
                }
                Coarsest::Sweeps(k) => {
                    for _ in 0..*k {
                        grid.gauss_seidel(x, b, true);
                        grid.gauss_seidel(x, b, false);
                    }
                }
            }
            return;
        }
        for _ in 0..self.sweeps {
            grid.gauss_seidel(x, b, true);
        }
        let ax = grid.apply_vec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let cg = &self.coarse[level];
        let t = &self.transfers[level];
        let mut rc = vec![0.0; cg.len()];
        t.restrict(&r, &mut rc, 0.5f64.powi(grid.n as i32));
        let mut xc = vec![0.0; cg.len()];
        self.cycle(level + 1, cg, &rc, &mut xc);
        t.prolong_add(&xc, x);
        for _ in 0..self.sweeps {
            grid.gauss_seidel(x, b, false);
        }
    }
}
