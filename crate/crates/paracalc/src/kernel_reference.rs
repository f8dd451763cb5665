//! Literal-kernel evaluation of Psi(g, W) for tiny grids.
//!
//! Every convolution is an explicit sum against a kernel table built from a
//! naive inverse DFT, and the parametric field is evaluated at each modulation
//! point with the Lagrange product formula. The commutator is assembled as
//! R1 + R2 plus the low-block boundary term that separates the mass-one
//! paraproduct from the standard one. Cost is O(frames^2 n^4 M); n <= 16.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::eta::{EtaLaw, ParamSlab};
use crate::field::{Field, TimeSlab};
use crate::grid::Grid;
use crate::kernel::TimeKernel;
use crate::partition::make_partition;

pub const REFERENCE_MAX_N: usize = 16;

/// Convolution kernel on the lattice: (K f)(x) = sum_y table[x - y] f(y).
struct Kernel {
    n: usize,
    table: Vec<f64>,
}

impl Kernel {
    fn from_multiplier(grid: Grid, m: impl Fn(usize, f64, f64) -> Complex64) -> Kernel {
        let n = grid.n();
        let len = n * n;
        let mut table = vec![0.0; len];
        let w = 2.0 * PI / n as f64;
        for (d, out) in table.iter_mut().enumerate() {
            let (d1, d2) = ((d / n) as f64, (d % n) as f64);
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in 0..len {
                let k1 = grid.freq(idx / n) as f64;
                let k2 = grid.freq(idx % n) as f64;
                let mult = m(idx, k1, k2);
                if mult != Complex64::new(0.0, 0.0) {
                    acc += mult * Complex64::from_polar(1.0, w * (k1 * d1 + k2 * d2));
                }
            }
            *out = acc.re / len as f64;
        }
        Kernel { n, table }
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        let n = self.n;
        let d1 = (x / n + n - y / n) % n;
        let d2 = (x % n + n - y % n) % n;
        self.table[d1 * n + d2]
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let len = f.len();
        (0..len).map(|x| (0..len).map(|y| self.at(x, y) * f[y]).sum()).collect()
    }
}

/// Physical-space kernels for every level.
struct Kernels {
    levels: Vec<i32>,
    block: Vec<Kernel>,
    block_lap: Vec<Kernel>,
    block_grad: [Vec<Kernel>; 2],
    low: Vec<Kernel>,
    low_lap: Vec<Kernel>,
    low_grad: [Vec<Kernel>; 2],
    lap: Kernel,
}

impl Kernels {
    fn build(grid: Grid) -> Result<Kernels> {
        let p = make_partition(grid)?;
        let levels: Vec<i32> = p.levels().collect();
        let real = |v: f64| Complex64::new(v, 0.0);
        let mk = |mult: &[f64], kind: u8| -> Kernel {
            Kernel::from_multiplier(grid, |idx, k1, k2| {
                let m = mult[idx];
                match kind {
                    0 => real(m),
                    1 => real(-(k1 * k1 + k2 * k2) * m),
                    2 => Complex64::new(0.0, k1 * m),
                    _ => Complex64::new(0.0, k2 * m),
                }
            })
        };
        let mut k = Kernels {
            levels: levels.clone(),
            block: vec![],
            block_lap: vec![],
            block_grad: [vec![], vec![]],
            low: vec![],
            low_lap: vec![],
            low_grad: [vec![], vec![]],
            lap: Kernel::from_multiplier(grid, |_, k1, k2| real(-(k1 * k1 + k2 * k2))),
        };
        for &j in &levels {
            let rho = p.rho(j)?;
            let low = if j >= 1 { p.low(j)? } else { p.rho(-1)? };
            k.block.push(mk(rho, 0));
            k.block_lap.push(mk(rho, 1));
            k.block_grad[0].push(mk(rho, 2));
            k.block_grad[1].push(mk(rho, 3));
            k.low.push(mk(low, 0));
            k.low_lap.push(mk(low, 1));
            k.low_grad[0].push(mk(low, 2));
            k.low_grad[1].push(mk(low, 3));
        }
        Ok(k)
    }
}

fn lagrange(nodes: &[f64], eta: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|m| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(v, _)| v != m)
                .map(|(_, &e)| (eta - e) / (nodes[m] - e))
                .product()
        })
        .collect()
}

/// Expansion coefficients of W at a given eta, matching `W.terms_at`.
fn coefficients(law: EtaLaw, nodes: &[f64], eta: f64) -> Vec<f64> {
    match law {
        EtaLaw::Power(p) => vec![eta.powi(p)],
        EtaLaw::Nodal => lagrange(nodes, eta),
    }
}

fn stencil_dt(frames: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
    let count = frames.len();
    let c = 1.0 / (2.0 * dt);
    (0..count)
        .map(|m| {
            (0..frames[0].len())
                .map(|x| {
                    if m == 0 {
                        c * (-3.0 * frames[0][x] + 4.0 * frames[1][x] - frames[2][x])
                    } else if m == count - 1 {
                        c * (3.0 * frames[m][x] - 4.0 * frames[m - 1][x] + frames[m - 2][x])
                    } else {
                        c * (frames[m + 1][x] - frames[m - 1][x])
                    }
                })
                .collect()
        })
        .collect()
}

struct Context {
    kernels: Kernels,
    /// weights[level][m] = list of (source frame, weight)
    weights: Vec<Vec<Vec<(usize, f64)>>>,
    /// g values per frame
    g: Vec<Vec<f64>>,
    /// coefs[s][y] = expansion coefficients at eta = g(s, y)
    coefs: Vec<Vec<Vec<f64>>>,
    len: usize,
}

impl Context {
    /// sum_i sum_s Q-weight * sum_y low_i(x - y) c(g(s, y)) [block_i terms(t_m)](x),
    /// optionally with the evaluation point eta = g(s, y) as an extra factor.
    fn smoothed(&self, low: &[Kernel], blocked: &[Vec<Vec<f64>>], m: usize, eta_factor: bool) -> Vec<f64> {
        let len = self.len;
        let mut out = vec![0.0; len];
        for l in 0..self.kernels.levels.len() {
            let lk = &low[l];
            let bt = &blocked[l];
            for &(s, w) in &self.weights[l][m] {
                for (x, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for y in 0..len {
                        let c = &self.coefs[s][y];
                        let mut v: f64 = c.iter().zip(bt.iter()).map(|(ci, b)| ci * b[x]).sum();
                        if eta_factor {
                            v *= self.g[s][y];
                        }
                        acc += lk.at(x, y) * v;
                    }
                    *o += w * acc;
                }
            }
        }
        out
    }

    /// Apply a per-level kernel to every expansion term: out[level][term][x].
    fn blocked(&self, kernel: &[Kernel], terms: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
        (0..self.kernels.levels.len())
            .map(|l| terms.iter().map(|t| kernel[l].apply(t)).collect())
            .collect()
    }

    /// Pi_<< of the terms given per frame.
    fn pi(&self, terms: &[Vec<Vec<f64>>], m: usize) -> Vec<f64> {
        let b = self.blocked(&self.kernels.block, &terms[m]);
        self.smoothed(&self.kernels.low, &b, m, false)
    }

    /// sum_k (S'_k g)(t_m) (Delta_k x), the mass-one paraproduct.
    fn outer(&self, m: usize, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        for l in 0..self.kernels.levels.len() {
            let low = self.kernels.low[l].apply(&self.g[m]);
            let blk = self.kernels.block[l].apply(x);
            for ((o, a), b) in out.iter_mut().zip(&low).zip(&blk) {
                *o += a * b;
            }
        }
        out
    }
}

/// Psi(g, W) with L W taken as the discrete d_t - eta Laplacian of W, by literal
/// kernel quadrature. Only for n <= 16.
pub fn psi_kernel_reference(g: &TimeSlab, w: &ParamSlab) -> Result<TimeSlab> {
    let (ctx, terms) = setup(g, w)?;
    let grid = g.grid();
    let frames = g.len();
    let k = &ctx.kernels;
    let nterms = terms[0].len();
    // stencil time derivative of every term
    let mut dterms: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(nterms); frames];
    for t in 0..nterms {
        let series: Vec<Vec<f64>> = (0..frames).map(|m| terms[m][t].clone()).collect();
        for (m, d) in stencil_dt(&series, g.dt()).into_iter().enumerate() {
            dterms[m].push(d);
        }
    }
    let pi_u: Vec<Vec<f64>> = (0..frames).map(|m| ctx.pi(&terms, m)).collect();
    let dt_pi_u = stencil_dt(&pi_u, g.dt());

    let out = (0..frames)
        .map(|m| {
            // R1 = g <' Pi(g, Lap U) - Pi(g, eta Lap U)
            let lap_b = ctx.blocked(&k.block_lap, &terms[m]);
            let pi_lap = ctx.smoothed(&k.low, &lap_b, m, false);
            let pi_eta_lap = ctx.smoothed(&k.low, &lap_b, m, true);
            let r1a = ctx.outer(m, &pi_lap);

            // R2 (i)+(ii): Laplacian and gradients falling on the modulation
            let plain = ctx.blocked(&k.block, &terms[m]);
            let mut inner = ctx.smoothed(&k.low_lap, &plain, m, false);
            for a in 0..2 {
                let gb = ctx.blocked(&k.block_grad[a], &terms[m]);
                let part = ctx.smoothed(&k.low_grad[a], &gb, m, false);
                for (o, v) in inner.iter_mut().zip(&part) {
                    *o += 2.0 * v;
                }
            }
            let r2a = ctx.outer(m, &inner);
            // R2 (iii): time derivative falling on the kernel
            let pi_dt = ctx.pi(&dterms, m);

            // boundary: -Delta_{-1} g (Delta_{-1} + Delta_0) Lap Pi(g, U)
            let lap_pi = k.lap.apply(&pi_u[m]);
            let g_low = k.block[0].apply(&ctx.g[m]);
            let b0 = k.block[0].apply(&lap_pi);
            let b1 = k.block[1].apply(&lap_pi);

            let vals: Vec<f64> = (0..ctx.len)
                .map(|x| {
                    let r1 = r1a[x] - pi_eta_lap[x];
                    let r2 = r2a[x] - (dt_pi_u[m][x] - pi_dt[x]);
                    let boundary = -g_low[x] * (b0[x] + b1[x]);
                    r1 + r2 + boundary
                })
                .collect();
            Field::from_values(grid, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSlab::new(g.t0(), g.dt(), out)
}

/// Pi_<<(g, W) by literal kernel quadrature. Only for n <= 16.
pub fn smoothed_para_reference(g: &TimeSlab, w: &ParamSlab) -> Result<TimeSlab> {
    let (ctx, terms) = setup(g, w)?;
    let frames = (0..g.len())
        .map(|m| Field::from_values(g.grid(), ctx.pi(&terms, m)))
        .collect::<Result<Vec<_>>>()?;
    TimeSlab::new(g.t0(), g.dt(), frames)
}

type Terms = Vec<Vec<Vec<f64>>>;

fn setup(g: &TimeSlab, w: &ParamSlab) -> Result<(Context, Terms)> {
    let grid = g.grid();
    if grid.n() > REFERENCE_MAX_N {
        return Err(Error::GridTooLarge(grid.n()));
    }
    g.check_aligned(w.template())?;
    let frames = g.len();
    if frames < 3 {
        return Err(Error::TooFewFrames(frames));
    }
    let eta = w.eta();
    for f in g.frames() {
        eta.check(f.min())?;
        eta.check(f.max())?;
    }
    let kernels = Kernels::build(grid)?;
    let qk = TimeKernel::standard();
    let weights = kernels
        .levels
        .iter()
        .map(|&j| {
            let lag = qk.lag_weights(j, g.dt());
            (0..frames)
                .map(|m| {
                    let mut per = vec![0.0; m + 1];
                    for (l, &wl) in lag.iter().enumerate() {
                        per[m.saturating_sub(l)] += wl;
                    }
                    per.into_iter().enumerate().filter(|(_, v)| *v != 0.0).collect()
                })
                .collect()
        })
        .collect();
    let gv: Vec<Vec<f64>> = g.frames().iter().map(|f| f.values().to_vec()).collect();
    let law = w.law();
    let coefs = gv
        .iter()
        .map(|f| f.iter().map(|&v| coefficients(law, eta.nodes(), v)).collect())
        .collect();
    let ctx = Context { kernels, weights, g: gv, coefs, len: grid.len() };

    // terms[m][term][x]
    let terms: Vec<Vec<Vec<f64>>> =
        (0..frames).map(|m| w.terms_at(m).iter().map(|f| f.values().to_vec()).collect()).collect();
    Ok((ctx, terms))
}
