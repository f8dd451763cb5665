//! Nonlinear paraproducts of a parametric field h(eta, x) with a modulation
//! eta = g(x). Every parametric field is expanded as h(eta, x) = sum_m c_m(eta) h_m(x)
//! with c_m the Lagrange basis on the eta nodes (or a single power of eta),
//! so each operator is a sum of bilinear block pairings between c_m(g) and h_m.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::eta::{EtaGrid, EtaLaw, ParamField, ParamRef, ParamSlab};
use crate::field::{Field, TimeSlab};
use crate::kernel::TimeKernel;
use crate::para::{accumulate, para_lt, resonant, time_average};
use crate::partition::{make_partition, Blocks};
use crate::spectral::{
    coarsen, dealiased_map, fine_samples, laplacian, padded_blocks, padded_samples, padded_size,
    truncate_padded,
};

fn check_range(g: &Field, eta: &EtaGrid) -> Result<()> {
    let (lo, hi) = (g.min(), g.max());
    eta.check(lo)?;
    eta.check(hi)?;
    Ok(())
}

/// Coefficient fields x -> c_m(g(x)) for each expansion term, evaluated on
/// the refined grid and truncated back to the resolved band.
pub fn modulators(g: &Field, eta: &EtaGrid, law: EtaLaw) -> Result<Vec<Field>> {
    check_range(g, eta)?;
    let grid = g.grid();
    Ok(match law {
        EtaLaw::Power(0) => vec![Field::constant(grid, 1.0)],
        EtaLaw::Power(p) => vec![dealiased_map(g, |v| v.powi(p))],
        EtaLaw::Nodal => {
            let fine = fine_samples(g);
            let m = eta.len();
            let mut cols = vec![vec![0.0; fine.len()]; m];
            let mut phi = vec![0.0; m];
            for (x, &v) in fine.iter().enumerate() {
                eta.basis_into(v, &mut phi);
                for (c, &w) in cols.iter_mut().zip(&phi) {
                    c[x] = w;
                }
            }
            crate::parallel::map_slice(&cols, |c| coarsen(grid, c))
        }
    })
}

/// Padded low-pass sums from padded blocks: S_j (or the mass-one variant) at index j+1.
fn padded_lows(blocks: &[Vec<f64>], mass_one: bool) -> Vec<Vec<f64>> {
    let len = blocks[0].len();
    let mut out = Vec::with_capacity(blocks.len());
    let mut acc = vec![0.0; len];
    for j in -1..=(blocks.len() as i32 - 2) {
        if j >= 1 {
            for (o, v) in acc.iter_mut().zip(&blocks[(j - 1) as usize]) {
                *o += v;
            }
        }
        if mass_one && j <= 0 {
            out.push(blocks[0].clone());
        } else {
            out.push(acc.clone());
        }
    }
    out
}

/// The three nonlinear paraproducts.
#[derive(Clone, Debug)]
pub struct NlParts {
    pub lt: Field,
    pub res: Field,
    pub gt: Field,
}

/// Pi_<, Pi_o and Pi_> together. Block pairs (i, j) of (c_m(g), h_m) are
/// split as: < for j >= i+2 and for i = -1, j in {-1, 0}; > for i >= j+2;
/// o for the rest. Products are dealiased, so the three sum to `nl_compose`.
pub fn nl_parts(g: &Field, h: &ParamField) -> Result<NlParts> {
    g.grid().check_same(&h.grid())?;
    let mods = modulators(g, h.eta(), h.law())?;
    let terms = h.terms();
    let grid = g.grid();
    let len = padded_size(grid.n()).pow(2);
    let partial = crate::parallel::map_range(terms.len(), |t| {
        let a = padded_blocks(&mods[t]);
        let b = padded_blocks(terms[t]);
        let top = a.len() as i32 - 2;
        let a_low = padded_lows(&a, true);
        let b_low = padded_lows(&b, false);
        let mut lt = vec![0.0; len];
        let mut res = vec![0.0; len];
        let mut gt = vec![0.0; len];
        let mut near = vec![0.0; len];
        for j in -1..=top {
            let k = (j + 1) as usize;
            accumulate(&mut lt, &a_low[k], &b[k]);
            accumulate(&mut gt, &a[k], &b_low[k]);
            near.iter_mut().for_each(|v| *v = 0.0);
            let from = if j == -1 { 1 } else { j - 1 };
            for i in from..=(j + 1).min(top) {
                for (o, v) in near.iter_mut().zip(&b[(i + 1) as usize]) {
                    *o += v;
                }
            }
            accumulate(&mut res, &a[k], &near);
        }
        [lt, res, gt]
    });
    let mut sums = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in &partial {
        for (s, q) in sums.iter_mut().zip(p) {
            for (o, v) in s.iter_mut().zip(q) {
                *o += v;
            }
        }
    }
    let [lt, res, gt] = sums;
    Ok(NlParts {
        lt: truncate_padded(grid, &lt),
        res: truncate_padded(grid, &res),
        gt: truncate_padded(grid, &gt),
    })
}

pub fn nl_para_lt(g: &Field, h: &ParamField) -> Result<Field> {
    Ok(nl_parts(g, h)?.lt)
}

pub fn nl_para_res(g: &Field, h: &ParamField) -> Result<Field> {
    Ok(nl_parts(g, h)?.res)
}

pub fn nl_para_gt(g: &Field, h: &ParamField) -> Result<Field> {
    Ok(nl_parts(g, h)?.gt)
}

/// Pi_diamond(g, h)(x) = h(g(x), x), as a sum of dealiased products c_m(g) h_m.
pub fn nl_compose(g: &Field, h: &ParamField) -> Result<Field> {
    g.grid().check_same(&h.grid())?;
    let mods = modulators(g, h.eta(), h.law())?;
    let grid = g.grid();
    let mut acc = vec![0.0; padded_size(grid.n()).pow(2)];
    for (m, t) in mods.iter().zip(h.terms()) {
        accumulate(&mut acc, &padded_samples(&m.spectrum(), None), &padded_samples(&t.spectrum(), None));
    }
    Ok(truncate_padded(grid, &acc))
}

type Stack = Vec<Vec<Vec<Field>>>;

/// Time-smoothed low-pass modulations of one trajectory g, cached per eta law.
/// Entry [term][frame][j+1] holds (Q_j * S'_j c_term(g))(t_frame), with S'_j
/// the mass-one low-pass.
pub struct SmoothedModulation {
    g: TimeSlab,
    eta: EtaGrid,
    cache: Mutex<HashMap<EtaLaw, Arc<Stack>>>,
}

impl SmoothedModulation {
    pub fn new(g: &TimeSlab, eta: &EtaGrid) -> Result<Self> {
        for f in g.frames() {
            check_range(f, eta)?;
        }
        Ok(SmoothedModulation { g: g.clone(), eta: eta.clone(), cache: Mutex::new(HashMap::new()) })
    }

    pub fn slab(&self) -> &TimeSlab {
        &self.g
    }

    pub fn eta(&self) -> &EtaGrid {
        &self.eta
    }

    fn stack(&self, law: EtaLaw) -> Result<Arc<Stack>> {
        if let Some(s) = self.cache.lock().expect("modulation cache").get(&law) {
            return Ok(s.clone());
        }
        let p = make_partition(self.g.grid())?;
        let kernel = TimeKernel::standard();
        let weights: Vec<Vec<f64>> = p.levels().map(|j| kernel.lag_weights(j, self.g.dt())).collect();
        let per_frame: Vec<Vec<Field>> = self
            .g
            .frames()
            .iter()
            .map(|f| modulators(f, &self.eta, law))
            .collect::<Result<_>>()?;
        let terms = per_frame[0].len();
        let frames = self.g.len();
        let mut stack: Stack = Vec::with_capacity(terms);
        for t in 0..terms {
            let lows: Vec<Vec<Field>> =
                crate::parallel::map_range(frames, |m| Blocks::of(&per_frame[m][t]).lows_mass_one());
            let smoothed = crate::parallel::map_range(frames, |m| {
                (0..p.count())
                    .map(|l| time_average(|s| &lows[s][l], &weights[l], m))
                    .collect::<Vec<Field>>()
            });
            stack.push(smoothed);
        }
        let stack = Arc::new(stack);
        self.cache.lock().expect("modulation cache").insert(law, stack.clone());
        Ok(stack)
    }

    /// Pi_<<(g, h).
    pub fn apply<'a>(&self, h: impl Into<ParamRef<'a>>) -> Result<TimeSlab> {
        let h = h.into();
        if h.eta() != &self.eta {
            return Err(Error::Invalid("eta grids differ".into()));
        }
        let g = &self.g;
        if let Some(s) = h.slab() {
            g.check_aligned(s.template())?;
        }
        let grid = g.grid();
        if h.law() == EtaLaw::Power(0) {
            let frames = (0..g.len()).map(|m| h.terms_at(m)[0].clone()).collect();
            return Ok(TimeSlab::raw(grid, g.t0(), g.dt(), frames));
        }
        let stack = self.stack(h.law())?;
        let len = padded_size(grid.n()).pow(2);
        let frames = crate::parallel::map_range(g.len(), |m| {
            let mut acc = vec![0.0; len];
            for (t, term) in h.terms_at(m).into_iter().enumerate() {
                for (l, blk) in padded_blocks(term).iter().enumerate() {
                    accumulate(&mut acc, &padded_samples(&stack[t][m][l].spectrum(), None), blk);
                }
            }
            truncate_padded(grid, &acc)
        });
        Ok(TimeSlab::raw(grid, g.t0(), g.dt(), frames))
    }
}

/// Pi_<<(g, h) for a single use; build a `SmoothedModulation` to reuse g.
pub fn nl_para_smoothed<'a>(g: &TimeSlab, h: impl Into<ParamRef<'a>>) -> Result<TimeSlab> {
    let h = h.into();
    SmoothedModulation::new(g, h.eta())?.apply(h)
}

/// h o Delta h node by node; a power law eta^p becomes eta^{2p}.
pub fn self_resonance(h: &ParamField) -> ParamField {
    let f = |v: &Field| resonant(v, &laplacian(v));
    match h.law() {
        EtaLaw::Power(p) => h.map_nodes(f, Some(2 * p)),
        EtaLaw::Nodal => h.map_nodes(f, None),
    }
}

/// Lambda(g, h) = Pi_<<(g,h) o Delta Pi_<<(g,h) - Pi_diamond(g, h o Delta h).
pub fn nl_commutator_lambda(g: &TimeSlab, h: &ParamField) -> Result<TimeSlab> {
    let modu = SmoothedModulation::new(g, h.eta())?;
    lambda_with(&modu, h)
}

pub fn lambda_with(modu: &SmoothedModulation, h: &ParamField) -> Result<TimeSlab> {
    let smooth = modu.apply(h)?;
    let hh = self_resonance(h);
    let g = modu.slab();
    let frames = crate::parallel::map_range(g.len(), |m| {
        let p = smooth.frame(m);
        let lhs = resonant(p, &laplacian(p));
        lhs - nl_compose(g.frame(m), &hh).expect("range checked")
    });
    Ok(TimeSlab::raw(g.grid(), g.t0(), g.dt(), frames))
}

/// Second-order time derivative: centered inside, one-sided at the ends.
pub fn time_derivative(w: &TimeSlab) -> Result<TimeSlab> {
    let count = w.len();
    if count < 3 {
        return Err(Error::TooFewFrames(count));
    }
    let c = 1.0 / (2.0 * w.dt());
    let f = w.frames();
    let frames = crate::parallel::map_range(count, |m| {
        let mut out = Field::zeros(w.grid());
        if m == 0 {
            out.axpy(-3.0 * c, &f[0]);
            out.axpy(4.0 * c, &f[1]);
            out.axpy(-c, &f[2]);
        } else if m == count - 1 {
            out.axpy(3.0 * c, &f[m]);
            out.axpy(-4.0 * c, &f[m - 1]);
            out.axpy(c, &f[m - 2]);
        } else {
            out.axpy(c, &f[m + 1]);
            out.axpy(-c, &f[m - 1]);
        }
        out
    });
    Ok(TimeSlab::raw(w.grid(), w.t0(), w.dt(), frames))
}

/// (L W)(eta) = d_t W(eta) - eta Laplacian W(eta).
pub fn apply_l(w: &ParamSlab) -> Result<ParamSlab> {
    let nodes = w
        .nodes()
        .iter()
        .zip(w.eta().nodes())
        .map(|(s, &e)| {
            let dt = time_derivative(s)?;
            dt.zip_frames(s, |d, f| {
                let mut out = d.clone();
                out.axpy(-e, &laplacian(f));
                out
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ParamSlab::nodal(w.eta().clone(), nodes)
}

/// d_t w - g < Laplacian w.
pub fn para_lt_op(g: &TimeSlab, w: &TimeSlab) -> Result<TimeSlab> {
    g.check_aligned(w)?;
    let dt = time_derivative(w)?;
    let frames = crate::parallel::map_range(w.len(), |m| {
        let lap = laplacian(w.frame(m));
        dt.frame(m) - &para_lt(g.frame(m), &lap)
    });
    Ok(TimeSlab::raw(w.grid(), w.t0(), w.dt(), frames))
}

/// Psi(g, W) = Pi_<<(g, LW) - (d_t - g < Laplacian) Pi_<<(g, W).
pub fn psi<'a, 'b>(g: &TimeSlab, w: impl Into<ParamRef<'a>>, lw: impl Into<ParamRef<'b>>) -> Result<TimeSlab> {
    let w = w.into();
    let modu = SmoothedModulation::new(g, w.eta())?;
    psi_with(&modu, w, lw)
}

pub fn psi_with<'a, 'b>(
    modu: &SmoothedModulation,
    w: impl Into<ParamRef<'a>>,
    lw: impl Into<ParamRef<'b>>,
) -> Result<TimeSlab> {
    let first = modu.apply(lw)?;
    let inner = modu.apply(w)?;
    let second = para_lt_op(modu.slab(), &inner)?;
    first.zip_frames(&second, |a, b| a - b)
}
