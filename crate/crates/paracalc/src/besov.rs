use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, TimeSlab};
use crate::partition::make_partition;

/// Blocks whose sup norm falls below this fraction of the largest are treated as empty.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Least-squares line through (x, y) points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    LineFit { slope, intercept, residual: (ss / m).sqrt(), points: xs.len() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovReport {
    pub alpha: f64,
    /// sup norms of Delta_j f, index j+1.
    pub raw_norms: Vec<f64>,
    /// 2^{j alpha} ||Delta_j f||_inf, index j+1.
    pub block_norms: Vec<f64>,
    pub norm: f64,
    /// Slope of log2 ||Delta_j f|| over j >= 1, when at least 4 blocks are active.
    pub fitted_slope: Option<LineFit>,
}

/// ||Delta_j f||_inf for j = -1..=J.
pub fn block_sup_norms(f: &Field) -> Vec<f64> {
    let p = make_partition(f.grid()).expect("valid grid");
    p.blocks_of(&f.spectrum()).iter().map(Field::sup_norm).collect()
}

/// Fit of log2 ||Delta_j|| against j over all blocks j >= 1.
pub fn fit_block_decay(raw: &[f64]) -> std::result::Result<LineFit, usize> {
    let peak = raw.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, &v) in raw.iter().enumerate().skip(2) {
        let j = j - 1;
        if v > NOISE_FLOOR * peak && v > 0.0 {
            xs.push(j as f64);
            ys.push(v.log2());
        }
    }
    if xs.len() < 4 {
        return Err(xs.len());
    }
    Ok(fit_line(&xs, &ys))
}

pub fn besov_report(raw: Vec<f64>, alpha: f64) -> BesovReport {
    let block_norms: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(i, v)| 2f64.powf((i as f64 - 1.0) * alpha) * v)
        .collect();
    let norm = block_norms.iter().fold(0.0f64, |m, v| m.max(*v));
    let fitted_slope = fit_block_decay(&raw).ok();
    BesovReport { alpha, raw_norms: raw, block_norms, norm, fitted_slope }
}

/// sup_j 2^{j alpha} ||Delta_j f||_inf.
pub fn besov_norm(f: &Field, alpha: f64) -> BesovReport {
    besov_report(block_sup_norms(f), alpha)
}

/// Fitted regularity exponent alpha_hat = -slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub alpha: f64,
    pub residual: f64,
    pub points: usize,
}

pub fn estimate_regularity(f: &Field) -> Result<Regularity> {
    regularity_from_norms(&block_sup_norms(f))
}

pub fn regularity_from_norms(raw: &[f64]) -> Result<Regularity> {
    let fit = fit_block_decay(raw).map_err(Error::InsufficientBlocks)?;
    Ok(Regularity { alpha: -fit.slope, residual: fit.residual, points: fit.points })
}

/// Spatial norm used inside time-Holder seminorms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpatialNorm {
    Sup,
    /// Besov norm with the given exponent.
    Besov(f64),
}

/// sup over frame pairs of ||u(t) - u(s)|| / |t - s|^exponent.
pub fn time_holder(u: &TimeSlab, exponent: f64, inner: SpatialNorm) -> f64 {
    let frames = u.frames();
    let count = frames.len();
    let dt = u.dt();
    match inner {
        SpatialNorm::Sup => {
            let rows = crate::parallel::map_range(count, |m| {
                let mut best = 0.0f64;
                for l in (m + 1)..count {
                    let d = frames[m].max_abs_diff(&frames[l]);
                    best = best.max(d / ((l - m) as f64 * dt).powf(exponent));
                }
                best
            });
            rows.into_iter().fold(0.0, f64::max)
        }
        SpatialNorm::Besov(alpha) => {
            let p = make_partition(u.grid()).expect("valid grid");
            let stacks: Vec<Vec<Field>> =
                crate::parallel::map_slice(frames, |f| p.blocks_of(&f.spectrum()));
            let rows = crate::parallel::map_range(count, |m| {
                let mut best = 0.0f64;
                for l in (m + 1)..count {
                    let mut d = 0.0f64;
                    for (j, (a, b)) in stacks[m].iter().zip(&stacks[l]).enumerate() {
                        d = d.max(2f64.powf((j as f64 - 1.0) * alpha) * a.max_abs_diff(b));
                    }
                    best = best.max(d / ((l - m) as f64 * dt).powf(exponent));
                }
                best
            });
            rows.into_iter().fold(0.0, f64::max)
        }
    }
}

/// sup_t ||u(t)||_{C^alpha} + time-Holder(alpha/2) seminorm of the C^0 norm.
pub fn parabolic_norm(u: &TimeSlab, alpha: f64) -> f64 {
    let space = crate::parallel::map_slice(u.frames(), |f| besov_norm(f, alpha).norm)
        .into_iter()
        .fold(0.0, f64::max);
    space + time_holder(u, alpha / 2.0, SpatialNorm::Besov(0.0))
}
