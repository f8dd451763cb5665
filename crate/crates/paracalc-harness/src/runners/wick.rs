//! Monte-Carlo checks of the renormalization constants.

use anyhow::Result;

use paracalc::noise::{mollify, sample_param_noise, sigma_eps, wick_mc_estimate, NoiseFactor};
use paracalc::para::resonant;
use paracalc::rng::derive_seed;
use paracalc::spectral::inv_laplacian;
use paracalc::{EtaGrid, Field, Grid, ParamField};

use super::{mean, stderr};
use crate::config::ExperimentConfig;
use crate::report::{Check, RunOutput, RunReport, Table};
use crate::svg::Plot;

/// Below this many samples the standard error is not trusted.
pub const MIN_RELIABLE_SAMPLES: usize = 10;

fn band(name: &str, value: f64, err: f64, target: f64, samples: usize) -> Check {
    let c = Check::within(name, value, target, 3.0 * err).note(format!("3 stderr band, {samples} samples"));
    if samples < MIN_RELIABLE_SAMPLES {
        c.unjudged("stderr unreliable")
    } else {
        c
    }
}

/// Spatial means of (Laplacian^-1 xi_eps) o xi_eps and (Laplacian^-1 xi_eps) o d_eta xi_eps at
/// eta, for the rank-one parametric noise xi(eta, .) = eta W.
fn rank_one_draw(grid: Grid, eta: &EtaGrid, at: f64, eps: f64, cfg: &ExperimentConfig, seed: u64) -> Result<(f64, f64)> {
    let m = cfg.noise.mollifier;
    let noise = sample_param_noise(&[NoiseFactor::new(|e| e, seed)], grid, eta);
    let smooth = noise.map_nodes(|f| mollify(f, eps, m).expect("eps validated"), None);
    let deriv = ParamField::nodal(eta.clone(), smooth.derivative(1)?)?;
    let value = smooth.eval(at)?;
    let slope = deriv.eval(at)?;
    // Laplacian^-1 = -(-Laplacian)^-1
    let inv: Field = inv_laplacian(&value)?.scale(-1.0);
    Ok((resonant(&inv, &value).mean(), resonant(&inv, &slope).mean()))
}

pub fn run_wick(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let st = &cfg.wick;
    let grid = Grid::new(st.n)?;
    let eta = cfg.solver.eta_grid()?;
    let m = cfg.noise.mollifier;
    let mut report = RunReport::new("wick", cfg);
    let sigma = sigma_eps(m, st.eps, grid)?;
    report.check(Check::info("sigma", sigma).note(format!("eps {}, n {}", st.eps, st.n)));

    let mut means = Table::new("wick_means", &["eta", "mean", "stderr", "target"]);
    for &e in &st.etas {
        let est = wick_mc_estimate(st.samples, st.eps, e, grid, m, derive_seed(cfg.seed, 1))?;
        let target = -sigma / (e * e);
        means.push(vec![e, est.spatial_mean, est.spatial_stderr, target]);
        report.check(band(&format!("resonant mean at eta={e}"), est.spatial_mean, est.spatial_stderr, target, est.samples));
    }

    if st.parametric {
        let mut rank = Table::new("rank_one_means", &["eta", "value_mean", "value_stderr", "value_target", "slope_mean", "slope_stderr", "slope_target"]);
        for &e in &st.etas {
            let base = derive_seed(cfg.seed, 2);
            let draws = paracalc::parallel::map_range(st.samples, |i| rank_one_draw(grid, &eta, e, st.eps, cfg, derive_seed(base, i as u64)));
            let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
            let (v, s): (Vec<f64>, Vec<f64>) = draws.into_iter().unzip();
            // F(a, b) = ab: F(e, e) = e^2 and d1 F(e, e) = e
            let (tv, ts) = (-e * e * sigma, -e * sigma);
            rank.push(vec![e, mean(&v), stderr(&v), tv, mean(&s), stderr(&s), ts]);
            report.check(band(&format!("rank-one value identity at eta={e}"), mean(&v), stderr(&v), tv, st.samples));
            report.check(band(&format!("rank-one slope identity at eta={e}"), mean(&s), stderr(&s), ts, st.samples));
        }
        report.tables.push(rank);
    }

    let big = Grid::new(st.ladder_n)?;
    let mut ladder = Table::new("sigma_ladder", &["eps", "sigma", "increment"]);
    let mut prev: Option<f64> = None;
    let mut incs = Vec::new();
    let mut pts = Vec::new();
    for k in 0..=st.ladder_halvings {
        let e = st.ladder_eps0 / 2f64.powi(k as i32);
        let s = sigma_eps(m, e, big)?;
        let inc = prev.map_or(f64::NAN, |p| s - p);
        if prev.is_some() {
            incs.push(inc);
        }
        ladder.push(vec![e, s, inc]);
        pts.push((e, s));
        prev = Some(s);
    }
    if incs.len() >= 2 {
        let hi = incs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = incs.iter().cloned().fold(f64::INFINITY, f64::min);
        report.check(Check::at_most("sigma increment spread", hi / lo, 1.1).note(format!("n {}", st.ladder_n)));
    }
    let mut plot = Plot::new("sigma_ladder", "Renormalization constant", "eps", "sigma").log_log(true, false);
    plot.add("sigma", pts);
    report.tables.extend([means, ladder]);
    report.plots.push(plot);
    Ok(report.into())
}
