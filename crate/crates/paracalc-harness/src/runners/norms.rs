//! Scaling-exponent regressions for the estimates of the calculus.

use anyhow::Result;

use paracalc::besov::{besov_norm, block_sup_norms, fit_block_decay, fit_line, parabolic_norm, time_holder, SpatialNorm};
use paracalc::noise::{make_vartheta, sample_white_noise};
use paracalc::nonlinear::{nl_commutator_lambda, psi};
use paracalc::para::{commutator_c, para_lt, paralin_remainder, resonant, time_smoothed_para};
use paracalc::rng::derive_seed;
use paracalc::spectral::{heat_propagate, inv_laplacian, partial};
use paracalc::synth::{
    geometric_amplitudes, octave_amplitudes, synthesize_holder, synthesize_lacunary, synthesize_octaves,
    synthesize_radial,
};
use paracalc::{make_partition, EtaGrid, Field, Grid, ParamField, ParamSlab, TimeSlab};

use super::{mean, stderr};
use crate::config::ExperimentConfig;
use crate::report::{Check, RunOutput, RunReport, Table};
use crate::svg::Plot;

/// Fitted slope of log2 ||Delta_j f||_inf over j >= 1; NaN when too few blocks are active.
fn slope(f: &Field) -> f64 {
    fit_block_decay(&block_sup_norms(f)).map(|l| l.slope).unwrap_or(f64::NAN)
}

/// Slope of log2(||grad Delta_j f|| / ||Delta_j f||) against j over the interior levels.
fn bernstein_slope(f: &Field) -> f64 {
    let p = make_partition(f.grid()).expect("valid grid");
    let spec = f.spectrum();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 1..p.top() {
        let b = p.block_of(&spec, j).expect("level in range");
        let (gx, gy) = (partial(&b, 0), partial(&b, 1));
        let grad = gx.zip_map(&gy, |a, c| (a * a + c * c).sqrt()).sup_norm();
        xs.push(j as f64);
        ys.push((grad / b.sup_norm()).log2());
    }
    fit_line(&xs, &ys).slope
}

/// Per-seed slopes of every seeded regression.
struct SeedRow {
    white: f64,
    theta: f64,
    bernstein: f64,
    paralin: f64,
    resonant: f64,
    commutator: f64,
    lambda: f64,
    psi: f64,
}

const FRAMES: usize = 3;
const FRAME_DT: f64 = 1e-3;

fn seed_row(grid: Grid, eta: &EtaGrid, alpha: f64, seed: u64) -> Result<SeedRow> {
    let s = |i: u64| derive_seed(seed, i);
    let xi = sample_white_noise(grid, s(0));
    let theta = inv_laplacian(&xi)?;

    let f = synthesize_octaves(grid, &octave_amplitudes(grid, alpha), Some(s(1)));
    let f = f.scale(1.0 / f.sup_norm());
    let paralin = slope(&paralin_remainder(f64::sin, f64::cos, &f));

    let rough = synthesize_holder(grid, -0.5, s(2));
    let smooth = synthesize_holder(grid, 1.2, s(3));
    let res = slope(&resonant(&rough, &smooth));

    let (a, b) = (synthesize_holder(grid, alpha, s(4)), synthesize_holder(grid, alpha, s(5)));
    let c = synthesize_holder(grid, alpha - 2.0, s(6));
    let comm = slope(&commutator_c(&a, &b, &c));

    // g = a(u) with u of regularity alpha normalized to sup 1, h = vartheta(eta)
    let u = synthesize_holder(grid, alpha, s(7));
    let u = u.scale(1.0 / u.sup_norm());
    let g = u.map(|v| 0.75 + 0.25 * v.sin());
    let gs = TimeSlab::constant(&g, 0.0, FRAME_DT, FRAMES)?;
    let h = make_vartheta(&xi, eta)?;
    let lam = slope(nl_commutator_lambda(&gs, &h)?.last());
    let w = ParamSlab::from_field(&h, 0.0, FRAME_DT, FRAMES)?;
    let lw = ParamSlab::from_field(&ParamField::constant(eta.clone(), xi.clone()), 0.0, FRAME_DT, FRAMES)?;
    let ps = slope(psi(&gs, &w, &lw)?.last());

    Ok(SeedRow {
        white: -slope(&xi),
        theta: -slope(&theta),
        bernstein: bernstein_slope(&xi),
        paralin,
        resonant: res,
        commutator: comm,
        lambda: lam,
        psi: ps,
    })
}

/// Slope of log2 ||e^{t Laplacian} u0||_{C^alpha} against log2 t for u0 of regularity beta.
fn heat_exponent(grid: Grid, alpha: f64, beta: f64, seed: u64) -> Result<(f64, Vec<(f64, f64)>)> {
    let u0 = synthesize_lacunary(grid, beta, seed);
    let mut pts = Vec::new();
    for k in 0..=16 {
        let t = 4f64.powf(-1.0 - 0.25 * k as f64);
        let u = heat_propagate(&u0, 1.0, t)?;
        pts.push((t, besov_norm(&u, alpha).norm));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.log2()).collect();
    Ok((fit_line(&xs, &ys).slope, pts))
}

/// Slopes of g < h and of g < h - g << h at the last frame, g(t) = t spatially constant.
fn smoothed_difference(grid: Grid, seed: u64) -> Result<(f64, f64)> {
    let dt: f64 = 2.5e-4;
    let frames = (0.0625 / dt).round() as usize + 1;
    let h = synthesize_holder(grid, -0.5, seed);
    let gs = TimeSlab::from_fn(grid, 0.0, dt, frames, |t| Field::constant(grid, t))?;
    let hs = TimeSlab::constant(&h, 0.0, dt, frames)?;
    let smoothed = time_smoothed_para(&gs, &hs)?;
    let plain = para_lt(gs.last(), &h);
    let diff = &plain - smoothed.last();
    Ok((slope(&plain), slope(&diff)))
}

/// Time-Holder seminorm of exponent (gamma - kappa)/2 over the parabolic gamma norm, for a heat-flow slab.
fn interpolation_ratio(n: usize, dt: f64, gamma: f64, kappa: f64, seed: u64) -> Result<f64> {
    let grid = Grid::new(n)?;
    let u0 = synthesize_lacunary(grid, gamma, seed);
    let frames = (0.05 / dt).round() as usize + 1;
    let slab = TimeSlab::from_fn(grid, 0.0, dt, frames, |t| heat_propagate(&u0, 1.0, t).expect("t >= 0"))?;
    let holder = time_holder(&slab, (gamma - kappa) / 2.0, SpatialNorm::Sup);
    Ok(holder / parabolic_norm(&slab, gamma))
}

/// parabolic_norm(a(u)) / (1 + parabolic_norm(u))^2 for heat-flow slabs u of varying size.
fn composition_ratios(grid: Grid, alpha: f64, seed: u64, count: usize) -> Result<Vec<(f64, f64)>> {
    let dt = 5e-3;
    let frames = 11;
    (0..count)
        .map(|i| {
            let scale = 0.1 + 2.9 * i as f64 / (count - 1).max(1) as f64;
            let base = synthesize_holder(grid, alpha, derive_seed(seed, 100 + i as u64));
            let base = base.scale(scale / base.sup_norm());
            let u = TimeSlab::from_fn(grid, 0.0, dt, frames, |t| heat_propagate(&base, 1.0, t).expect("t >= 0"))?;
            let au = u.map_frames(|f| f.map(|v| 0.75 + 0.25 * v.sin()));
            let m = parabolic_norm(&u, alpha);
            Ok((m, parabolic_norm(&au, alpha) / (1.0 + m).powi(2)))
        })
        .collect()
}

pub fn run_norm_suite(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let st = &cfg.norms;
    let grid = Grid::new(st.n)?;
    let alpha = st.alpha;
    let eta = cfg.solver.eta_grid()?;
    let mut report = RunReport::new("norms", cfg);

    let rows = paracalc::parallel::map_range(st.seeds, |i| seed_row(grid, &eta, alpha, derive_seed(cfg.seed, i as u64)));
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(
        "exponents",
        &["seed_index", "white_noise_alpha", "theta_alpha", "bernstein", "paralin", "resonant", "commutator", "lambda", "psi"],
    );
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![i as f64, r.white, r.theta, r.bernstein, r.paralin, r.resonant, r.commutator, r.lambda, r.psi]);
    }
    let col = |name: &str| table.column(name).expect("column exists");
    let judged = |name: &str, values: Vec<f64>, target: f64, tol: f64| {
        Check::within(name, mean(&values), target, tol).note(format!("stderr {:.3e} over {} seeds", stderr(&values), values.len()))
    };
    report.check(judged("white noise regularity", col("white_noise_alpha"), -1.0, 0.15));
    report.check(judged("vartheta regularity", col("theta_alpha"), 1.0, 0.15));
    report.check(judged("bernstein slope", col("bernstein"), 1.0, 0.1));
    report.check(judged("paralinearization remainder slope", col("paralin"), -2.0 * alpha, 0.2));
    report.check(judged("resonant product slope", col("resonant"), -0.7, 0.2));
    // The commutator estimate is an upper bound on the decay: C lies in C^{beta+gamma}.
    let comm = col("commutator");
    let gamma = alpha - 2.0;
    report.check(
        Check::at_most("commutator slope bound", mean(&comm), -(alpha + gamma) + 0.2)
            .note(format!("nominal {:.2}; stderr {:.3e}", -(alpha + gamma), stderr(&comm))),
    );
    report.check(judged("lambda slope", col("lambda"), -(3.0 * alpha - 2.0), 0.25));
    report.check(judged("psi slope", col("psi"), -(2.0 * alpha - 2.0), 0.25));

    // deterministic regressions
    let radial = -slope(&synthesize_radial(grid, 2.5));
    report.check(Check::within("radial synthesis regularity", radial, 0.5, 0.1));

    let aligned_rough = synthesize_octaves(grid, &geometric_amplitudes(grid, -0.5), None);
    let aligned_smooth = synthesize_octaves(grid, &octave_amplitudes(grid, 1.2), None);
    let para = slope(&para_lt(&aligned_rough, &aligned_smooth));
    report.check(Check::within("paraproduct slope", para, -0.7, 0.2).note("phase-aligned octave fields"));

    let (plain, diff) = smoothed_difference(grid, derive_seed(cfg.seed, 1 << 20))?;
    report.check(Check::at_most("smoothed paraproduct difference slope", diff, plain - 0.5).note(format!("plain slope {plain:.3}")));

    let mut heat = Table::new("heat_smoothing", &["alpha", "beta", "t", "norm"]);
    let mut heat_plot = Plot::new("heat_smoothing", "Heat smoothing", "t", "C^alpha norm").log_log(true, true);
    for (a, b) in [(1.2, 0.2), (1.0, -0.5), (0.5, -1.0)] {
        let (s, pts) = heat_exponent(grid, a, b, derive_seed(cfg.seed, 1 << 21))?;
        let target = -(a - b) / 2.0;
        report.check(Check::within(&format!("heat smoothing exponent alpha={a} beta={b}"), s, target, 0.1 * target.abs()));
        for &(t, v) in &pts {
            heat.push(vec![a, b, t, v]);
        }
        heat_plot.add(&format!("alpha {a}, beta {b}"), pts);
    }

    let mut interp = Table::new("interpolation", &["n", "dt", "ratio"]);
    let mut ratios = Vec::new();
    for n in [64usize, 128] {
        for dt in [1e-3, 2.5e-4] {
            let r = interpolation_ratio(n, dt, alpha, 0.1, derive_seed(cfg.seed, 1 << 22))?;
            interp.push(vec![n as f64, dt, r]);
            ratios.push(r);
        }
    }
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    report.check(Check::at_most("interpolation ratio spread", spread, 2.0));

    let comp = composition_ratios(grid, alpha, cfg.seed, 50)?;
    let (calib, held): (Vec<_>, Vec<_>) = comp.iter().enumerate().partition(|(i, _)| i % 2 == 0);
    let k_bound = 2.0 * calib.iter().map(|(_, c)| c.1).fold(0.0, f64::max);
    let worst = held.iter().map(|(_, c)| c.1).fold(0.0, f64::max);
    report.check(Check::at_most("composition bound on held-out samples", worst, k_bound).note("K = 2 x max over calibration samples"));
    let mut comp_table = Table::new("composition", &["parabolic_norm_u", "ratio"]);
    for &(m, r) in &comp {
        comp_table.push(vec![m, r]);
    }

    // block norms of one white-noise sample and its vartheta
    let xi = sample_white_noise(grid, derive_seed(cfg.seed, 0));
    let mut blocks = Table::new("block_norms", &["j", "white_noise", "vartheta"]);
    let (bx, bt) = (block_sup_norms(&xi), block_sup_norms(&inv_laplacian(&xi)?));
    let mut block_plot = Plot::new("block_norms", "Block sup norms", "j", "sup norm").log_log(false, true);
    for (i, (a, b)) in bx.iter().zip(&bt).enumerate() {
        blocks.push(vec![i as f64 - 1.0, *a, *b]);
    }
    block_plot.add("white noise", bx.iter().enumerate().map(|(i, v)| (i as f64 - 1.0, *v)).collect());
    block_plot.add("vartheta", bt.iter().enumerate().map(|(i, v)| (i as f64 - 1.0, *v)).collect());

    report.tables.extend([table, heat, interp, comp_table, blocks]);
    report.plots.extend([heat_plot, block_plot]);
    Ok(report.into())
}
