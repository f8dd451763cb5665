//! Epsilon ladders and the cross-check between the two solvers.

use anyhow::{Context, Result};

use paracalc::besov::besov_norm;
use paracalc::coeff::DiffusionSpec;
use paracalc::noise::{enhanced_noise, sample_white_noise, EnhancedNoise};
use paracalc::solvers::{solve_classical, solve_paracontrolled, SolverConfig};
use paracalc::{make_partition, Field, TimeSlab};

use crate::config::ExperimentConfig;
use crate::report::{Check, RunOutput, RunReport, Snapshot, Table};
use crate::svg::Plot;

pub(crate) fn noise_data(cfg: &ExperimentConfig, solver: &SolverConfig, eps: f64) -> Result<EnhancedNoise> {
    let grid = solver.grid()?;
    let eta = solver.eta_grid()?;
    if cfg.noise.zero {
        return Ok(EnhancedNoise::zero(grid, &eta));
    }
    let xi = sample_white_noise(grid, cfg.seed);
    Ok(enhanced_noise(&xi, eps, cfg.noise.mollifier, &eta, cfg.seed)?)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

/// sup over frames of the sup norm of Delta_{-1}(a - b).
fn low_gap(a: &TimeSlab, b: &TimeSlab) -> Result<f64> {
    let p = make_partition(a.grid())?;
    let mut worst = 0.0f64;
    for (x, y) in a.frames().iter().zip(b.frames()) {
        worst = worst.max(p.block_of(&(x - y).spectrum(), -1)?.sup_norm());
    }
    Ok(worst)
}

/// dt * sum over frames of the spatial mean of a'(u)/a(u)^2: the response of the
/// low modes to a unit change of the counterterm constant.
fn counterterm_response(u: &TimeSlab, spec: &DiffusionSpec) -> f64 {
    let per_frame: Vec<f64> = u.frames()[1..]
        .iter()
        .map(|f| f.map(|v| spec.da(v) / spec.a(v).powi(2)).mean())
        .collect();
    u.dt() * per_frame.iter().sum::<f64>()
}

struct Rung {
    eps: f64,
    sigma: f64,
    main: TimeSlab,
    raw: Option<TimeSlab>,
    xi2_norm: f64,
    raw_mean: f64,
}

/// Classical solves along eps_k = eps0 2^-k, all driven by one noise sample.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.diffusion_spec()?;
    let grid = cfg.solver.grid()?;
    let u0 = cfg.initial.field(grid);
    let ld = &cfg.ladder;
    let compare = ld.compare_unrenormalized && ld.renormalize;
    let mut report = RunReport::new("converge", cfg);
    let mut rungs = Vec::new();
    for eps in ld.eps() {
        let data = noise_data(cfg, &cfg.solver, eps)?;
        let main_sigma = if ld.renormalize { data.sigma } else { 0.0 };
        let solve = |s: f64| solve_classical(&cfg.solver, &spec, &data.xi_eps, s, &u0).with_context(|| format!("classical solve at eps = {eps}"));
        let main = solve(main_sigma)?;
        let raw = if compare { Some(solve(0.0)?) } else { None };
        let xi2_norm = besov_norm(&data.xi2.eval(1.0)?, 2.0 * cfg.solver.alpha - 2.0).norm;
        let raw_mean = data.raw_resonance().eval(1.0)?.mean();
        rungs.push(Rung { eps, sigma: data.sigma, main, raw, xi2_norm, raw_mean });
    }

    let mut table = Table::new("ladder", &["k", "eps", "sigma", "d_main", "d_unrenormalized", "low_gap", "drift_scale", "xi2_norm", "raw_mean"]);
    let (mut d_main, mut d_raw, mut gaps, mut drifts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, r) in rungs.iter().enumerate() {
        let mut row = vec![k as f64, r.eps, r.sigma, f64::NAN, f64::NAN, f64::NAN, f64::NAN, r.xi2_norm, r.raw_mean];
        if let Some(next) = rungs.get(k + 1) {
            let d = next.main.max_abs_diff(&r.main)?;
            d_main.push(d);
            row[3] = d;
            if let (Some(a), Some(b)) = (&r.raw, &next.raw) {
                let dr = b.max_abs_diff(a)?;
                let gap = low_gap(b, a)?;
                let drift = (next.sigma - r.sigma) * counterterm_response(&r.main, &spec);
                d_raw.push(dr);
                gaps.push(gap);
                drifts.push(drift);
                row[4] = dr;
                row[5] = gap;
                row[6] = drift;
            }
        }
        table.push(row);
    }

    if rungs.len() < 2 {
        report.note("single-level ladder: no increments to judge");
    } else {
        let label = if ld.renormalize { "renormalized increments strictly decreasing" } else { "increments strictly decreasing" };
        report.check(Check::holds(label, strictly_decreasing(&d_main)).note(fmt_list(&d_main)));
        if compare {
            report.check(Check::holds("unrenormalized increments non-decreasing", non_decreasing(&d_raw)).note(fmt_list(&d_raw)));
            let ok = gaps.iter().zip(&drifts).all(|(g, d)| *g >= 0.5 * d.abs());
            report.check(
                Check::holds("unrenormalized low-block gap at least half the counterterm drift", ok)
                    .note(format!("gaps {} vs drifts {}", fmt_list(&gaps), fmt_list(&drifts))),
            );
            let first = rungs.first().expect("nonempty");
            let last = rungs.last().expect("nonempty");
            let growth = first.raw_mean - last.raw_mean;
            report.check(
                Check::at_least("raw resonant low-mode growth", growth, 0.5 * (last.sigma - first.sigma))
                    .note("at least half the sigma increment"),
            );
            let means: Vec<f64> = rungs.iter().map(|r| -r.raw_mean).collect();
            report.check(Check::holds("raw resonant low mode grows with sigma", means.windows(2).all(|w| w[1] > w[0])));
        }
        let norms: Vec<f64> = rungs.iter().map(|r| r.xi2_norm).collect();
        let spread = norms.iter().cloned().fold(0.0, f64::max) / norms.iter().cloned().fold(f64::INFINITY, f64::min);
        report.check(Check::at_most("renormalized resonant norm spread", spread, 2.0).note(fmt_list(&norms)));
    }

    let mut plot = Plot::new("ladder", "Increments along the eps ladder", "eps", "sup distance").log_log(true, true);
    let eps: Vec<f64> = rungs.iter().map(|r| r.eps).collect();
    plot.add("with counterterm", eps.iter().cloned().zip(d_main.iter().cloned()).collect());
    if compare {
        plot.add("without counterterm", eps.iter().cloned().zip(d_raw.iter().cloned()).collect());
    }
    report.tables.push(table);
    report.plots.push(plot);
    let last = rungs.pop().expect("at least one level");
    Ok(RunOutput { report, snapshots: vec![("u_finest".into(), Snapshot::Slab(last.main))] })
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Distance between the two solvers on their common frames, relative to the classical solution.
fn solver_distance(classical: &TimeSlab, para: &TimeSlab) -> (f64, Vec<[f64; 3]>) {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut rows = Vec::new();
    for (m, (c, p)) in classical.frames().iter().zip(para.frames()).enumerate() {
        let d = c.max_abs_diff(p);
        worst = worst.max(d);
        scale = scale.max(c.sup_norm());
        rows.push([classical.time(m), c.sup_norm(), d]);
    }
    (worst / scale.max(f64::MIN_POSITIVE), rows)
}

struct Crossed {
    distance: f64,
    frames: Vec<[f64; 3]>,
    residuals: Vec<f64>,
    converged: bool,
    halvings: usize,
    classical: TimeSlab,
}

fn cross(cfg: &ExperimentConfig, solver: &SolverConfig, spec: &DiffusionSpec, u0: &Field) -> Result<Crossed> {
    let data = noise_data(cfg, solver, cfg.noise.eps)?;
    let classical = solve_classical(solver, spec, &data.xi_eps, data.sigma + cfg.crossval.sigma_offset, u0)?;
    let state = solve_paracontrolled(solver, &data, spec, u0)?;
    let (distance, frames) = solver_distance(&classical, &state.u);
    Ok(Crossed {
        distance,
        frames,
        residuals: state.diagnostics.residuals.clone(),
        converged: state.diagnostics.converged,
        halvings: state.diagnostics.halvings,
        classical,
    })
}

pub fn run_crossval(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.diffusion_spec()?;
    let u0 = cfg.initial.field(cfg.solver.grid()?);
    let mut report = RunReport::new("crossval", cfg);
    let base = cross(cfg, &cfg.solver, &spec, &u0)?;
    report.check(Check::at_most("relative solver distance", base.distance, cfg.crossval.tolerance));
    report.check(Check::holds("picard residuals strictly decreasing", strictly_decreasing(&base.residuals)).note(fmt_list(&base.residuals)));
    report.check(Check::at_most("picard iterations", base.residuals.len() as f64, cfg.solver.picard.max_iter as f64));
    report.check(Check::holds("picard converged", base.converged));
    if base.halvings > 0 {
        report.note(format!("horizon halved {} times; compared on the shorter horizon", base.halvings));
    }

    let mut frames = Table::new("frames", &["dt", "t", "classical_sup", "distance"]);
    for r in &base.frames {
        frames.push(vec![cfg.solver.dt, r[0], r[1], r[2]]);
    }
    let mut residuals = Table::new("picard_residuals", &["dt", "iteration", "residual"]);
    for (i, r) in base.residuals.iter().enumerate() {
        residuals.push(vec![cfg.solver.dt, i as f64 + 1.0, *r]);
    }
    let mut plot = Plot::new("picard_residuals", "Picard residuals", "iteration", "residual").log_log(false, true);
    plot.add(&format!("dt {}", cfg.solver.dt), base.residuals.iter().enumerate().map(|(i, r)| (i as f64 + 1.0, *r)).collect());

    if cfg.crossval.refine {
        let mut fine = cfg.solver.clone();
        fine.dt /= 2.0;
        fine.picard.tolerance /= 10.0;
        let refined = cross(cfg, &fine, &spec, &u0)?;
        report.check(
            Check::holds("distance decreases under refinement", refined.distance < base.distance)
                .note(format!("{:.3e} -> {:.3e}", base.distance, refined.distance)),
        );
        report.check(Check::holds("refined picard residuals strictly decreasing", strictly_decreasing(&refined.residuals)).note(fmt_list(&refined.residuals)));
        report.check(Check::at_most("refined picard iterations", refined.residuals.len() as f64, fine.picard.max_iter as f64));
        for r in &refined.frames {
            frames.push(vec![fine.dt, r[0], r[1], r[2]]);
        }
        for (i, r) in refined.residuals.iter().enumerate() {
            residuals.push(vec![fine.dt, i as f64 + 1.0, *r]);
        }
        plot.add(&format!("dt {}", fine.dt), refined.residuals.iter().enumerate().map(|(i, r)| (i as f64 + 1.0, *r)).collect());
    }
    report.tables.extend([frames, residuals]);
    report.plots.push(plot);
    Ok(RunOutput { report, snapshots: vec![("u_classical".into(), Snapshot::Slab(base.classical))] })
}
