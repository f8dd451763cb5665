//! One-shot commands: sampling, constants, enhanced noise, single solves, inspection.

use std::path::Path;

use anyhow::{bail, Context, Result};

use paracalc::besov::{besov_norm, block_sup_norms, estimate_regularity};
use paracalc::noise::{load_archive, sample_white_noise, sigma_eps};
use paracalc::snapshot::{read_field, read_param_slab, read_slab};
use paracalc::solvers::{classical_residual, solve_classical, solve_paracontrolled};
use paracalc::{Field, TimeSlab};

use super::ladder::noise_data;
use crate::config::ExperimentConfig;
use crate::report::{Check, RunOutput, RunReport, Snapshot, Table};
use crate::svg::Plot;

fn block_table(name: &str, f: &Field) -> Table {
    let mut t = Table::new(name, &["j", "sup_norm"]);
    for (i, v) in block_sup_norms(f).into_iter().enumerate() {
        t.push(vec![i as f64 - 1.0, v]);
    }
    t
}

pub fn run_sample(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.solver.grid()?;
    let xi = sample_white_noise(grid, cfg.seed);
    let mut report = RunReport::new("sample", cfg);
    if let Ok(r) = estimate_regularity(&xi) {
        report.check(Check::info("fitted regularity", r.alpha));
    }
    // E ||xi||_L2^2 = (2 pi)^2 per resolved mode
    let l2 = xi.l2_norm_sq();
    let modes = (grid.resolved_modes() - 1) as f64;
    report.check(Check::info("L2 energy per resolved mode", l2 / (modes * (2.0 * std::f64::consts::PI).powi(2))));
    report.tables.push(block_table("block_norms", &xi));
    Ok(RunOutput { report, snapshots: vec![("xi".into(), Snapshot::Field(xi))] })
}

pub fn run_sigma(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let grid = cfg.solver.grid()?;
    let m = cfg.noise.mollifier;
    let mut report = RunReport::new("sigma", cfg);
    let mut table = Table::new("sigma", &["eps", "sigma", "increment"]);
    let mut prev: Option<f64> = None;
    let mut pts = Vec::new();
    for eps in cfg.ladder.eps() {
        let s = sigma_eps(m, eps, grid)?;
        table.push(vec![eps, s, prev.map_or(f64::NAN, |p| s - p)]);
        pts.push((eps, s));
        prev = Some(s);
    }
    let s = sigma_eps(m, cfg.noise.eps, grid)?;
    report.check(Check::info("sigma at noise eps", s).note(format!("eps {}", cfg.noise.eps)));
    let mut plot = Plot::new("sigma", "sigma_eps", "eps", "sigma").log_log(true, false);
    plot.add("sigma", pts);
    report.tables.push(table);
    report.plots.push(plot);
    Ok(report.into())
}

pub fn run_enhance(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let data = noise_data(cfg, &cfg.solver, cfg.noise.eps)?;
    let alpha = cfg.solver.alpha;
    let mut report = RunReport::new("enhance", cfg);
    report.check(Check::info("sigma", data.sigma));
    let mut table = Table::new("enhanced_norms", &["eta", "theta_norm", "xi2_norm"]);
    for &e in data.eta().nodes() {
        let th = besov_norm(&data.theta.eval(e)?, alpha).norm;
        let x2 = besov_norm(&data.xi2.eval(e)?, 2.0 * alpha - 2.0).norm;
        table.push(vec![e, th, x2]);
    }
    report.tables.push(table);
    Ok(RunOutput { report, snapshots: vec![("enhanced".into(), Snapshot::Archive(Box::new(data)))] })
}

fn frame_table(u: &TimeSlab) -> Table {
    let mut t = Table::new("frames", &["t", "sup_norm", "mean"]);
    for (m, f) in u.frames().iter().enumerate() {
        t.push(vec![u.time(m), f.sup_norm(), f.mean()]);
    }
    t
}

pub fn run_solve_classical(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.diffusion_spec()?;
    let data = noise_data(cfg, &cfg.solver, cfg.noise.eps)?;
    let u0 = cfg.initial.field(cfg.solver.grid()?);
    let u = solve_classical(&cfg.solver, &spec, &data.xi_eps, data.sigma, &u0)?;
    let mut report = RunReport::new("solve-classical", cfg);
    report.check(Check::info("sup norm", u.sup_norm()));
    let res = classical_residual(&u, &spec, &data.xi_eps, data.sigma, cfg.solver.alpha)?;
    report.check(Check::info("equation residual", res));
    report.tables.push(frame_table(&u));
    Ok(RunOutput { report, snapshots: vec![("u".into(), Snapshot::Slab(u))] })
}

pub fn run_solve_paracontrolled(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let spec = cfg.diffusion_spec()?;
    let data = noise_data(cfg, &cfg.solver, cfg.noise.eps)?;
    let u0 = cfg.initial.field(cfg.solver.grid()?);
    let state = solve_paracontrolled(&cfg.solver, &data, &spec, &u0)?;
    let d = &state.diagnostics;
    let mut report = RunReport::new("solve-paracontrolled", cfg);
    report.check(Check::holds("picard converged", d.converged));
    report.check(Check::holds("picard residuals strictly decreasing", d.residuals.windows(2).all(|w| w[1] < w[0])));
    report.check(Check::info("horizon", d.horizon));
    let mut res = Table::new("picard_residuals", &["iteration", "residual", "damping"]);
    for (i, (r, w)) in d.residuals.iter().zip(&d.damping).enumerate() {
        res.push(vec![i as f64 + 1.0, *r, *w]);
    }
    report.tables.extend([frame_table(&state.u), res]);
    Ok(RunOutput { report, snapshots: vec![("u".into(), Snapshot::Slab(state.u))] })
}

fn describe_field(report: &mut RunReport, f: &Field) {
    report.check(Check::info("n", f.grid().n() as f64));
    report.check(Check::info("sup norm", f.sup_norm()));
    report.check(Check::info("mean", f.mean()));
    if let Ok(r) = estimate_regularity(f) {
        report.check(Check::info("fitted regularity", r.alpha));
    }
}

/// Reads an archive directory, a snapshot file or a report without modifying it.
pub fn run_inspect(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let Some(path) = cfg.input.as_deref() else {
        bail!("inspect needs `input` in the config (a snapshot, archive directory or report.json)");
    };
    let mut report = RunReport::new("inspect", cfg);
    inspect_path(path, &mut report).with_context(|| format!("inspecting {}", path.display()))?;
    Ok(report.into())
}

fn inspect_path(path: &Path, report: &mut RunReport) -> Result<()> {
    if path.is_dir() {
        if path.join("manifest.json").exists() {
            let a = load_archive(path)?;
            report.note(format!("enhanced-noise archive: eps {}, seed {}, mollifier {:?}", a.eps, a.seed, a.mollifier));
            report.check(Check::info("sigma", a.sigma));
            describe_field(report, &a.xi_eps);
            return Ok(());
        }
        if path.join("report.json").exists() {
            return inspect_path(&path.join("report.json"), report);
        }
        bail!("directory holds neither an archive nor a report");
    }
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let exp = v["experiment"].as_str().unwrap_or("?");
        let hash = v["config_hash"].as_str().unwrap_or("?");
        report.note(format!("report of {exp}, config {hash}, passed {}", v["passed"]));
        for c in v["checks"].as_array().into_iter().flatten() {
            report.note(format!("{}: {} (passed {})", c["name"].as_str().unwrap_or("?"), c["value"], c["passed"]));
        }
        return Ok(());
    }
    if let Ok(f) = read_field(path) {
        report.note("field snapshot");
        describe_field(report, &f);
    } else if let Ok(s) = read_slab(path) {
        report.note(format!("slab snapshot: {} frames, dt {}", s.len(), s.dt()));
        report.check(Check::info("horizon", s.horizon()));
        describe_field(report, s.last());
    } else {
        let p = read_param_slab(path)?;
        report.note(format!("parametric slab snapshot: {} nodes, {} frames", p.eta().len(), p.template().len()));
        describe_field(report, p.node(p.eta().len() - 1).last());
    }
    Ok(())
}
