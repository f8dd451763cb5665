//! Experiment runners. Each returns a report plus optional snapshots and never
//! writes to disk itself.

mod ladder;
mod norms;
mod single;
mod wick;

use anyhow::{bail, Result};

pub use ladder::{run_convergence, run_crossval};
pub use norms::run_norm_suite;
pub use single::{run_enhance, run_inspect, run_sample, run_sigma, run_solve_classical, run_solve_paracontrolled};
pub use wick::{run_wick, MIN_RELIABLE_SAMPLES};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::report::RunOutput;

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the mean.
pub(crate) fn stderr(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Validates the config and dispatches to the runner for `kind`.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunOutput> {
    if let Some(k) = cfg.kind {
        if k != kind {
            bail!("config declares experiment `{}` but `{}` was requested", k.name(), kind.name());
        }
    }
    cfg.validate()?;
    match kind {
        ExperimentKind::Sample => run_sample(cfg),
        ExperimentKind::Sigma => run_sigma(cfg),
        ExperimentKind::Enhance => run_enhance(cfg),
        ExperimentKind::SolveClassical => run_solve_classical(cfg),
        ExperimentKind::SolveParacontrolled => run_solve_paracontrolled(cfg),
        ExperimentKind::Converge => run_convergence(cfg),
        ExperimentKind::Crossval => run_crossval(cfg),
        ExperimentKind::Wick => run_wick(cfg),
        ExperimentKind::Norms => run_norm_suite(cfg),
        ExperimentKind::Inspect => run_inspect(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(stderr(&[2.0, 2.0, 2.0]), 0.0);
        assert!(stderr(&[1.0]).is_nan());
        assert!((mean(&[1.0, 2.0, 3.0]) - 2.0).abs() < 1e-15);
    }
}
