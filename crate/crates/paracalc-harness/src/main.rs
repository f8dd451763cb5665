use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use paracalc_harness::threads::init_global_pool;
use paracalc_harness::{run, ExperimentConfig, ExperimentKind};

#[derive(Parser, Debug)]
#[command(name = "paracalc", version, about = "Paracontrolled calculus experiments on the 2-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (TOML, or JSON by extension). Defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override the output root directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Only print the report directory.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a white-noise sample.
    Sample(Common),
    /// Tabulate the renormalization constants along the eps ladder.
    Sigma(Common),
    /// Build and archive the enhanced noise.
    Enhance(Common),
    /// Run the classical solver.
    SolveClassical(Common),
    /// Run the paracontrolled fixed-point solver.
    SolveParacontrolled(Common),
    /// Eps-ladder convergence with and without counterterms.
    Converge(Common),
    /// Cross-check the two solvers.
    Crossval(Common),
    /// Monte-Carlo checks of the renormalization constants.
    Wick(Common),
    /// Scaling-exponent regressions.
    Norms(Common),
    /// Summarize a snapshot, archive or report.
    Inspect(Common),
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Common) {
        match self {
            Command::Sample(c) => (ExperimentKind::Sample, c),
            Command::Sigma(c) => (ExperimentKind::Sigma, c),
            Command::Enhance(c) => (ExperimentKind::Enhance, c),
            Command::SolveClassical(c) => (ExperimentKind::SolveClassical, c),
            Command::SolveParacontrolled(c) => (ExperimentKind::SolveParacontrolled, c),
            Command::Converge(c) => (ExperimentKind::Converge, c),
            Command::Crossval(c) => (ExperimentKind::Crossval, c),
            Command::Wick(c) => (ExperimentKind::Wick, c),
            Command::Norms(c) => (ExperimentKind::Norms, c),
            Command::Inspect(c) => (ExperimentKind::Inspect, c),
        }
    }
}

/// Exit status: 0 pass or no verdict, 2 failed check, 1 error.
fn execute(cli: Cli) -> Result<u8> {
    init_global_pool()?;
    let (kind, common) = cli.command.split();
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    let out = run(kind, &cfg)?;
    let dir = out.write(&cfg.output_dir)?;
    if !common.quiet {
        print!("{}", out.report.summary());
        for t in out.report.tables.iter().filter(|t| t.rows.len() <= 24) {
            println!("\n{}", t.name);
            print!("{}", t.to_csv(&format!("config_hash={}", out.report.config_hash)));
        }
    }
    println!("{}", dir.display());
    Ok(if out.report.failed() { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("usage: paracalc <COMMAND> [--config PATH] [--seed N] [--out DIR] [--quiet]");
            ExitCode::from(1)
        }
    }
}
