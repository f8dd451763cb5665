//! Declarative experiment configuration (JSON or TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use paracalc::coeff::{DiffusionKind, DiffusionSpec};
use paracalc::noise::Mollifier;
use paracalc::solvers::SolverConfig;
use paracalc::{EtaGrid, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Sigma,
    Enhance,
    SolveClassical,
    SolveParacontrolled,
    Converge,
    Crossval,
    Wick,
    Norms,
    Inspect,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Sigma => "sigma",
            ExperimentKind::Enhance => "enhance",
            ExperimentKind::SolveClassical => "solve-classical",
            ExperimentKind::SolveParacontrolled => "solve-paracontrolled",
            ExperimentKind::Converge => "converge",
            ExperimentKind::Crossval => "crossval",
            ExperimentKind::Wick => "wick",
            ExperimentKind::Norms => "norms",
            ExperimentKind::Inspect => "inspect",
        }
    }
}

/// Initial datum u0 on the solver grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Zero,
    Constant { value: f64 },
    /// amplitude * sin(x1) cos(x2)
    SinCos { amplitude: f64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::SinCos { amplitude: 0.3 }
    }
}

impl InitialCondition {
    pub fn field(&self, grid: Grid) -> Field {
        match *self {
            InitialCondition::Zero => Field::zeros(grid),
            InitialCondition::Constant { value } => Field::constant(grid, value),
            InitialCondition::SinCos { amplitude } => Field::from_fn(grid, |x, y| amplitude * x.sin() * y.cos()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSettings {
    pub eps: f64,
    pub mollifier: Mollifier,
    /// Replace the noise by zero (smooth sanity runs).
    pub zero: bool,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        NoiseSettings { eps: 0.25, mollifier: Mollifier::Gaussian, zero: false }
    }
}

/// eps_k = eps0 2^-k for k < levels, all driven by one noise sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSettings {
    pub eps0: f64,
    pub levels: usize,
    /// Use sigma_eps counterterms on the main ladder.
    pub renormalize: bool,
    /// Also run the ladder with sigma = 0 and check its divergence.
    pub compare_unrenormalized: bool,
}

impl Default for LadderSettings {
    fn default() -> Self {
        LadderSettings { eps0: 0.25, levels: 4, renormalize: true, compare_unrenormalized: true }
    }
}

impl LadderSettings {
    pub fn eps(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.eps0 / 2f64.powi(k as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossvalSettings {
    /// Pass bound on sup_t ||u_classical - u_paracontrolled||_inf / sup_t ||u_classical||_inf.
    pub tolerance: f64,
    /// Repeat with dt/2 and Picard tolerance/10 and require a smaller distance.
    pub refine: bool,
    /// Added to sigma in the classical solver only (deliberate mismatch).
    pub sigma_offset: f64,
}

impl Default for CrossvalSettings {
    fn default() -> Self {
        CrossvalSettings { tolerance: 2e-2, refine: true, sigma_offset: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WickSettings {
    pub n: usize,
    pub samples: usize,
    pub eps: f64,
    pub etas: Vec<f64>,
    /// Check the rank-one parametric noise identities as well.
    pub parametric: bool,
    /// Grid and starting eps for the sigma increment check.
    pub ladder_n: usize,
    pub ladder_eps0: f64,
    pub ladder_halvings: usize,
}

impl Default for WickSettings {
    fn default() -> Self {
        WickSettings {
            n: 128,
            samples: 200,
            eps: 0.125,
            etas: vec![1.0, 0.5],
            parametric: true,
            ladder_n: 512,
            ladder_eps0: 0.125,
            ladder_halvings: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormSettings {
    pub n: usize,
    pub seeds: usize,
    /// Regularity of the rough test fields.
    pub alpha: f64,
}

impl Default for NormSettings {
    fn default() -> Self {
        NormSettings { n: 128, seeds: 20, alpha: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// When set, must match the subcommand that runs the file.
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub diffusion: DiffusionKind,
    pub initial: InitialCondition,
    pub solver: SolverConfig,
    pub noise: NoiseSettings,
    pub ladder: LadderSettings,
    pub crossval: CrossvalSettings,
    pub wick: WickSettings,
    pub norms: NormSettings,
    /// Snapshot file or archive directory read by `inspect`.
    pub input: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            seed: 7,
            output_dir: PathBuf::from("runs"),
            diffusion: DiffusionKind::Sine,
            initial: InitialCondition::default(),
            solver: SolverConfig::default(),
            noise: NoiseSettings::default(),
            ladder: LadderSettings::default(),
            crossval: CrossvalSettings::default(),
            wick: WickSettings::default(),
            norms: NormSettings::default(),
            input: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses JSON or TOML, chosen by file extension (TOML unless `.json`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        Ok(if json { serde_json::from_str(text)? } else { toml::from_str(text)? })
    }

    pub fn diffusion_spec(&self) -> Result<DiffusionSpec> {
        Ok(DiffusionSpec::from_kind(&self.diffusion)?)
    }

    /// Schema checks run before any computation.
    pub fn validate(&self) -> Result<()> {
        let spec = self.diffusion_spec()?;
        self.solver.validate(&spec)?;
        positive("noise.eps", self.noise.eps)?;
        positive("ladder.eps0", self.ladder.eps0)?;
        if self.ladder.levels == 0 {
            bail!("ladder.levels must be at least 1");
        }
        positive("crossval.tolerance", self.crossval.tolerance)?;
        if !self.crossval.sigma_offset.is_finite() {
            bail!("crossval.sigma_offset must be finite");
        }
        Grid::new(self.wick.n)?;
        Grid::new(self.wick.ladder_n)?;
        positive("wick.eps", self.wick.eps)?;
        positive("wick.ladder_eps0", self.wick.ladder_eps0)?;
        if self.wick.samples < 2 {
            bail!("wick.samples must be at least 2");
        }
        let eta = EtaGrid::new(self.solver.lambda, self.solver.eta_nodes)?;
        for &e in &self.wick.etas {
            eta.check(e)?;
        }
        Grid::new(self.norms.n)?;
        if self.norms.seeds == 0 {
            bail!("norms.seeds must be at least 1");
        }
        if !(self.norms.alpha > 0.0 && self.norms.alpha < 1.0) {
            bail!("norms.alpha must lie in (0, 1)");
        }
        let u0 = self.initial.field(self.solver.grid()?);
        let (lo, hi) = (spec.a_of(&u0).min(), spec.a_of(&u0).max());
        if lo < spec.lambda() - 1e-12 || hi > spec.upper() + 1e-12 {
            bail!("a(u0) leaves [{}, {}]", spec.lambda(), spec.upper());
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON encoding of the resolved config.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
