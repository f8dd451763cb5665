//! Run reports: checks with their thresholds, CSV tables, SVG plots and snapshots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use paracalc::noise::{save_archive, EnhancedNoise};
use paracalc::snapshot::{write_field, write_slab};
use paracalc::{Field, TimeSlab};

use crate::config::ExperimentConfig;
use crate::svg::{render, Plot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// |value - target| <= tolerance
    Within,
    /// value <= target
    AtMost,
    /// value >= target
    AtLeast,
    /// Boolean property; value is 1 or 0.
    Holds,
    /// Reported only.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub target: f64,
    pub tolerance: f64,
    /// None when the check is informational or flagged unreliable.
    pub passed: Option<bool>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    fn make(name: &str, value: f64, relation: Relation, target: f64, tolerance: f64, passed: Option<bool>) -> Check {
        Check { name: name.into(), value, relation, target, tolerance, passed, note: String::new() }
    }

    pub fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Check {
        let ok = (value - target).abs() <= tolerance;
        Check::make(name, value, Relation::Within, target, tolerance, Some(ok))
    }

    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check::make(name, value, Relation::AtMost, bound, 0.0, Some(value <= bound))
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check::make(name, value, Relation::AtLeast, bound, 0.0, Some(value >= bound))
    }

    pub fn holds(name: &str, ok: bool) -> Check {
        Check::make(name, if ok { 1.0 } else { 0.0 }, Relation::Holds, 1.0, 0.0, Some(ok))
    }

    pub fn info(name: &str, value: f64) -> Check {
        Check::make(name, value, Relation::Info, 0.0, 0.0, None)
    }

    pub fn note(mut self, note: impl Into<String>) -> Check {
        self.note = note.into();
        self
    }

    /// Keeps the value and thresholds but withdraws the verdict.
    pub fn unjudged(mut self, why: &str) -> Check {
        self.passed = None;
        self.note = why.into();
        self
    }

    pub fn describe(&self) -> String {
        let verdict = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "----",
        };
        let rule = match self.relation {
            Relation::Within => format!("target {:.4} +- {:.4}", self.target, self.tolerance),
            Relation::AtMost => format!("<= {:.4e}", self.target),
            Relation::AtLeast => format!(">= {:.4e}", self.target),
            Relation::Holds | Relation::Info => String::new(),
        };
        let mut s = format!("[{verdict}] {}: {:.6e} {rule}", self.name, self.value);
        if !self.note.is_empty() {
            let _ = write!(s, " ({})", self.note);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self, provenance: &str) -> String {
        let mut s = format!("# {provenance}\n{}\n", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Binary payloads written next to the report.
#[derive(Clone, Debug)]
pub enum Snapshot {
    Field(Field),
    Slab(TimeSlab),
    Archive(Box<EnhancedNoise>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub passed: Option<bool>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub plots: Vec<Plot>,
    pub config: ExperimentConfig,
}

impl RunReport {
    pub fn new(experiment: &str, cfg: &ExperimentConfig) -> RunReport {
        RunReport {
            experiment: experiment.into(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            passed: None,
            checks: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            plots: Vec::new(),
            config: cfg.clone(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
        self.passed = self.verdict();
    }

    fn verdict(&self) -> Option<bool> {
        let judged: Vec<bool> = self.checks.iter().filter_map(|c| c.passed).collect();
        if judged.is_empty() {
            None
        } else {
            Some(judged.iter().all(|&b| b))
        }
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} (config {}, seed {})\n", self.experiment, &self.config_hash[..12], self.seed);
        for c in &self.checks {
            s.push_str(&c.describe());
            s.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let verdict = match self.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "NO VERDICT",
        };
        let _ = writeln!(s, "overall: {verdict}");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A finished run: the report plus any binary payloads.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub snapshots: Vec<(String, Snapshot)>,
}

impl From<RunReport> for RunOutput {
    fn from(report: RunReport) -> Self {
        RunOutput { report, snapshots: Vec::new() }
    }
}

/// Creates `<root>/<experiment>-<timestamp>-<hash8>`, never reusing a directory.
pub fn fresh_dir(root: &Path, experiment: &str, hash: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let base = format!("{experiment}-{stamp}-{}", &hash[..8]);
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = root.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
    unreachable!()
}

impl RunOutput {
    /// Writes report.json, config.json, one CSV per table, one SVG per plot and
    /// the snapshots into a fresh directory under `root`. Returns that directory.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let r = &self.report;
        let dir = fresh_dir(root, &r.experiment, &r.config_hash)?;
        std::fs::write(dir.join("report.json"), r.to_json())?;
        std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&r.config)?)?;
        let provenance = format!("experiment={} config_hash={} seed={}", r.experiment, r.config_hash, r.seed);
        for t in &r.tables {
            std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv(&provenance))?;
        }
        for p in &r.plots {
            std::fs::write(dir.join(format!("{}.svg", p.name)), render(p))?;
        }
        for (name, snap) in &self.snapshots {
            match snap {
                Snapshot::Field(f) => write_field(dir.join(format!("{name}.bin")), f)?,
                Snapshot::Slab(s) => write_slab(dir.join(format!("{name}.bin")), s)?,
                Snapshot::Archive(a) => save_archive(a, dir.join(name))?,
            }
        }
        Ok(dir)
    }
}
