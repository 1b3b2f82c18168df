use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::config::ExperimentConfig;
use crate::cli::experiments::{Check, RunOutput};
use crate::error::{Error, Result};

pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const INEQUALITIES_FILE: &str = "inequalities.csv";
pub const SUMMARY_FILE: &str = "summary.json";

pub const ESTIMATES_HEADER: [&str; 10] = ["estimator", "domain", "params_hash", "x", "t", "mean", "stderr", "n", "dt", "seed"];
pub const INEQUALITIES_HEADER: [&str; 6] = ["inequality_id", "params_hash", "lhs", "rhs", "slack", "error_budget"];

#[derive(Debug, Serialize)]
struct EstimateRecord<'a> {
    estimator: &'a str,
    domain: &'a str,
    params_hash: &'a str,
    x: Option<f64>,
    t: Option<f64>,
    mean: f64,
    stderr: f64,
    n: usize,
    dt: f64,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct InequalityRecord<'a> {
    inequality_id: &'a str,
    params_hash: &'a str,
    lhs: f64,
    rhs: f64,
    slack: f64,
    error_budget: f64,
}

/// Per-check entry of a run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub inequality_id: String,
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub error_budget: f64,
    pub passed: bool,
}

/// `summary.json`: resolved config, its hash, the seed and every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub params_hash: String,
    pub seed: Option<u64>,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckSummary>,
    pub passed: bool,
}

impl RunSummary {
    pub fn new(cfg: &ExperimentConfig, checks: &[Check]) -> Self {
        let checks: Vec<CheckSummary> = checks
            .iter()
            .map(|c| CheckSummary {
                inequality_id: c.inequality_id.clone(),
                claim: c.claim.clone(),
                lhs: c.lhs,
                rhs: c.rhs,
                slack: c.slack(),
                error_budget: c.error_budget,
                passed: c.passed(),
            })
            .collect();
        RunSummary {
            experiment: cfg.experiment.name().into(),
            params_hash: cfg.params_hash(),
            seed: cfg.seed(),
            config: cfg.canonical(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckSummary> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Writer that leaves the header to the caller, so empty tables still
/// carry the fixed header.
fn headerless(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)
}

/// Writes the two CSVs and the summary into `dir` (created if needed).
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, output: &RunOutput) -> Result<RunSummary> {
    for c in &output.checks {
        if !(c.lhs.is_finite() && c.rhs.is_finite() && c.error_budget.is_finite()) {
            return Err(Error::NonFinite(format!("check {}: lhs {}, rhs {}", c.inequality_id, c.lhs, c.rhs)));
        }
    }
    fs::create_dir_all(dir)?;
    let hash = cfg.params_hash();
    let seed = cfg.seed();

    let mut w = headerless(&dir.join(ESTIMATES_FILE))?;
    w.write_record(ESTIMATES_HEADER).map_err(csv_err)?;
    for e in &output.estimates {
        w.serialize(EstimateRecord {
            estimator: &e.estimator,
            domain: cfg.domain.name(),
            params_hash: &hash,
            x: e.x,
            t: e.t,
            mean: e.mean,
            stderr: e.stderr,
            n: e.n,
            dt: e.dt,
            seed,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = headerless(&dir.join(INEQUALITIES_FILE))?;
    w.write_record(INEQUALITIES_HEADER).map_err(csv_err)?;
    for c in &output.checks {
        w.serialize(InequalityRecord {
            inequality_id: &c.inequality_id,
            params_hash: &hash,
            lhs: c.lhs,
            rhs: c.rhs,
            slack: c.slack(),
            error_budget: c.error_budget,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;

    let summary = RunSummary::new(cfg, &output.checks);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(SUMMARY_FILE), json + "\n")?;
    Ok(summary)
}

/// One line of the consolidated report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub run: String,
    pub experiment: String,
    pub inequality_id: String,
    pub claim: String,
    pub status: &'static str,
    pub margin: f64,
    pub params_hash: String,
    pub seed: Option<u64>,
}

fn is_run_dir(dir: &Path) -> bool {
    [ESTIMATES_FILE, INEQUALITIES_FILE, SUMMARY_FILE].iter().any(|f| dir.join(f).exists())
}

fn load_summary(dir: &Path) -> Result<RunSummary> {
    for f in [ESTIMATES_FILE, INEQUALITIES_FILE, SUMMARY_FILE] {
        if !dir.join(f).is_file() {
            return Err(Error::Io(format!("{}: missing {f}", dir.display())));
        }
    }
    let text = fs::read_to_string(dir.join(SUMMARY_FILE))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: corrupt {SUMMARY_FILE}: {e}", dir.display())))
}

/// Collects every run below `root` (the directory itself and its immediate
/// subdirectories, in name order) into report rows.
pub fn collect_report(root: &Path) -> Result<Vec<ReportRow>> {
    if !root.is_dir() {
        return Err(Error::Io(format!("{} is not a directory", root.display())));
    }
    let mut dirs: Vec<PathBuf> = Vec::new();
    if is_run_dir(root) {
        dirs.push(root.to_path_buf());
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && is_run_dir(p))
        .collect();
    subdirs.sort();
    dirs.extend(subdirs);
    let mut rows = Vec::new();
    for dir in dirs {
        let s = load_summary(&dir)?;
        let run = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        for c in &s.checks {
            rows.push(ReportRow {
                run: run.clone(),
                experiment: s.experiment.clone(),
                inequality_id: c.inequality_id.clone(),
                claim: c.claim.clone(),
                status: if c.passed { "pass" } else { "FAIL" },
                margin: c.slack + c.error_budget,
                params_hash: s.params_hash.clone(),
                seed: s.seed,
            });
        }
    }
    Ok(rows)
}

/// Report rows as CSV text (header only when empty).
pub fn report_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(["run", "experiment", "inequality_id", "claim", "status", "margin", "params_hash", "seed"])
        .map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
