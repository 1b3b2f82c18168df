//! Experiment runner behind the `robin-semigroup` binary: JSON configs in,
//! CSV tables and a JSON summary out.
//!
//! Exit codes: 0 success, 2 configuration or input problems, 3 numerical
//! failures, 4 a checked inequality missed its error budget.

mod config;
mod experiments;
mod observable;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use config::{config_schema, DriftSpec, ExperimentConfig, ExperimentSpec, HwiSpec, McBlock, ObservableSpec, PdeBlock};
pub use experiments::{execute, halfline_local_time_mean, Check, Estimate, RunOutput, EXPERIMENTS};
pub use observable::{robin_eigenvalues, Profile};
pub use output::{
    collect_report, report_csv, write_run, CheckSummary, ReportRow, RunSummary, ESTIMATES_FILE, ESTIMATES_HEADER,
    INEQUALITIES_FILE, INEQUALITIES_HEADER, SUMMARY_FILE,
};

use crate::error::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ROBIN_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "robin-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "robin-semigroup", version, about = "Monte Carlo and PDE experiments for Robin heat semigroups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or more experiment configs; each writes into `<out>/<config stem>/`.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory (default: config `output_dir`, then $ROBIN_OUT_DIR, then ./robin-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for path simulation; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize every run found in a directory.
    Report { dir: PathBuf },
    /// List the available experiments.
    List,
    /// Print the JSON schema of experiment configs.
    Schema,
}

fn out_dir(cli_out: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    cli_out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn run_one(path: &Path, cli_out: Option<&Path>, workers: Option<usize>) -> Result<(PathBuf, RunSummary), Error> {
    let cfg = ExperimentConfig::load(path)?;
    let output = execute(&cfg, workers)?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let dir = out_dir(cli_out, &cfg).join(stem);
    let summary = write_run(&dir, &cfg, &output)?;
    Ok((dir, summary))
}

/// Runs configs concurrently, then reports them in argument order.
pub fn run_configs(configs: &[PathBuf], out: Option<&Path>, workers: Option<usize>) -> i32 {
    if workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return EXIT_CONFIG;
    }
    let results: Vec<_> = configs.par_iter().map(|p| run_one(p, out, workers)).collect();
    let mut code = EXIT_OK;
    let stdout = std::io::stdout();
    let mut so = stdout.lock();
    for (path, result) in configs.iter().zip(results) {
        match result {
            Ok((dir, summary)) => {
                let _ = writeln!(so, "{}: {} -> {}", path.display(), summary.experiment, dir.display());
                for c in &summary.checks {
                    let status = if c.passed { "pass" } else { "FAIL" };
                    let _ = writeln!(so, "  [{status}] {}: slack {:.6e}, budget {:.3e}", c.inequality_id, c.slack, c.error_budget);
                }
                for c in summary.failures() {
                    eprintln!(
                        "violation in {}: {},{},{},{},{},{}",
                        path.display(),
                        c.inequality_id,
                        summary.params_hash,
                        c.lhs,
                        c.rhs,
                        c.slack,
                        c.error_budget
                    );
                    code = code.max(EXIT_VIOLATION);
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    code
}

pub fn report(dir: &Path) -> i32 {
    match collect_report(dir).and_then(|rows| Ok((report_csv(&rows)?, rows))) {
        Ok((text, rows)) => {
            print!("{text}");
            if rows.iter().any(|r| r.status != "pass") {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { configs, out, workers } => run_configs(&configs, out.as_deref(), workers),
        Command::Report { dir } => report(&dir),
        Command::List => {
            for (name, what) in EXPERIMENTS {
                println!("{name:<22} {what}");
            }
            EXIT_OK
        }
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&config_schema()).expect("schema serializes"));
            EXIT_OK
        }
    }
}
