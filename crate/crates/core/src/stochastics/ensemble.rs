use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::numerics::pairwise_sum;
use crate::stochastics::drift::DriftField;
use crate::stochastics::path::{PathSample, ReflectingDiffusion, TimeGrid, Walker};
use crate::stochastics::rng::SeedStream;

/// Monte Carlo settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl McParams {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        McParams { n_paths, dt, seed, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths must be at least 1"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }
}

/// Scalar Monte Carlo result; `stderr` is the sample standard deviation
/// divided by `√n_paths`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64], dt: f64, seed: u64) -> Self {
        let (mean, stderr) = mean_and_stderr(samples);
        McEstimate { mean, stderr, n_paths: samples.len(), dt, seed }
    }

    /// A deterministic value (zero standard error).
    pub fn exact(value: f64, n_paths: usize, dt: f64, seed: u64) -> Self {
        McEstimate { mean: value, stderr: 0.0, n_paths, dt, seed }
    }

    /// `√(se₁² + se₂²)` for independent-error comparisons.
    pub fn combined_stderr(&self, other: &McEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

/// Vector-valued Monte Carlo result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McVecEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl McVecEstimate {
    /// `samples[i]` holds the `i`-th component of every path.
    pub fn from_components(samples: &[Vec<f64>], n_paths: usize, dt: f64, seed: u64) -> Self {
        let (mean, stderr) = samples.iter().map(|s| mean_and_stderr(s)).unzip();
        McVecEstimate { mean, stderr, n_paths, dt, seed }
    }

    pub fn component(&self, i: usize) -> McEstimate {
        McEstimate { mean: self.mean[i], stderr: self.stderr[i], n_paths: self.n_paths, dt: self.dt, seed: self.seed }
    }

    pub fn norm(&self) -> f64 {
        self.mean.iter().map(|m| m * m).sum::<f64>().sqrt()
    }

    /// Standard error of the norm (delta method), used as an envelope margin.
    pub fn norm_stderr(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return self.stderr.iter().map(|s| s * s).sum::<f64>().sqrt();
        }
        self.mean.iter().zip(&self.stderr).map(|(m, s)| (m / n * s).powi(2)).sum::<f64>().sqrt()
    }
}

fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(samples) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = samples.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `f(0..n)` on `workers` threads (or the global pool) and returns the
/// results in index order; the first failing index wins deterministically.
pub fn par_map<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || -> Vec<Result<T>> { (0..n as u64).into_par_iter().map(&f).collect() };
    let results = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::Path { index: i as u64, source: Box::new(e) }))
        .collect()
}

/// A lazily simulated ensemble of independent paths started at `x0`.
#[derive(Debug, Clone, Copy)]
pub struct Ensemble<'a> {
    process: ReflectingDiffusion<'a>,
    x0: Point,
    grid: TimeGrid,
    params: McParams,
}

impl<'a> Ensemble<'a> {
    pub fn new(process: ReflectingDiffusion<'a>, x0: Point, t: f64, params: McParams) -> Result<Self> {
        params.validate()?;
        let grid = TimeGrid::new(t, params.dt)?;
        process.domain.dist_to_boundary(&x0)?;
        Ok(Ensemble { process, x0, grid, params })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn params(&self) -> McParams {
        self.params
    }

    pub fn process(&self) -> ReflectingDiffusion<'a> {
        self.process
    }

    pub fn seeds(&self) -> SeedStream {
        SeedStream::new(self.params.seed)
    }

    pub fn walker(&self, index: u64) -> Result<Walker<'a>> {
        self.process.walker(&self.x0, self.grid, &self.seeds(), index)
    }

    pub fn path(&self, index: u64) -> Result<PathSample> {
        PathSample::record(&mut self.walker(index)?)
    }

    /// Applies `f` to a fresh walker of every path.
    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(Walker<'a>) -> Result<T> + Sync + Send,
    {
        par_map(self.params.n_paths, self.params.workers, |i| f(self.walker(i)?))
    }

    pub fn local_times(&self) -> Result<Vec<f64>> {
        self.map(|mut w| {
            w.run_to_end()?;
            Ok(w.local_time())
        })
    }

    /// Scalar estimate of `E[g(path)]`.
    pub fn estimate<F>(&self, f: F) -> Result<McEstimate>
    where
        F: Fn(Walker<'a>) -> Result<f64> + Sync + Send,
    {
        let samples = self.map(f)?;
        Ok(McEstimate::from_samples(&samples, self.grid.dt, self.params.seed))
    }
}

/// Ensemble of `n_paths` reflecting paths on `[0, t]` from `x0`.
pub fn simulate_ensemble<'a>(
    domain: &'a DomainModel,
    drift: &'a DriftField,
    x0: Point,
    t: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Ensemble<'a>> {
    let process = ReflectingDiffusion::new(domain, drift)?;
    Ensemble::new(process, x0, t, McParams::new(n_paths, dt, seed))
}
