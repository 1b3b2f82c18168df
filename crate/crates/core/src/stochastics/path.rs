use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::stochastics::drift::DriftField;
use crate::stochastics::rng::{PathStream, SeedStream};

/// How the free Euler step is pulled back into the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReflectionScheme {
    /// Nearest-point projection, local-time increment = penetration depth.
    #[default]
    Projection,
    /// Exact per-step Skorokhod map of the 1D problem, written through the
    /// running minimum of the free path. One-dimensional domains only.
    Skorokhod,
}

/// Maximum Brownian-bridge bisection depth when a projection is ambiguous.
const MAX_REFINE_DEPTH: u32 = 4;

/// The reflecting diffusion `dX = √2 dB + Z(X) dt + N(X) dl` on a model domain.
#[derive(Debug, Clone, Copy)]
pub struct ReflectingDiffusion<'a> {
    pub domain: &'a DomainModel,
    pub drift: &'a DriftField,
    pub scheme: ReflectionScheme,
}

impl<'a> ReflectingDiffusion<'a> {
    pub fn new(domain: &'a DomainModel, drift: &'a DriftField) -> Result<Self> {
        domain.validate()?;
        if drift.dim() != domain.dim() {
            return Err(Error::invalid(format!(
                "drift dimension {} does not match domain dimension {}",
                drift.dim(),
                domain.dim()
            )));
        }
        Ok(ReflectingDiffusion { domain, drift, scheme: ReflectionScheme::Projection })
    }

    pub fn with_scheme(mut self, scheme: ReflectionScheme) -> Result<Self> {
        if scheme == ReflectionScheme::Skorokhod && self.domain.dim() != 1 {
            return Err(Error::invalid("the exact Skorokhod map is only available in one dimension"));
        }
        self.scheme = scheme;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn walker(&self, x0: &Point, grid: TimeGrid, seeds: &SeedStream, index: u64) -> Result<Walker<'a>> {
        let mut x = *x0;
        for i in self.dim()..3 {
            x[i] = 0.0;
        }
        self.domain.dist_to_boundary(&x)?;
        let (x, _) = self.domain.project_with_penetration(&x)?;
        Ok(Walker {
            process: *self,
            grid,
            seeds: *seeds,
            stream: seeds.path(index, self.dim()),
            refine: None,
            x,
            l: 0.0,
            free: x[0],
            k: 0,
        })
    }
}

/// Uniform time grid `0 = t_0 < … < t_n = t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub n_steps: usize,
    pub dt: f64,
}

impl TimeGrid {
    /// Grid with step at most `dt` that lands exactly on `t`.
    pub fn new(t: f64, dt: f64) -> Result<Self> {
        if !(t.is_finite() && dt.is_finite()) {
            return Err(Error::NonFinite(format!("t = {t}, dt = {dt}")));
        }
        if dt <= 0.0 {
            return Err(Error::invalid(format!("step size must be positive, got {dt}")));
        }
        if t <= 0.0 || dt > t * (1.0 + 1e-12) {
            return Err(Error::invalid(format!("need 0 < dt <= t, got dt = {dt}, t = {t}")));
        }
        let ratio = t / dt;
        let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio { ratio.round() } else { ratio.ceil() };
        let n = n.max(1.0) as usize;
        Ok(TimeGrid { n_steps: n, dt: t / n as f64 })
    }

    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Step index of time `t`, which must be a grid node.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let k = x.round();
        if (x - k).abs() > 1e-6 || k < 0.0 || k as usize > self.n_steps {
            return Err(Error::invalid(format!("time {t} is not a node of the grid with dt = {}", self.dt)));
        }
        Ok(k as usize)
    }
}

/// One transition `t_k → t_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: Point,
    pub x_end: Point,
    /// Brownian increment `B_{t_{k+1}} - B_{t_k}`.
    pub db: Point,
    /// Local-time increment; positive only on contact steps.
    pub dl: f64,
    pub contact: bool,
}

/// Streaming simulation of one path; the whole trajectory is a pure function
/// of `(seed, path index)`.
#[derive(Debug, Clone)]
pub struct Walker<'a> {
    process: ReflectingDiffusion<'a>,
    grid: TimeGrid,
    seeds: SeedStream,
    stream: PathStream,
    refine: Option<PathStream>,
    x: Point,
    l: f64,
    free: f64,
    k: usize,
}

impl Walker<'_> {
    pub fn state(&self) -> Point {
        self.x
    }

    pub fn local_time(&self) -> f64 {
        self.l
    }

    pub fn steps_taken(&self) -> usize {
        self.k
    }

    pub fn time(&self) -> f64 {
        self.grid.time(self.k)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn index(&self) -> u64 {
        self.stream.index()
    }

    pub fn is_done(&self) -> bool {
        self.k >= self.grid.n_steps
    }

    pub fn step(&mut self) -> Result<Step> {
        if self.is_done() {
            return Err(Error::Precondition("walker has reached the end of its time grid".into()));
        }
        let dim = self.process.dim();
        let dt = self.grid.dt;
        let mut z = [0.0; 3];
        self.stream.normals(self.k as u64, 0, &mut z[..dim]);
        let sdt = dt.sqrt();
        let db = Point::new(z[0] * sdt, z[1] * sdt, z[2] * sdt);
        let x_start = self.x;

        let (x_end, dl) = match self.process.scheme {
            ReflectionScheme::Skorokhod if *self.process.domain == DomainModel::HalfLine => {
                let zx = self.drift_at(&x_start)?;
                self.free += std::f64::consts::SQRT_2 * db[0] + zx[0] * dt;
                let l_new = self.l.max(-self.free);
                let dl = l_new - self.l;
                (Point::new(self.free + l_new, 0.0, 0.0), dl)
            }
            _ => {
                let mut slot = 1;
                self.advance(&x_start, &db, dt, 0, &mut slot)?
            }
        };
        let step = Step {
            k: self.k,
            t_start: self.grid.time(self.k),
            t_end: self.grid.time(self.k + 1),
            x_start,
            x_end,
            db,
            dl,
            contact: dl > 0.0,
        };
        self.x = x_end;
        self.l += dl;
        self.k += 1;
        Ok(step)
    }

    pub fn run_to_end(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    fn drift_at(&self, x: &Point) -> Result<Point> {
        let z = self.process.drift.grad(x);
        if z.iter().all(|v| v.is_finite()) {
            Ok(z)
        } else {
            Err(Error::NonFinite(format!("drift at {:?}", x.as_slice())))
        }
    }

    /// Free Euler step followed by projection. An ambiguous projection is
    /// resolved by splitting the step at a Brownian-bridge midpoint drawn
    /// from the refinement stream.
    fn advance(&mut self, x: &Point, db: &Point, dt: f64, depth: u32, slot: &mut u64) -> Result<(Point, f64)> {
        let y = x + db * std::f64::consts::SQRT_2 + self.drift_at(x)? * dt;
        match self.process.domain.project_with_penetration(&y) {
            Err(Error::DegenerateProjection { .. }) if depth < MAX_REFINE_DEPTH => {
                let dim = self.process.dim();
                let idx = self.stream.index();
                let seeds = self.seeds;
                let refine = self.refine.get_or_insert_with(|| seeds.refinement(idx, dim));
                let mut z = [0.0; 3];
                refine.normals(self.k as u64, *slot, &mut z[..dim]);
                *slot += 1;
                let half = db * 0.5 + Point::new(z[0], z[1], z[2]) * (0.5 * dt.sqrt());
                let rest = db - half;
                let (xm, dl1) = self.advance(x, &half, 0.5 * dt, depth + 1, slot)?;
                let (xe, dl2) = self.advance(&xm, &rest, 0.5 * dt, depth + 1, slot)?;
                Ok((xe, dl1 + dl2))
            }
            other => other,
        }
    }
}

/// A fully stored trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub local_time: Vec<f64>,
    pub brownian_increments: Vec<Point>,
    pub contact_flags: Vec<bool>,
}

impl PathSample {
    pub fn record(walker: &mut Walker<'_>) -> Result<Self> {
        let n = walker.grid().n_steps - walker.steps_taken();
        let mut p = PathSample {
            dt: walker.grid().dt,
            times: Vec::with_capacity(n + 1),
            states: Vec::with_capacity(n + 1),
            local_time: Vec::with_capacity(n + 1),
            brownian_increments: Vec::with_capacity(n),
            contact_flags: Vec::with_capacity(n),
        };
        p.times.push(walker.time());
        p.states.push(walker.state());
        p.local_time.push(walker.local_time());
        while !walker.is_done() {
            let s = walker.step()?;
            p.times.push(s.t_end);
            p.states.push(s.x_end);
            p.local_time.push(walker.local_time());
            p.brownian_increments.push(s.db);
            p.contact_flags.push(s.contact);
        }
        Ok(p)
    }

    pub fn n_steps(&self) -> usize {
        self.brownian_increments.len()
    }

    /// Rebuilds the step records (`dl` from the local-time differences).
    pub fn steps(&self) -> impl Iterator<Item = Step> + '_ {
        (0..self.n_steps()).map(move |k| Step {
            k,
            t_start: self.times[k],
            t_end: self.times[k + 1],
            x_start: self.states[k],
            x_end: self.states[k + 1],
            db: self.brownian_increments[k],
            dl: self.local_time[k + 1] - self.local_time[k],
            contact: self.contact_flags[k],
        })
    }

    /// Appends rows `path_id,k,t_k,x_1..x_d,l,contact`; `contact` flags the
    /// step that ended at `t_k`.
    pub fn write_csv<W: Write>(&self, w: &mut W, path_id: u64, dim: usize) -> Result<()> {
        for k in 0..self.times.len() {
            write!(w, "{path_id},{k},{}", self.times[k])?;
            for i in 0..dim {
                write!(w, ",{}", self.states[k][i])?;
            }
            let contact = k > 0 && self.contact_flags[k - 1];
            writeln!(w, ",{},{}", self.local_time[k], u8::from(contact))?;
        }
        Ok(())
    }

    pub fn csv_header(dim: usize) -> String {
        let xs: Vec<String> = (1..=dim).map(|i| format!("x_{i}")).collect();
        format!("path_id,k,t_k,{},l,contact", xs.join(","))
    }
}

/// Simulates path `index` of the stream `seeds` on `[0, t]`.
pub fn simulate_reflecting_path(
    process: &ReflectingDiffusion<'_>,
    x0: &Point,
    t: f64,
    dt: f64,
    seeds: &SeedStream,
    index: u64,
) -> Result<PathSample> {
    let grid = TimeGrid::new(t, dt)?;
    let mut w = process.walker(x0, grid, seeds, index)?;
    PathSample::record(&mut w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(x: f64) -> Point {
        Point::new(x, 0.0, 0.0)
    }

    #[test]
    fn interval_paths_stay_inside() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::isotropic(-1.0, Point::zeros(), 1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        for seed in 0..5 {
            let p = simulate_reflecting_path(&proc, &p1(0.3), 1.0, 1e-3, &SeedStream::new(seed), 0).unwrap();
            assert!(p.states.iter().all(|x| (0.0..=1.0).contains(&x[0])));
            for (k, w) in p.local_time.windows(2).enumerate() {
                assert!(w[1] >= w[0]);
                assert_eq!(w[1] > w[0], p.contact_flags[k]);
            }
        }
    }

    #[test]
    fn far_start_rarely_touches() {
        let dom = DomainModel::HalfLine;
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        for i in 0..200 {
            let p = simulate_reflecting_path(&proc, &p1(2.0), 0.01, 1e-3, &SeedStream::new(9), i).unwrap();
            assert_eq!(*p.local_time.last().unwrap(), 0.0);
        }
    }

    #[test]
    fn skorokhod_map_agrees_with_projection() {
        let dom = DomainModel::HalfLine;
        let z = DriftField::linear(p1(-0.5), 1).unwrap();
        let proj = ReflectingDiffusion::new(&dom, &z).unwrap();
        let sk = proj.with_scheme(ReflectionScheme::Skorokhod).unwrap();
        let seeds = SeedStream::new(5);
        for i in 0..20 {
            let a = simulate_reflecting_path(&proj, &p1(0.1), 1.0, 1e-3, &seeds, i).unwrap();
            let b = simulate_reflecting_path(&sk, &p1(0.1), 1.0, 1e-3, &seeds, i).unwrap();
            for k in 0..a.times.len() {
                assert!((a.states[k][0] - b.states[k][0]).abs() < 1e-12);
                assert!((a.local_time[k] - b.local_time[k]).abs() < 1e-12);
            }
        }
        let ball = DomainModel::ball(1.0, 2).unwrap();
        let z2 = DriftField::zero(2).unwrap();
        assert!(ReflectingDiffusion::new(&ball, &z2).unwrap().with_scheme(ReflectionScheme::Skorokhod).is_err());
    }

    #[test]
    fn paths_are_reproducible() {
        let dom = DomainModel::annulus(0.5, 1.5).unwrap();
        let z = DriftField::zero(2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let x0 = Point::new(0.6, 0.0, 0.0);
        let a = simulate_reflecting_path(&proc, &x0, 0.5, 1e-3, &SeedStream::new(1), 3).unwrap();
        let b = simulate_reflecting_path(&proc, &x0, 0.5, 1e-3, &SeedStream::new(1), 3).unwrap();
        assert_eq!(a, b);
        assert!(a.states.iter().all(|x| dom.contains(x)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let dom = DomainModel::interval(1.0).unwrap();
        let z = DriftField::zero(1).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let s = SeedStream::new(0);
        assert!(simulate_reflecting_path(&proc, &p1(0.5), 1.0, 0.0, &s, 0).is_err());
        assert!(simulate_reflecting_path(&proc, &p1(0.5), 1.0, 2.0, &s, 0).is_err());
        assert!(matches!(
            simulate_reflecting_path(&proc, &p1(1.5), 1.0, 0.1, &s, 0),
            Err(Error::DomainViolation { .. })
        ));
        let z2 = DriftField::zero(2).unwrap();
        assert!(ReflectingDiffusion::new(&dom, &z2).is_err());
    }

    #[test]
    fn grid_lands_on_horizon() {
        let g = TimeGrid::new(1.0, 2.5e-4).unwrap();
        assert_eq!(g.n_steps, 4000);
        let g = TimeGrid::new(1.0, 0.3).unwrap();
        assert_eq!(g.n_steps, 4);
        assert_eq!(g.index_of(0.5).unwrap(), 2);
        assert!(g.index_of(0.3).is_err());
    }

    #[test]
    fn csv_dump_has_one_row_per_node() {
        let dom = DomainModel::ball(1.0, 2).unwrap();
        let z = DriftField::zero(2).unwrap();
        let proc = ReflectingDiffusion::new(&dom, &z).unwrap();
        let p = simulate_reflecting_path(&proc, &Point::new(0.9, 0.0, 0.0), 0.01, 1e-3, &SeedStream::new(0), 0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf, 0, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert_eq!(text.lines().next().unwrap().split(',').count(), PathSample::csv_header(2).split(',').count());
    }
}
