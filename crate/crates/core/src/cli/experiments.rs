use serde::{Deserialize, Serialize};

use crate::cli::config::{ExperimentConfig, ExperimentSpec, HwiSpec};
use crate::cli::observable::Profile;
use crate::error::{Error, Result};
use crate::geometry::{ComparisonProfile, DomainModel, Point};
use crate::inequalities::{
    dirichlet_form_residual, hwi_slack, optimal_local_time_envelope, log_sobolev_34_slack, optimal_schedule, symmetry_residual,
    EtaTable, HwiMode, WeightedMeasure1D,
};
use crate::numerics::adaptive_simpson;
use crate::pde::{field_gradient, grid_coordinate, point_from_coordinate, richardson_difference, solve_on_domain};
use crate::semigroup::{
    bismut_gradient_schedules, build_schrodinger_extension, generator_residual, hsu_bound_rhs_mc, robin_pt_mc,
    schrodinger_pt_mc, RobinCoefficient, Schedule,
};
use crate::stochastics::{
    local_time_exp_moment_ladder, local_time_identity, DriftField, Ensemble, McEstimate, McParams,
    ReflectingDiffusion, TransportFlags,
};

/// One estimated quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub estimator: String,
    pub x: Option<f64>,
    pub t: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub dt: f64,
}

impl Estimate {
    fn mc(estimator: impl Into<String>, x: f64, t: f64, e: &McEstimate) -> Self {
        Estimate { estimator: estimator.into(), x: Some(x), t: Some(t), mean: e.mean, stderr: e.stderr, n: e.n_paths, dt: e.dt }
    }

    fn deterministic(estimator: impl Into<String>, x: Option<f64>, t: Option<f64>, value: f64, n: usize, dt: f64) -> Self {
        Estimate { estimator: estimator.into(), x, t, mean: value, stderr: 0.0, n, dt }
    }
}

/// A checked claim `lhs ≤ rhs`, allowed to miss by `error_budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub inequality_id: String,
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub error_budget: f64,
}

impl Check {
    fn new(id: impl Into<String>, claim: impl Into<String>, lhs: f64, rhs: f64, error_budget: f64) -> Self {
        Check { inequality_id: id.into(), claim: claim.into(), lhs, rhs, error_budget }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// `slack + budget`; nonnegative exactly when the check passes.
    pub fn margin(&self) -> f64 {
        self.slack() + self.error_budget
    }

    pub fn passed(&self) -> bool {
        self.margin() >= 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub estimates: Vec<Estimate>,
    pub checks: Vec<Check>,
}

/// Name and one-line description of every experiment.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("local_time_mean", "mean boundary local time; closed form on the flat half-line"),
    ("local_time_envelope", "grid sup of E e^{λ l_t} against the closed-form envelope"),
    ("local_time_identity", "local time reconstructed from a boundary-distance profile"),
    ("robin_feynman_kac", "Robin semigroup by Monte Carlo against the PDE reference; PDE order"),
    ("bismut_gradient", "Neumann gradient by the Bismut formula against the PDE gradient"),
    ("hsu_gradient", "PDE gradient norm under the Monte Carlo gradient envelope"),
    ("symmetry", "symmetry of the Robin semigroup in L²(e^V dx)"),
    ("dirichlet_form", "integration by parts for pairs in the Robin domain"),
    ("schrodinger", "interior-potential approximation of the Robin semigroup"),
    ("hwi", "HWI slack, semigroup log-Sobolev slack and the optimal schedule"),
    ("generator", "(P_t f − f)/t → Lf for a member of the Robin domain"),
];

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    domain: &'a DomainModel,
    drift: &'a DriftField,
    profile: Profile,
    q: RobinCoefficient,
    mc: Option<McParams>,
}

impl Context<'_> {
    fn mc(&self) -> Result<McParams> {
        self.mc.ok_or_else(|| Error::Config("mc block missing".into()))
    }

    fn process(&self) -> Result<ReflectingDiffusion<'_>> {
        ReflectingDiffusion::new(self.domain, self.drift)
    }

    fn nodes(&self) -> usize {
        self.cfg.pde.nodes
    }

    /// Coordinate range the observable is probed on for sup norms.
    fn coordinate_span(&self, x_max: f64, t: f64) -> (f64, f64) {
        match *self.domain {
            DomainModel::HalfLine => (0.0, x_max + 8.0 * (2.0 * t).sqrt() + 1.0),
            DomainModel::Interval { length } => (0.0, length),
            DomainModel::Ball { radius, .. } => (0.0, radius),
            DomainModel::Annulus { r_in, r_out } => (r_in, r_out),
        }
    }

    fn neumann(&self) -> Vec<f64> {
        vec![0.0; self.domain.boundary_components()]
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// `E^x l_t` for the reflected process `dX = √2 dB + dl` on `[0, ∞)`:
/// `2 [√(2t) φ(a) − x (1 − Φ(a))]` with `a = x/√(2t)`.
pub fn halfline_local_time_mean(x: f64, t: f64) -> f64 {
    let s = (2.0 * t).sqrt();
    let a = x / s;
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = if x == 0.0 { 0.5 } else { adaptive_simpson(phi, a, a + 12.0, 1e-13) };
    2.0 * (s * phi(a) - x * tail)
}

/// Runs the configured experiment. `workers` only changes scheduling.
pub fn execute(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunOutput> {
    let domain = cfg.domain;
    let drift = cfg.drift.build(domain.dim())?;
    let ctx = Context {
        cfg,
        domain: &domain,
        drift: &drift,
        profile: Profile::new(&cfg.observable, &domain, &cfg.q)?,
        q: RobinCoefficient::components(cfg.q.clone())?,
        mc: cfg.mc.map(|m| m.params(workers)),
    };
    match &cfg.experiment {
        ExperimentSpec::LocalTimeMean { points, times } => local_time_mean(&ctx, points, times),
        ExperimentSpec::LocalTimeEnvelope { points, lambdas, times } => local_time_envelope(&ctx, points, lambdas, times),
        ExperimentSpec::LocalTimeIdentity { points, t, radius } => local_time_identity_run(&ctx, points, *t, *radius),
        ExperimentSpec::RobinFeynmanKac { points, t } => robin_feynman_kac(&ctx, points, *t),
        ExperimentSpec::BismutGradient { points, t, schedules } => bismut_gradient(&ctx, points, *t, schedules),
        ExperimentSpec::HsuGradient { points, times, kappa1, kappa2 } => hsu_gradient(&ctx, points, times, *kappa1, kappa2),
        ExperimentSpec::Symmetry { t, g } => symmetry(&ctx, *t, &Profile::new(g, &domain, &cfg.q)?),
        ExperimentSpec::DirichletForm { pairs } => {
            let pairs = pairs
                .iter()
                .map(|(f, g)| Ok((Profile::new(f, &domain, &cfg.q)?, Profile::new(g, &domain, &cfg.q)?)))
                .collect::<Result<Vec<_>>>()?;
            dirichlet_form(&ctx, &pairs)
        }
        ExperimentSpec::Schrodinger { point, t, radius, indices } => schrodinger(&ctx, *point, *t, *radius, indices),
        ExperimentSpec::Hwi(spec) => hwi(&ctx, spec),
        ExperimentSpec::Generator { points, times } => generator(&ctx, points, times),
    }
}

fn local_time_mean(ctx: &Context<'_>, points: &[f64], times: &[f64]) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let closed_form = matches!(ctx.domain, DomainModel::HalfLine) && ctx.drift.is_zero();
    for &s in points {
        for &t in times {
            let ens = Ensemble::new(process, point_from_coordinate(s), t, ctx.mc()?)?;
            let e = McEstimate::from_samples(&ens.local_times()?, ens.grid().dt, ctx.mc()?.seed);
            out.estimates.push(Estimate::mc("local_time", s, t, &e));
            if closed_form {
                let exact = halfline_local_time_mean(s, t);
                out.estimates.push(Estimate::deterministic("local_time_exact", Some(s), Some(t), exact, 0, 0.0));
                out.checks.push(Check::new(
                    format!("local_time_mean_x{s}_t{t}"),
                    format!("E l_t matches the half-line closed form at x={s}, t={t}"),
                    (e.mean - exact).abs(),
                    0.0,
                    3.0 * e.stderr + 0.05,
                ));
            }
        }
    }
    Ok(out)
}

fn local_time_envelope(ctx: &Context<'_>, points: &[f64], lambdas: &[f64], times: &[f64]) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let grid: Vec<Point> = points.iter().map(|&s| point_from_coordinate(s)).collect();
    for &lambda in lambdas {
        let reports = local_time_exp_moment_ladder(&process, lambda, times, &grid, &ctx.mc()?)?;
        for r in reports {
            let x = points[r.argmax];
            let bound = optimal_local_time_envelope(lambda, r.t, ctx.domain, ctx.drift)?;
            out.estimates.push(Estimate::mc(format!("exp_local_time_sup_lambda{lambda}"), x, r.t, &r.sup));
            out.estimates.push(Estimate::deterministic(
                format!("local_time_envelope_lambda{lambda}"),
                None,
                Some(r.t),
                bound.bound,
                0,
                0.0,
            ));
            out.checks.push(Check::new(
                format!("local_time_envelope_lambda{lambda}_t{}", r.t),
                format!("sup_x E e^(λ l_t) ≤ closed-form envelope (λ={lambda}, t={}, r={:.4})", r.t, bound.r),
                r.sup.mean,
                bound.bound,
                3.0 * r.sup.stderr,
            ));
        }
    }
    Ok(out)
}

fn local_time_identity_run(ctx: &Context<'_>, points: &[f64], t: f64, radius: f64) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let cd = ctx.domain.curvature_data();
    let profile = ComparisonProfile::new(radius, cd.k, cd.gamma, ctx.domain.dim())?;
    for &s in points {
        let id = local_time_identity(&process, &profile, &point_from_coordinate(s), t, &ctx.mc()?)?;
        out.estimates.push(Estimate::mc("local_time_direct", s, t, &id.direct));
        out.estimates.push(Estimate::mc("local_time_reconstructed", s, t, &id.reconstructed));
        out.checks.push(Check::new(
            format!("local_time_identity_x{s}"),
            format!("E l_t equals its boundary-distance reconstruction at x={s}"),
            id.difference().abs(),
            0.0,
            3.0 * id.combined_stderr(),
        ));
    }
    Ok(out)
}

fn robin_feynman_kac(ctx: &Context<'_>, points: &[f64], t: f64) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let mc = ctx.mc()?;
    let qs = ctx.cfg.q.as_slice();
    let x_max = max_of(points);
    let f0 = |s: f64| ctx.profile.value(s);
    let solve = |n: usize| solve_on_domain(ctx.domain, ctx.drift, qs, &f0, t, n, x_max);
    let field = solve(ctx.nodes())?;
    let f = ctx.profile.on_domain(ctx.domain);
    let (a, b) = ctx.coordinate_span(x_max, t);
    let f_norm = ctx.profile.sup_norm(a, b, 4096);
    for &s in points {
        let x = point_from_coordinate(s);
        let e = robin_pt_mc(&process, &f, &ctx.q, &x, t, &mc)?;
        let pde = field.value_at(grid_coordinate(ctx.domain, &x))?;
        out.estimates.push(Estimate::mc("robin_mc", s, t, &e));
        out.estimates.push(Estimate::deterministic("robin_pde", Some(s), Some(t), pde, field.len(), field.meta.dt));
        out.checks.push(Check::new(
            format!("robin_mc_vs_pde_x{s}"),
            format!("Feynman–Kac estimate matches the PDE reference at x={s}"),
            (e.mean - pde).abs(),
            0.0,
            3.0 * e.stderr + 0.5 * e.dt.sqrt() * f_norm,
        ));
    }
    let n0 = ctx.nodes();
    let mid = solve(2 * n0 - 1)?;
    let fine = solve(4 * n0 - 3)?;
    let (d1, d2) = (richardson_difference(&field, &mid)?, richardson_difference(&mid, &fine)?);
    let order = (d1 / d2).log2();
    out.estimates.push(Estimate::deterministic("pde_order", None, Some(t), order, n0, field.meta.dt));
    out.checks.push(Check::new(
        "pde_convergence_order",
        "PDE self-convergence order is 2 ± 0.2",
        (order - 2.0).abs(),
        0.2,
        0.0,
    ));
    Ok(out)
}

fn neumann_gradient_field(ctx: &Context<'_>, t: f64, x_max: f64) -> Result<crate::pde::GridField> {
    let f0 = |s: f64| ctx.profile.value(s);
    solve_on_domain(ctx.domain, ctx.drift, &ctx.neumann(), &f0, t, ctx.nodes(), x_max)
}

fn bismut_gradient(ctx: &Context<'_>, points: &[f64], t: f64, names: &[String]) -> Result<RunOutput> {
    if ctx.cfg.q.iter().any(|q| *q != 0.0) {
        return Err(Error::Config("bismut_gradient estimates the Neumann semigroup; q must be zero".into()));
    }
    let schedules = names
        .iter()
        .map(|n| Schedule::from_name(n).map_err(|e| Error::Config(format!("schedules: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if schedules.is_empty() {
        return Err(Error::Config("schedules: at least one schedule is needed".into()));
    }
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let mc = ctx.mc()?;
    let field = neumann_gradient_field(ctx, t, max_of(points))?;
    let f = ctx.profile.on_domain(ctx.domain);
    for &s in points {
        let x = point_from_coordinate(s);
        let pde = field_gradient(&field, grid_coordinate(ctx.domain, &x))?;
        out.estimates.push(Estimate::deterministic("pde_gradient", Some(s), Some(t), pde, field.len(), field.meta.dt));
        let ests = bismut_gradient_schedules(&process, &f, &x, t, &schedules, &mc, TransportFlags::default())?;
        let comps: Vec<McEstimate> = ests.iter().map(|e| e.component(0)).collect();
        for (sched, e) in schedules.iter().zip(&comps) {
            out.estimates.push(Estimate::mc(format!("bismut_{}", sched.name()), s, t, e));
            out.checks.push(Check::new(
                format!("bismut_vs_pde_{}_x{s}", sched.name()),
                format!("Bismut gradient ({}) within 5% of the PDE gradient at x={s}", sched.name()),
                (e.mean - pde).abs(),
                0.05 * pde.abs(),
                3.0 * e.stderr,
            ));
        }
        for w in comps.windows(2) {
            out.checks.push(Check::new(
                format!("schedule_invariance_x{s}"),
                format!("Bismut gradient does not depend on the schedule at x={s}"),
                (w[0].mean - w[1].mean).abs(),
                0.0,
                3.0 * w[0].combined_stderr(&w[1]),
            ));
        }
    }
    Ok(out)
}

fn hsu_gradient(ctx: &Context<'_>, points: &[f64], times: &[f64], kappa1: f64, kappa2: &[f64]) -> Result<RunOutput> {
    if kappa2.len() != ctx.domain.boundary_components() {
        return Err(Error::Config(format!(
            "kappa2: {} boundary component(s), got {} value(s)",
            ctx.domain.boundary_components(),
            kappa2.len()
        )));
    }
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let mc = ctx.mc()?;
    let grad_norm = ctx.profile.gradient_norm_on_domain(ctx.domain);
    let k1 = |_: &Point| kappa1;
    let domain = ctx.domain;
    let k2 = |x: &Point| kappa2[domain.nearest_component(x)];
    for &t in times {
        let field = neumann_gradient_field(ctx, t, max_of(points))?;
        for &s in points {
            let x = point_from_coordinate(s);
            let lhs = field_gradient(&field, grid_coordinate(ctx.domain, &x))?.abs();
            let rhs = hsu_bound_rhs_mc(&process, &grad_norm, &k1, &k2, &x, t, &mc)?;
            out.estimates.push(Estimate::deterministic(
                "pde_gradient_norm",
                Some(s),
                Some(t),
                lhs,
                field.len(),
                field.meta.dt,
            ));
            out.estimates.push(Estimate::mc("hsu_envelope", s, t, &rhs));
            out.checks.push(Check::new(
                format!("hsu_envelope_t{t}_x{s}"),
                format!("|∇P_t f| ≤ E[|∇f|(X_t) e^(∫κ₁ ds + ∫κ₂ dl)] at x={s}, t={t}"),
                lhs,
                rhs.mean,
                3.0 * rhs.stderr,
            ));
        }
    }
    Ok(out)
}

fn measure(ctx: &Context<'_>) -> Result<WeightedMeasure1D> {
    WeightedMeasure1D::from_drift(ctx.domain, ctx.drift, ctx.nodes(), true)
}

fn symmetry(ctx: &Context<'_>, t: f64, g: &Profile) -> Result<RunOutput> {
    let mu = measure(ctx)?;
    let f = |s: f64| ctx.profile.value(s);
    let gv = |s: f64| g.value(s);
    let r = symmetry_residual(&mu, ctx.drift, &ctx.cfg.q, &f, &gv, t, ctx.nodes())?;
    let mut out = RunOutput::default();
    out.estimates.push(Estimate::deterministic("symmetry_g_ptf", None, Some(t), r.lhs, ctx.nodes(), 0.0));
    out.estimates.push(Estimate::deterministic("symmetry_f_ptg", None, Some(t), r.rhs, ctx.nodes(), 0.0));
    out.checks.push(Check::new(
        "symmetry",
        "μ(g P_t f) = μ(f P_t g) within twice the PDE tolerance",
        r.residual(),
        0.0,
        2.0 * r.pde_tolerance,
    ));
    Ok(out)
}

fn dirichlet_form(ctx: &Context<'_>, pairs: &[(Profile, Profile)]) -> Result<RunOutput> {
    let mu = measure(ctx)?;
    let mut out = RunOutput::default();
    for (i, (f, g)) in pairs.iter().enumerate() {
        let r = f.with_test_function(|tf| g.with_test_function(|tg| dirichlet_form_residual(&mu, &ctx.cfg.q, tf, tg)))?;
        out.estimates.push(Estimate::deterministic(format!("dirichlet_form_residual_{i}"), None, None, r, ctx.nodes(), 0.0));
        out.checks.push(Check::new(
            format!("dirichlet_form_pair{i}"),
            format!("E(f, g) = −μ(f Lg) for pair {i}"),
            r,
            0.0,
            1e-6,
        ));
    }
    Ok(out)
}

fn schrodinger(ctx: &Context<'_>, point: f64, t: f64, radius: f64, indices: &[f64]) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let process = ctx.process()?;
    let mc = ctx.mc()?;
    let f = ctx.profile.on_domain(ctx.domain);
    let x = point_from_coordinate(point);
    let mut residuals = Vec::with_capacity(indices.len());
    for &n in indices {
        let ext = build_schrodinger_extension(ctx.domain, ctx.drift, &ctx.q, radius, n)?;
        let r = schrodinger_pt_mc(&process, &f, &ext, &x, t, &mc)?;
        if residuals.is_empty() {
            out.estimates.push(Estimate::mc("robin_mc", point, t, &r.robin));
        }
        out.estimates.push(Estimate::mc(format!("schrodinger_n{n}"), point, t, &r.raw));
        out.estimates.push(Estimate::mc(format!("schrodinger_corrected_n{n}"), point, t, &r.corrected));
        out.estimates.push(Estimate {
            estimator: format!("schrodinger_minus_robin_n{n}"),
            x: Some(point),
            t: Some(t),
            mean: r.raw.mean - r.robin.mean,
            stderr: r.raw_paired_stderr,
            n: r.raw.n_paths,
            dt: r.raw.dt,
        });
        residuals.push((n, r.raw_residual(), r.raw_combined_stderr()));
    }
    for w in residuals.windows(2) {
        out.checks.push(Check::new(
            format!("schrodinger_decreasing_n{}", w[1].0),
            format!("residual at n={} is below the residual at n={}", w[1].0, w[0].0),
            w[1].1,
            w[0].1,
            0.0,
        ));
    }
    if let Some(&(n, res, se)) = residuals.last() {
        out.checks.push(Check::new(
            format!("schrodinger_final_n{n}"),
            format!("Schrödinger semigroup at n={n} matches the Robin semigroup"),
            res,
            0.0,
            3.0 * se,
        ));
    }
    Ok(out)
}

fn hwi(ctx: &Context<'_>, spec: &HwiSpec) -> Result<RunOutput> {
    let mu = measure(ctx)?;
    let f = mu.sample(&|s| ctx.profile.value(s));
    let k = ctx.drift.curvature_bound();
    let sigma = ctx.domain.curvature_data().sigma;
    let d = ctx.domain.dim();
    let mut out = RunOutput::default();
    let push_terms = |out: &mut RunOutput, r: &crate::inequalities::HwiReport| {
        for (name, v) in [("entropy", r.entropy), ("fisher_energy", r.energy), ("w2", r.w2)] {
            out.estimates.push(Estimate::deterministic(name, None, r.t_opt, v, mu.len(), 0.0));
        }
    };
    match *spec {
        HwiSpec::Corollary { r } => {
            let delta_r = ctx.drift.delta_r(ctx.domain, r)?;
            let rep = hwi_slack(&mu, &f, &HwiMode::Corollary { r, sigma, d, k, delta_r })?;
            push_terms(&mut out, &rep);
            out.checks.push(Check::new(
                "hwi_corollary",
                format!("HWI with curvature {k}, σ={sigma}, collar radius {r}"),
                rep.lhs(),
                rep.rhs,
                1e-6,
            ));
        }
        HwiSpec::Theorem { t_max, steps, lambda } => {
            if !(t_max > 0.0 && steps >= 1) {
                return Err(Error::Config("hwi: need t_max > 0 and steps >= 1".into()));
            }
            let lambda = lambda.unwrap_or(2.0 * sigma);
            let times: Vec<f64> = (0..=steps).map(|i| t_max * i as f64 / steps as f64).collect();
            let eta = EtaTable::envelope(lambda, times, ctx.domain, ctx.drift)?;
            let rep = hwi_slack(&mu, &f, &HwiMode::Theorem { eta: eta.clone(), k })?;
            push_terms(&mut out, &rep);
            out.checks.push(Check::new(
                "hwi_theorem",
                format!("HWI with the local-time envelope (λ={lambda}, curvature {k})"),
                rep.lhs(),
                rep.rhs,
                1e-6,
            ));
            let sched = optimal_schedule(&eta, k)?;
            out.checks.push(Check::new(
                "schedule_identity",
                "optimal schedule reproduces the closed-form transport coefficient",
                sched.defect(),
                0.0,
                1e-10 * sched.closed_form.max(1.0),
            ));
            let ls = log_sobolev_34_slack(&mu, ctx.drift, &f, k, &eta)?;
            out.estimates.push(Estimate::deterministic("smoothed_entropy", None, Some(t_max), ls.smoothed_entropy, mu.len(), 0.0));
            out.checks.push(Check::new(
                "log_sobolev",
                format!("μ(f² log f²) ≤ μ(P_t f² log P_t f²) + 4 μ(|∇f|²) ∫ e^(2Ks) η ds at t={t_max}"),
                ls.entropy,
                ls.rhs(),
                1e-6,
            ));
        }
    }
    Ok(out)
}

fn generator(ctx: &Context<'_>, points: &[f64], times: &[f64]) -> Result<RunOutput> {
    let r = ctx
        .profile
        .with_test_function(|tf| generator_residual(ctx.domain, ctx.drift, tf, &ctx.q, points, times, ctx.nodes()))?;
    let mut out = RunOutput::default();
    for (t, sup) in r.times.iter().zip(&r.sup) {
        out.estimates.push(Estimate::deterministic("generator_sup_residual", None, Some(*t), *sup, ctx.nodes(), 0.0));
    }
    out.checks.push(Check::new(
        "generator_slope",
        "sup |(P_t f − f)/t − Lf| decays at least like t^0.8",
        0.8,
        r.slope,
        0.0,
    ));
    Ok(out)
}
