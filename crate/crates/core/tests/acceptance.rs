//! End-to-end acceptance suite: one line per criterion, non-zero exit on any
//! failure. Run a subset with `ACCEPTANCE_ONLY=3,5`; regenerate the golden
//! tables with `UPDATE_GOLDEN=1`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use robin_semigroup::cli::{execute, run_configs, Check, Estimate, ExperimentConfig, RunOutput, ESTIMATES_FILE, INEQUALITIES_FILE};
use robin_semigroup::geometry::{DomainModel, Point};
use robin_semigroup::pde::{field_gradient, solve_on_domain};
use robin_semigroup::semigroup::{hsu_bound_rhs_mc, robin_pt_mc, RobinCoefficient};
use robin_semigroup::stochastics::{
    damped_transport, simulate_reflecting_path, DriftField, McParams, ReflectingDiffusion, SeedStream, TransportFlags,
};

type Outcome = Result<String, String>;

fn run(json: &str) -> Result<RunOutput, String> {
    let cfg = ExperimentConfig::from_json(json).map_err(|e| e.to_string())?;
    execute(&cfg, None).map_err(|e| e.to_string())
}

/// Fails with the worst check when any check misses its budget.
fn all_checks(out: &RunOutput) -> Result<(usize, f64), String> {
    let worst = out
        .checks
        .iter()
        .min_by(|a, b| a.margin().total_cmp(&b.margin()))
        .ok_or("no checks were produced")?;
    if let Some(bad) = out.checks.iter().find(|c| !c.passed()) {
        return Err(describe(bad));
    }
    Ok((out.checks.len(), worst.margin()))
}

fn describe(c: &Check) -> String {
    format!("{}: lhs {:.6e}, rhs {:.6e}, budget {:.3e}", c.inequality_id, c.lhs, c.rhs, c.error_budget)
}

fn estimates<'a>(out: &'a RunOutput, name: &str) -> Vec<&'a Estimate> {
    out.estimates.iter().filter(|e| e.estimator == name).collect()
}

fn local_time_mean() -> Outcome {
    let out = run(r#"{
        "experiment": {"name": "local_time_mean", "points": [0.0], "times": [1.0]},
        "domain": {"kind": "half_line"},
        "mc": {"n_paths": 100000, "dt": 0.00025, "seed": 1001}
    }"#)?;
    let e = estimates(&out, "local_time")[0];
    // Lévy: l_t has the law of sup_{s≤t} √2 B_s, so E l_1 = √2 · √(2/π).
    let target = 2.0 / PI.sqrt();
    let err = (e.mean - target).abs();
    let budget = 3.0 * e.stderr + 0.05;
    if err <= budget {
        Ok(format!("E l_1 = {:.4} ± {:.4} vs {target:.4} (|err| {err:.4} ≤ {budget:.4})", e.mean, e.stderr))
    } else {
        Err(format!("E l_1 = {:.4} ± {:.4} vs {target:.4}: |err| {err:.4} > {budget:.4}", e.mean, e.stderr))
    }
}

fn local_time_envelope() -> Outcome {
    let half = run(r#"{
        "experiment": {"name": "local_time_envelope", "points": [0.0, 0.25, 0.5, 1.0], "lambdas": [0.5, 1.0], "times": [0.5, 1.0]},
        "domain": {"kind": "half_line"},
        "mc": {"n_paths": 20000, "dt": 0.001, "seed": 1002}
    }"#)?;
    let ann = run(r#"{
        "experiment": {"name": "local_time_envelope", "points": [0.5, 0.75, 1.0, 1.25, 1.5], "lambdas": [0.5, 1.0], "times": [0.5, 1.0]},
        "domain": {"kind": "annulus", "r_in": 0.5, "r_out": 1.5},
        "mc": {"n_paths": 10000, "dt": 0.001, "seed": 1003}
    }"#)?;
    let (n1, m1) = all_checks(&half)?;
    let (n2, m2) = all_checks(&ann)?;
    Ok(format!("{} (λ, t) cases below the envelope; smallest margin {:.3e}", n1 + n2, m1.min(m2)))
}

fn robin_feynman_kac() -> Outcome {
    let out = run(r#"{
        "experiment": {"name": "robin_feynman_kac", "points": [0.0, 0.25, 0.5, 0.75, 1.0], "t": 0.25},
        "domain": {"kind": "interval", "length": 1.0},
        "q": [0.5, -0.3],
        "observable": {"kind": "cosine", "k": 1.0},
        "mc": {"n_paths": 20000, "dt": 0.001, "seed": 1004},
        "pde": {"nodes": 101}
    }"#)?;
    all_checks(&out)?;
    let order = estimates(&out, "pde_order")[0].mean;
    let worst = out
        .checks
        .iter()
        .filter(|c| c.inequality_id.starts_with("robin_mc_vs_pde"))
        .map(|c| c.lhs / c.error_budget)
        .fold(0.0, f64::max);
    Ok(format!("5 points within budget (worst |MC − PDE| / budget {worst:.2}); PDE order {order:.3}"))
}

fn local_time_identity() -> Outcome {
    // The direct local time carries the O(√dt) bias of the projection
    // scheme; dt is small enough for it to sit well inside 3·stderr.
    let mut msgs = Vec::new();
    for (domain, x) in [(r#"{"kind": "half_line"}"#, 0.0), (r#"{"kind": "annulus", "r_in": 0.5, "r_out": 1.5}"#, 1.0)] {
        let out = run(&format!(
            r#"{{
            "experiment": {{"name": "local_time_identity", "points": [{x}], "t": 0.25, "radius": 0.4}},
            "domain": {domain},
            "mc": {{"n_paths": 8000, "dt": 1.5625e-5, "seed": 1005}}
        }}"#
        ))?;
        all_checks(&out)?;
        let c = &out.checks[0];
        msgs.push(format!("|diff| {:.4} ≤ {:.4}", c.lhs, c.error_budget));
    }
    Ok(format!("half-line {}; annulus {}", msgs[0], msgs[1]))
}

fn bismut_gradient() -> Outcome {
    // Contacts between grid times go unseen, so the transport is killed late
    // and the estimate carries an O(√dt) bias (about 17% at dt = 1e-3, 5.6%
    // at 6.25e-5); at this dt it is near 3%.
    let out = run(r#"{
        "experiment": {"name": "bismut_gradient", "points": [0.5], "t": 0.2, "schedules": ["smoothstep", "linear"]},
        "domain": {"kind": "interval", "length": 1.0},
        "drift": {"kind": "quadratic", "a": -1.0},
        "observable": {"kind": "cosine", "k": 1.0},
        "mc": {"n_paths": 100000, "dt": 1.5625e-5, "seed": 1006},
        "pde": {"nodes": 401}
    }"#)?;
    let pde = estimates(&out, "pde_gradient")[0].mean;
    let mut rel = Vec::new();
    for name in ["bismut_smoothstep", "bismut_linear"] {
        let e = estimates(&out, name)[0];
        let r = (e.mean - pde).abs() / pde.abs();
        if r > 0.05 {
            return Err(format!("{name}: {:.5} vs PDE {pde:.5}, relative error {r:.4} > 0.05", e.mean));
        }
        rel.push(r);
    }
    let inv = out.checks.iter().find(|c| c.inequality_id.starts_with("schedule_invariance")).ok_or("no invariance check")?;
    if !inv.passed() {
        return Err(describe(inv));
    }

    // Per-path transport oracle: 𝕄_k = (1 − 2dt)^k before the first
    // contact and 0 from it on.
    let dom = DomainModel::interval(1.0).map_err(|e| e.to_string())?;
    let drift = DriftField::isotropic(-1.0, Point::zeros(), 1).map_err(|e| e.to_string())?;
    let proc = ReflectingDiffusion::new(&dom, &drift).map_err(|e| e.to_string())?;
    let dt = 1e-3;
    let seeds = SeedStream::new(1006);
    let mut killed = 0;
    for i in 0..500 {
        let p = simulate_reflecting_path(&proc, &Point::new(0.5, 0.0, 0.0), 0.2, dt, &seeds, i).map_err(|e| e.to_string())?;
        let m = damped_transport(&p, &drift, &dom, TransportFlags::default()).map_err(|e| e.to_string())?;
        let tau = p.contact_flags.iter().position(|&c| c).map_or(usize::MAX, |k| k + 1);
        killed += usize::from(tau != usize::MAX);
        let mut expect = 1.0f64;
        for (k, mk) in m.matrices.iter().enumerate() {
            let oracle = if k < tau { expect } else { 0.0 };
            if mk[(0, 0)] != oracle {
                return Err(format!("path {i}, step {k}: transport {} ≠ oracle {oracle}", mk[(0, 0)]));
            }
            expect *= 1.0 - 2.0 * dt;
        }
    }
    Ok(format!(
        "relative errors {:.4} / {:.4} vs PDE {pde:.4}; schedules differ by {:.2e} ≤ {:.2e}; transport exact on 500 paths ({killed} killed)",
        rel[0], rel[1], inv.lhs, inv.error_budget
    ))
}

fn hsu_gradient() -> Outcome {
    let points: Vec<String> = (0..20).map(|i| format!("{}", 0.5 + i as f64 / 19.0)).collect();
    let out = run(&format!(
        r#"{{
        "experiment": {{"name": "hsu_gradient", "points": [{}], "times": [0.1, 0.3], "kappa1": 0.0, "kappa2": [2.0, 2.0]}},
        "domain": {{"kind": "annulus", "r_in": 0.5, "r_out": 1.5}},
        "observable": {{"kind": "cosine", "k": 1.0, "shift": 0.5}},
        "mc": {{"n_paths": 4000, "dt": 0.001, "seed": 1007}},
        "pde": {{"nodes": 201}}
    }}"#,
        points.join(", ")
    ))?;
    let (n, margin) = all_checks(&out)?;

    // Convex ball, V = −|x|²/2: with κ₁ = K and κ₂ = 0 the envelope is
    // e^{Kt} E|∇f|(X_t) on the same paths, and it dominates the PDE gradient.
    let dom = DomainModel::ball(1.0, 2).map_err(|e| e.to_string())?;
    let drift = DriftField::isotropic(-0.5, Point::zeros(), 2).map_err(|e| e.to_string())?;
    let proc = ReflectingDiffusion::new(&dom, &drift).map_err(|e| e.to_string())?;
    let k = drift.curvature_bound();
    let t = 0.2;
    let grad = |x: &Point| (PI * (PI * x.norm()).sin()).abs();
    let field = solve_on_domain(&dom, &drift, &[0.0], &|r: f64| (PI * r).cos(), t, 401, 1.0).map_err(|e| e.to_string())?;
    let mut worst_gap: f64 = 0.0;
    for (i, r) in [0.2, 0.5, 0.8].into_iter().enumerate() {
        let x = Point::new(r, 0.0, 0.0);
        let mc = McParams::new(4000, 1e-3, 1100 + i as u64);
        let hsu = hsu_bound_rhs_mc(&proc, &grad, &|_| k, &|_| 0.0, &x, t, &mc).map_err(|e| e.to_string())?;
        let plain = robin_pt_mc(&proc, &grad, &RobinCoefficient::zero(&dom), &x, t, &mc).map_err(|e| e.to_string())?;
        let g = (k * t).exp() * plain.mean;
        let gap = (hsu.mean - g).abs();
        if gap > 1e-10 * g.abs().max(1.0) {
            return Err(format!("ball r={r}: Hsu envelope {} ≠ e^(Kt) E|∇f| {g}", hsu.mean));
        }
        worst_gap = worst_gap.max(gap);
        let lhs = field_gradient(&field, r).map_err(|e| e.to_string())?.abs();
        if lhs > g + 3.0 * (k * t).exp() * plain.stderr {
            return Err(format!("ball r={r}: |∇P_t f| = {lhs} above e^(Kt) P_t|∇f| = {g}"));
        }
    }
    Ok(format!("{n} annulus checks, smallest margin {margin:.3e}; ball K={k}: envelopes agree to {worst_gap:.1e}"))
}

fn symmetry_and_dirichlet() -> Outcome {
    let sym = run(r#"{
        "experiment": {"name": "symmetry", "t": 0.1, "g": {"kind": "gaussian", "center": 0.3, "width": 0.2}},
        "domain": {"kind": "interval", "length": 1.0},
        "drift": {"kind": "quadratic", "a": -1.0},
        "q": [0.5, -0.3],
        "observable": {"kind": "cosine", "k": 1.0},
        "pde": {"nodes": 201}
    }"#)?;
    all_checks(&sym)?;
    let form = run(r#"{
        "experiment": {"name": "dirichlet_form", "pairs": [
            [{"kind": "robin_blend"}, {"kind": "robin_blend", "from": 0.2, "to": 0.9}],
            [{"kind": "robin_blend", "from": 0.1, "to": 0.5}, {"kind": "robin_modes", "coefficients": [1.0, 0.5]}],
            [{"kind": "robin_modes", "coefficients": [0.0, 1.0]}, {"kind": "robin_modes", "coefficients": [1.0, 0.0, 0.3]}]
        ]},
        "domain": {"kind": "interval", "length": 1.0},
        "drift": {"kind": "quadratic", "a": -1.0},
        "q": [0.5, -0.3],
        "pde": {"nodes": 401}
    }"#)?;
    all_checks(&form)?;
    let worst = form.checks.iter().map(|c| c.lhs).fold(0.0, f64::max);
    Ok(format!("symmetry residual {:.2e} ≤ {:.2e}; worst Dirichlet-form residual {worst:.2e}", sym.checks[0].lhs, sym.checks[0].error_budget))
}

fn schrodinger() -> Outcome {
    let out = run(r#"{
        "experiment": {"name": "schrodinger", "point": 0.5, "t": 0.25, "radius": 0.5, "indices": [4, 8, 16]},
        "domain": {"kind": "interval", "length": 1.0},
        "q": [0.5, -0.3],
        "observable": {"kind": "cosine", "k": 1.0},
        "mc": {"n_paths": 20000, "dt": 0.00025, "seed": 1008}
    }"#)?;
    all_checks(&out)?;
    let res: Vec<String> = ["4", "8", "16"]
        .iter()
        .map(|n| format!("{:.4}", estimates(&out, &format!("schrodinger_minus_robin_n{n}"))[0].mean.abs()))
        .collect();
    Ok(format!("raw residuals {} (n = 4, 8, 16)", res.join(" > ")))
}

fn hwi() -> Outcome {
    let cor = run(r#"{
        "experiment": {"name": "hwi", "form": "corollary", "r": 0.5},
        "domain": {"kind": "interval", "length": 1.0},
        "drift": {"kind": "quadratic", "a": -2.0},
        "observable": {"kind": "gaussian", "center": 0.3, "width": 0.25},
        "pde": {"nodes": 401}
    }"#)?;
    let thm = run(r#"{
        "experiment": {"name": "hwi", "form": "theorem", "t_max": 1.0, "steps": 200},
        "domain": {"kind": "annulus", "r_in": 0.5, "r_out": 1.5},
        "observable": {"kind": "cosine", "k": 1.0, "shift": 0.5},
        "pde": {"nodes": 201}
    }"#)?;
    let get = |out: &RunOutput, id: &str| out.checks.iter().find(|c| c.inequality_id == id).cloned().ok_or(format!("missing check {id}"));
    let c = get(&cor, "hwi_corollary")?;
    let t = get(&thm, "hwi_theorem")?;
    let s = get(&thm, "schedule_identity")?;
    for (check, tol) in [(&c, 1e-6), (&t, 1e-6)] {
        if check.slack() < -tol {
            return Err(describe(check));
        }
    }
    if !s.passed() {
        return Err(describe(&s));
    }
    all_checks(&thm)?;
    Ok(format!("corollary slack {:.3e}; theorem slack {:.3e}; schedule identity defect {:.1e}", c.slack(), t.slack(), s.lhs))
}

fn generator() -> Outcome {
    let out = run(r#"{
        "experiment": {"name": "generator", "points": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0], "times": [0.04, 0.02, 0.01]},
        "domain": {"kind": "interval", "length": 1.0},
        "q": [0.5, -0.3],
        "observable": {"kind": "robin_modes", "coefficients": [1.0, 0.3]},
        "pde": {"nodes": 401}
    }"#)?;
    all_checks(&out)?;
    let sup: Vec<String> = estimates(&out, "generator_sup_residual").iter().map(|e| format!("{:.3e}", e.mean)).collect();
    Ok(format!("slope {:.3} ≥ 0.8; sup residuals {}", out.checks[0].rhs, sup.join(", ")))
}

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn example_configs() -> Result<Vec<PathBuf>, String> {
    let mut v: Vec<PathBuf> = fs::read_dir(manifest().join("examples/configs"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    Ok(v)
}

fn compare_tree(got: &Path, golden: &Path, stems: &[String]) -> Result<(), String> {
    for stem in stems {
        for file in [ESTIMATES_FILE, INEQUALITIES_FILE] {
            let a = fs::read(got.join(stem).join(file)).map_err(|e| format!("{stem}/{file}: {e}"))?;
            let b = fs::read(golden.join(stem).join(file)).map_err(|e| format!("golden {stem}/{file}: {e}"))?;
            if a != b {
                return Err(format!("{stem}/{file} differs from the golden copy"));
            }
        }
    }
    Ok(())
}

fn determinism() -> Outcome {
    let configs = example_configs()?;
    let stems: Vec<String> = configs.iter().map(|p| p.file_stem().unwrap().to_string_lossy().into_owned()).collect();
    let golden = manifest().join("tests/golden");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let code = run_configs(&configs, Some(&golden), Some(1));
        for stem in &stems {
            let _ = fs::remove_file(golden.join(stem).join("summary.json"));
        }
        return if code == 0 { Ok(format!("golden tables rewritten for {} configs", stems.len())) } else { Err(format!("exit code {code}")) };
    }
    for workers in [1, 3] {
        let out = tmp.path().join(format!("w{workers}"));
        let code = run_configs(&configs, Some(&out), Some(workers));
        if code != 0 {
            return Err(format!("example run with {workers} worker(s) exited with {code}"));
        }
        compare_tree(&out, &golden, &stems).map_err(|e| format!("{workers} worker(s): {e}"))?;
    }
    Ok(format!("{} example configs reproduce the golden CSVs with 1 and 3 workers", stems.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("local-time mean on the half-line", local_time_mean),
        ("local-time exponential envelope", local_time_envelope),
        ("Robin Feynman–Kac vs PDE", robin_feynman_kac),
        ("local-time identity", local_time_identity),
        ("Bismut gradient", bismut_gradient),
        ("Hsu gradient envelope", hsu_gradient),
        ("symmetry and Dirichlet form", symmetry_and_dirichlet),
        ("Schrödinger approximation", schrodinger),
        ("HWI", hwi),
        ("generator", generator),
        ("determinism", determinism),
    ];
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {id:>2} PASS  {name} ({secs:.1}s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.1}s): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
