use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{DomainModel, Point};
use crate::stochastics::{DriftField, McParams};

/// `V = 0`, `V = a |x − c|²` or `V = <g, x>`; the drift is `∇V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSpec {
    Zero,
    Quadratic {
        a: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    Linear {
        gradient: Vec<f64>,
    },
}

fn point_of(v: &[f64], what: &str) -> Result<Point> {
    if v.len() > 3 {
        return Err(Error::Config(format!("{what} has {} components, at most 3 allowed", v.len())));
    }
    let mut p = Point::zeros();
    for (i, c) in v.iter().enumerate() {
        p[i] = *c;
    }
    Ok(p)
}

impl DriftSpec {
    pub fn build(&self, dim: usize) -> Result<DriftField> {
        match self {
            DriftSpec::Zero => DriftField::zero(dim),
            DriftSpec::Quadratic { a, center } => DriftField::isotropic(*a, point_of(center, "drift.center")?, dim),
            DriftSpec::Linear { gradient } => DriftField::linear(point_of(gradient, "drift.gradient")?, dim),
        }
    }
}

/// A function of the grid coordinate (`x` on 1D domains, `|x|` on balls
/// and annuli).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Constant {
        value: f64,
    },
    /// `cos(kπ (s − shift))`.
    Cosine {
        k: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `exp(−(s − center)² / (2 width²))`.
    Gaussian { center: f64, width: f64 },
    /// Blend of the two boundary exponentials that satisfy the Robin
    /// condition at each end; the blend happens on `[from, to]` given as
    /// fractions of the coordinate interval.
    RobinBlend {
        #[serde(default = "default_from")]
        from: f64,
        #[serde(default = "default_to")]
        to: f64,
    },
    /// `Σ c_j u_j` over the first Robin eigenfunctions of the interval,
    /// `u_j(0) = 1`; smooth and in the domain of every power of the generator.
    RobinModes { coefficients: Vec<f64> },
}

fn default_from() -> f64 {
    0.3
}

fn default_to() -> f64 {
    0.7
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl McBlock {
    pub fn params(&self, workers: Option<usize>) -> McParams {
        McParams { n_paths: self.n_paths, dt: self.dt, seed: self.seed, workers }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeBlock {
    /// Grid nodes; odd counts keep Simpson weights available to measures.
    pub nodes: usize,
}

impl Default for PdeBlock {
    fn default() -> Self {
        PdeBlock { nodes: 401 }
    }
}

/// Which experiment to run, with its own parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// Mean boundary local time, with the closed form on the flat half-line.
    LocalTimeMean { points: Vec<f64>, times: Vec<f64> },
    /// Grid supremum of `E e^{λ l_t}` against the closed-form envelope.
    LocalTimeEnvelope { points: Vec<f64>, lambdas: Vec<f64>, times: Vec<f64> },
    /// Local time reconstructed from a comparison profile of the boundary distance.
    LocalTimeIdentity { points: Vec<f64>, t: f64, radius: f64 },
    /// Feynman–Kac Monte Carlo against the PDE reference, plus PDE order.
    RobinFeynmanKac { points: Vec<f64>, t: f64 },
    /// Neumann gradient by the Bismut formula against the PDE gradient.
    BismutGradient {
        points: Vec<f64>,
        t: f64,
        #[serde(default = "default_schedules")]
        schedules: Vec<String>,
    },
    /// PDE gradient norm against the Monte Carlo gradient envelope.
    HsuGradient { points: Vec<f64>, times: Vec<f64>, kappa1: f64, kappa2: Vec<f64> },
    /// Symmetry of `P_t^Q` in `L²(e^V dx)` for the observable and `g`.
    Symmetry { t: f64, g: ObservableSpec },
    /// Integration by parts for pairs in the Robin domain.
    DirichletForm { pairs: Vec<(ObservableSpec, ObservableSpec)> },
    /// Interior-potential approximation of the Robin semigroup.
    Schrodinger { point: f64, t: f64, radius: f64, indices: Vec<f64> },
    /// HWI slack, the semigroup log-Sobolev slack and the optimal schedule.
    Hwi(HwiSpec),
    /// `(P_t f − f)/t → Lf` for a member of the Robin domain.
    Generator { points: Vec<f64>, times: Vec<f64> },
}

fn default_schedules() -> Vec<String> {
    vec!["smoothstep".into(), "linear".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum HwiSpec {
    /// Closed-form version with collar radius `r`.
    Corollary { r: f64 },
    /// Version with the local-time envelope `η_λ` tabulated on
    /// `steps + 1` times up to `t_max`; `λ` defaults to `2σ`.
    Theorem {
        t_max: f64,
        steps: usize,
        #[serde(default)]
        lambda: Option<f64>,
    },
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::LocalTimeMean { .. } => "local_time_mean",
            ExperimentSpec::LocalTimeEnvelope { .. } => "local_time_envelope",
            ExperimentSpec::LocalTimeIdentity { .. } => "local_time_identity",
            ExperimentSpec::RobinFeynmanKac { .. } => "robin_feynman_kac",
            ExperimentSpec::BismutGradient { .. } => "bismut_gradient",
            ExperimentSpec::HsuGradient { .. } => "hsu_gradient",
            ExperimentSpec::Symmetry { .. } => "symmetry",
            ExperimentSpec::DirichletForm { .. } => "dirichlet_form",
            ExperimentSpec::Schrodinger { .. } => "schrodinger",
            ExperimentSpec::Hwi(_) => "hwi",
            ExperimentSpec::Generator { .. } => "generator",
        }
    }
}

/// One experiment run: where, with which drift, boundary coefficients and
/// observable, and at what Monte Carlo and PDE resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSpec,
    pub domain: DomainModel,
    #[serde(default = "default_drift")]
    pub drift: DriftSpec,
    /// One Robin coefficient per boundary component; zeros when omitted.
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default = "default_observable")]
    pub observable: ObservableSpec,
    pub mc: Option<McBlock>,
    #[serde(default)]
    pub pde: PdeBlock,
    /// Output directory; the command line and `ROBIN_OUT_DIR` take it
    /// from here when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_drift() -> DriftSpec {
    DriftSpec::Zero
}

fn default_observable() -> ObservableSpec {
    ObservableSpec::Constant { value: 1.0 }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fills defaults and checks what the schema cannot express.
    fn resolve(mut self) -> Result<Self> {
        self.domain.validate().map_err(|e| Error::Config(format!("domain: {e}")))?;
        let nb = self.domain.boundary_components();
        if self.q.is_empty() {
            self.q = vec![0.0; nb];
        }
        if self.q.len() != nb {
            return Err(Error::Config(format!(
                "q: {} domain has {nb} boundary component(s), got {} coefficient(s)",
                self.domain.name(),
                self.q.len()
            )));
        }
        if self.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("q: coefficients must be finite".into()));
        }
        if self.pde.nodes < 17 || self.pde.nodes % 2 == 0 {
            return Err(Error::Config(format!("pde.nodes: need an odd count of at least 17, got {}", self.pde.nodes)));
        }
        let needs_mc = !matches!(
            self.experiment,
            ExperimentSpec::Symmetry { .. }
                | ExperimentSpec::DirichletForm { .. }
                | ExperimentSpec::Hwi(_)
                | ExperimentSpec::Generator { .. }
        );
        match &self.mc {
            Some(mc) => mc.params(None).validate().map_err(|e| Error::Config(format!("mc: {e}")))?,
            None if needs_mc => {
                return Err(Error::Config(format!("mc: experiment '{}' needs an mc block", self.experiment.name())))
            }
            None => {}
        }
        self.drift.build(self.domain.dim()).map_err(|e| Error::Config(format!("drift: {e}")))?;
        Ok(self)
    }

    /// The resolved config without its output location, as hashed.
    pub fn canonical(&self) -> ExperimentConfig {
        ExperimentConfig { output_dir: None, ..self.clone() }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON.
    pub fn params_hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn seed(&self) -> Option<u64> {
        self.mc.map(|m| m.seed)
    }
}

/// JSON schema of [`ExperimentConfig`].
pub fn config_schema() -> serde_json::Value {
    use serde_json::json;
    let numbers = json!({"type": "array", "items": {"type": "number"}, "minItems": 1});
    let observable = json!({
        "oneOf": [
            {"type": "object", "additionalProperties": false, "required": ["kind", "value"],
             "properties": {"kind": {"const": "constant"}, "value": {"type": "number"}}},
            {"type": "object", "additionalProperties": false, "required": ["kind", "k"],
             "properties": {"kind": {"const": "cosine"}, "k": {"type": "number"}, "shift": {"type": "number"}}},
            {"type": "object", "additionalProperties": false, "required": ["kind", "center", "width"],
             "properties": {"kind": {"const": "gaussian"}, "center": {"type": "number"},
                            "width": {"type": "number", "exclusiveMinimum": 0}}},
            {"type": "object", "additionalProperties": false, "required": ["kind"],
             "properties": {"kind": {"const": "robin_blend"},
                            "from": {"type": "number", "minimum": 0, "maximum": 1},
                            "to": {"type": "number", "minimum": 0, "maximum": 1}}},
            {"type": "object", "additionalProperties": false, "required": ["kind", "coefficients"],
             "properties": {"kind": {"const": "robin_modes"}, "coefficients": numbers.clone()}}
        ]
    });
    let experiment = |name: &str, required: &[&str], props: serde_json::Value| {
        let mut p = props.as_object().cloned().unwrap_or_default();
        p.insert("name".into(), json!({"const": name}));
        let mut req = vec!["name"];
        req.extend_from_slice(required);
        json!({"type": "object", "additionalProperties": false, "required": req, "properties": p})
    };
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "ExperimentConfig",
        "type": "object",
        "additionalProperties": false,
        "required": ["experiment", "domain"],
        "properties": {
            "experiment": {"oneOf": [
                experiment("local_time_mean", &["points", "times"], json!({"points": numbers, "times": numbers})),
                experiment("local_time_envelope", &["points", "lambdas", "times"],
                           json!({"points": numbers, "lambdas": numbers, "times": numbers})),
                experiment("local_time_identity", &["points", "t", "radius"],
                           json!({"points": numbers, "t": {"type": "number"}, "radius": {"type": "number"}})),
                experiment("robin_feynman_kac", &["points", "t"], json!({"points": numbers, "t": {"type": "number"}})),
                experiment("bismut_gradient", &["points", "t"], json!({
                    "points": numbers, "t": {"type": "number"},
                    "schedules": {"type": "array", "items": {"enum": ["linear", "smoothstep"]}}})),
                experiment("hsu_gradient", &["points", "times", "kappa1", "kappa2"], json!({
                    "points": numbers, "times": numbers, "kappa1": {"type": "number"}, "kappa2": numbers})),
                experiment("symmetry", &["t", "g"], json!({"t": {"type": "number"}, "g": observable})),
                experiment("dirichlet_form", &["pairs"], json!({"pairs": {"type": "array", "minItems": 1,
                    "items": {"type": "array", "prefixItems": [observable, observable], "minItems": 2, "maxItems": 2}}})),
                experiment("schrodinger", &["point", "t", "radius", "indices"], json!({
                    "point": {"type": "number"}, "t": {"type": "number"}, "radius": {"type": "number"},
                    "indices": numbers})),
                {"type": "object", "required": ["name", "form"], "properties": {"name": {"const": "hwi"}},
                 "oneOf": [
                    {"additionalProperties": false, "required": ["r"],
                     "properties": {"name": {"const": "hwi"}, "form": {"const": "corollary"}, "r": {"type": "number"}}},
                    {"additionalProperties": false, "required": ["t_max", "steps"],
                     "properties": {"name": {"const": "hwi"}, "form": {"const": "theorem"},
                                    "t_max": {"type": "number"}, "steps": {"type": "integer", "minimum": 1},
                                    "lambda": {"type": "number", "minimum": 0}}}
                 ]},
                experiment("generator", &["points", "times"], json!({"points": numbers, "times": numbers}))
            ]},
            "domain": {"oneOf": [
                {"type": "object", "additionalProperties": false, "required": ["kind"],
                 "properties": {"kind": {"const": "half_line"}}},
                {"type": "object", "additionalProperties": false, "required": ["kind", "length"],
                 "properties": {"kind": {"const": "interval"}, "length": {"type": "number", "exclusiveMinimum": 0}}},
                {"type": "object", "additionalProperties": false, "required": ["kind", "radius", "dim"],
                 "properties": {"kind": {"const": "ball"}, "radius": {"type": "number", "exclusiveMinimum": 0},
                                "dim": {"type": "integer", "minimum": 1, "maximum": 3}}},
                {"type": "object", "additionalProperties": false, "required": ["kind", "r_in", "r_out"],
                 "properties": {"kind": {"const": "annulus"}, "r_in": {"type": "number", "exclusiveMinimum": 0},
                                "r_out": {"type": "number"}}}
            ]},
            "drift": {"oneOf": [
                {"type": "object", "additionalProperties": false, "required": ["kind"],
                 "properties": {"kind": {"const": "zero"}}},
                {"type": "object", "additionalProperties": false, "required": ["kind", "a"],
                 "properties": {"kind": {"const": "quadratic"}, "a": {"type": "number"},
                                "center": {"type": "array", "items": {"type": "number"}, "maxItems": 3}}},
                {"type": "object", "additionalProperties": false, "required": ["kind", "gradient"],
                 "properties": {"kind": {"const": "linear"},
                                "gradient": {"type": "array", "items": {"type": "number"}, "maxItems": 3}}}
            ]},
            "q": {"type": "array", "items": {"type": "number"}, "maxItems": 2},
            "observable": observable,
            "mc": {"type": "object", "additionalProperties": false, "required": ["n_paths", "dt", "seed"],
                   "properties": {"n_paths": {"type": "integer", "minimum": 1},
                                  "dt": {"type": "number", "exclusiveMinimum": 0},
                                  "seed": {"type": "integer", "minimum": 0}}},
            "pde": {"type": "object", "additionalProperties": false, "required": ["nodes"],
                    "properties": {"nodes": {"type": "integer", "minimum": 17}}},
            "output_dir": {"type": "string"}
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "experiment": {"name": "robin_feynman_kac", "points": [0.5], "t": 0.25},
        "domain": {"kind": "interval", "length": 1.0},
        "q": [0.5, -0.3],
        "observable": {"kind": "cosine", "k": 1.0},
        "mc": {"n_paths": 100, "dt": 0.01, "seed": 7}
    }"#;

    #[test]
    fn parses_and_fills_defaults() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.drift, DriftSpec::Zero);
        assert_eq!(c.pde.nodes, 401);
        assert_eq!(c.experiment.name(), "robin_feynman_kac");
        let half = BASE.replace(r#""kind": "interval", "length": 1.0"#, r#""kind": "half_line""#).replace("[0.5, -0.3]", "[]");
        assert_eq!(ExperimentConfig::from_json(&half).unwrap().q, vec![0.0]);
    }

    #[test]
    fn unknown_keys_are_named() {
        for (from, to, key) in [
            (r#""seed": 7"#, r#""seed": 7, "sead": 1"#, "sead"),
            (r#""t": 0.25"#, r#""t": 0.25, "horizon": 1"#, "horizon"),
            (r#""q": [0.5, -0.3],"#, r#""q": [0.5, -0.3], "extra": 0,"#, "extra"),
        ] {
            let err = ExperimentConfig::from_json(&BASE.replace(from, to)).unwrap_err();
            assert!(matches!(&err, Error::Config(m) if m.contains(key)), "{err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn semantic_checks() {
        assert!(ExperimentConfig::from_json(&BASE.replace("[0.5, -0.3]", "[0.5]")).is_err());
        assert!(ExperimentConfig::from_json(&BASE.replace(r#""length": 1.0"#, r#""length": -1.0"#)).is_err());
        let no_mc = BASE.replace(r#","mc": {"n_paths": 100, "dt": 0.01, "seed": 7}"#, "");
        let no_mc = no_mc.replace("\n        \"mc\": {\"n_paths\": 100, \"dt\": 0.01, \"seed\": 7}", "");
        let no_mc = no_mc.replace("\"observable\": {\"kind\": \"cosine\", \"k\": 1.0},", "\"observable\": {\"kind\": \"cosine\", \"k\": 1.0}");
        assert!(ExperimentConfig::from_json(&no_mc).is_err());
    }

    #[test]
    fn hash_ignores_output_location_only() {
        let a = ExperimentConfig::from_json(BASE).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("elsewhere".into());
        assert_eq!(a.params_hash(), b.params_hash());
        assert_eq!(a.params_hash().len(), 16);
        let c = ExperimentConfig::from_json(&BASE.replace(r#""seed": 7"#, r#""seed": 8"#)).unwrap();
        assert_ne!(a.params_hash(), c.params_hash());
    }
}
