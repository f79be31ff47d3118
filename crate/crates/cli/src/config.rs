//! Run configuration: a TOML or JSON file (picked by extension) with
//! `[problem]`, `[mapping]`, `[solver]` and `[region]` sections. Command-line
//! flags are applied on top with [`Overrides`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use redmap::families::gaussian_vector;
use redmap::optim::{Method, MetricSolver, SolverConfig, StepRule};
use redmap::problems::{make_problem, ProblemSpec};
use redmap::spectral::Region;
use redmap::ReducedProblem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSection {
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    GdFull,
    GdReduced,
    Geoprec,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::GdFull => Method::GdFull,
            MethodName::GdReduced => Method::GdReduced,
            MethodName::Geoprec => Method::GeoPrecGd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepName {
    Armijo,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSolverName {
    Direct,
    Cg,
    Woodbury,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub method: MethodName,
    pub step: StepName,
    /// Fixed step size.
    pub eta: f64,
    pub c1: f64,
    pub shrink: f64,
    pub eta0: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub metric_solver: MetricSolverName,
    pub cg_rel_tol: f64,
    pub record_time: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: MethodName::Geoprec,
            step: StepName::Armijo,
            eta: 1.0,
            c1: 1e-4,
            shrink: 0.5,
            eta0: 1.0,
            grad_tol: 1e-8,
            max_iter: 1000,
            metric_solver: MetricSolverName::Direct,
            cg_rel_tol: 1e-10,
            record_time: false,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self) -> CliResult<SolverConfig> {
        let step = match self.step {
            StepName::Fixed => StepRule::Fixed { eta: self.eta },
            StepName::Armijo => StepRule::Armijo {
                c1: self.c1,
                shrink: self.shrink,
                eta0: self.eta0,
            },
        };
        let solver = match self.metric_solver {
            MetricSolverName::Direct => MetricSolver::Direct,
            MetricSolverName::Cg => MetricSolver::Cg {
                rel_tol: self.cg_rel_tol,
                max_iter: None,
            },
            MetricSolverName::Woodbury => MetricSolver::WoodburyAffineProjection,
        };
        let mut cfg = SolverConfig::new(self.method.into())
            .with_step(step)
            .with_grad_tol(self.grad_tol)
            .with_max_iter(self.max_iter)
            .with_metric_solver(solver);
        cfg.record_time = self.record_time;
        cfg.validate().map_err(CliError::config)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    /// Reduced-space center; defaults to the reduced minimiser when the
    /// problem has a known solution point, otherwise the origin.
    pub center: Option<Vec<f64>>,
    pub radius: f64,
    pub samples: usize,
    /// Defaults to the global seed.
    pub seed: Option<u64>,
}

impl Default for RegionSection {
    fn default() -> Self {
        Self {
            center: None,
            radius: DEFAULT_RADIUS,
            samples: DEFAULT_SAMPLES,
            seed: None,
        }
    }
}

/// A literal vector, `"unit"`, `"zero"`, `"random"` or `"random(<seed>)"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Vector(Vec<f64>),
    Preset(String),
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Preset("random".into())
    }
}

impl StartSpec {
    pub fn parse(s: &str) -> CliResult<Self> {
        let t = s.trim();
        if t.starts_with('[') {
            let v: Vec<f64> = serde_json::from_str(t).map_err(|e| CliError::Config(format!("bad start vector {t:?}: {e}")))?;
            return Ok(StartSpec::Vector(v));
        }
        let spec = StartSpec::Preset(t.to_string());
        spec.resolve(1, 0)?;
        Ok(spec)
    }

    /// The start in `R^dim`; bare `random` uses `seed`.
    pub fn resolve(&self, dim: usize, seed: u64) -> CliResult<DVector<f64>> {
        match self {
            StartSpec::Vector(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
            StartSpec::Vector(v) => Err(CliError::Config(format!(
                "start has {} entries, the reduced space has {dim}",
                v.len()
            ))),
            StartSpec::Preset(p) => match p.as_str() {
                "unit" => Ok(DVector::from_element(dim, 1.0)),
                "zero" => Ok(DVector::zeros(dim)),
                "random" => Ok(seeded_start(dim, seed)),
                other => {
                    let inner = other
                        .strip_prefix("random(")
                        .and_then(|r| r.strip_suffix(')'))
                        .and_then(|r| r.trim().parse::<u64>().ok())
                        .ok_or_else(|| {
                            CliError::Config(format!(
                                "unknown start {other:?} (expected unit, zero, random, random(<seed>) or a vector)"
                            ))
                        })?;
                    Ok(seeded_start(dim, inner))
                }
            },
        }
    }
}

/// Standard normal start drawn from ChaCha8 seeded with `seed`.
pub fn seeded_start(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_vector(&mut rng, dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub mapping: MappingSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub region: RegionSection,
    #[serde(default)]
    pub start: StartSpec,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: &str, mapping: &str) -> Self {
        Self {
            problem: ProblemSection {
                name: problem.to_string(),
                params: BTreeMap::new(),
            },
            mapping: MappingSection {
                name: mapping.to_string(),
            },
            solver: SolverSection::default(),
            region: RegionSection::default(),
            start: StartSpec::default(),
            out_dir: None,
        }
    }

    pub fn from_str_with_format(text: &str, json: bool) -> CliResult<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("invalid TOML config: {e}")))
        }
    }

    /// Reads a config file; `.json` is parsed as JSON, anything else as TOML.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::from_str_with_format(&text, json)
    }

    pub fn build_problem(&self) -> CliResult<ProblemSpec> {
        make_problem(&self.problem.name, &self.problem.params).map_err(CliError::config)
    }

    /// Problem definition plus the reduced problem; checks both names exist.
    pub fn build(&self) -> CliResult<(ProblemSpec, ReducedProblem)> {
        let spec = self.build_problem()?;
        let p = spec.reduced(&self.mapping.name).map_err(CliError::config)?;
        Ok((spec, p))
    }

    pub fn region(&self, spec: &ProblemSpec, p: &ReducedProblem, seed: u64) -> CliResult<Region> {
        let center = match &self.region.center {
            Some(c) if c.len() == p.n1() => DVector::from_column_slice(c),
            Some(c) => {
                return Err(CliError::Config(format!(
                    "region center has {} entries, the reduced space has {}",
                    c.len(),
                    p.n1()
                )))
            }
            None => reduced_minimiser(spec, p),
        };
        Region::new(center, self.region.radius, self.region.samples, self.region.seed.unwrap_or(seed)).map_err(CliError::config)
    }
}

/// First `n₁` coordinates of the solution anchor, or the origin.
pub fn reduced_minimiser(spec: &ProblemSpec, p: &ReducedProblem) -> DVector<f64> {
    match &spec.known_solution_set {
        Some(s) => s.anchor().rows(0, p.n1()).into_owned(),
        None => DVector::zeros(p.n1()),
    }
}

/// Tangent of the solution set at its anchor, or an empty basis.
pub fn solution_tangent(spec: &ProblemSpec) -> DMatrix<f64> {
    match &spec.known_solution_set {
        Some(s) => s.tangent_at(&s.anchor()),
        None => DMatrix::zeros(spec.objective.dim(), 0),
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub mapping: Option<String>,
    pub params: Vec<(String, f64)>,
    pub radius: Option<f64>,
    pub samples: Option<usize>,
    pub start: Option<StartSpec>,
    pub method: Option<MethodName>,
    pub max_iter: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    /// Applies the flags to `base`, or builds a config from flags alone.
    pub fn apply(&self, base: Option<RunConfig>) -> CliResult<RunConfig> {
        let mut cfg = match (base, &self.problem) {
            (Some(c), _) => c,
            (None, Some(name)) => {
                let mapping = self
                    .mapping
                    .clone()
                    .or_else(|| default_mapping(name).map(str::to_string))
                    .ok_or_else(|| CliError::Config(format!("no mapping given for problem {name:?}")))?;
                RunConfig::new(name, &mapping)
            }
            (None, None) => return Err(CliError::Config("give --config or --problem".into())),
        };
        if let Some(p) = &self.problem {
            cfg.problem.name = p.clone();
        }
        if let Some(m) = &self.mapping {
            cfg.mapping.name = m.clone();
        }
        for (k, v) in &self.params {
            cfg.problem.params.insert(k.clone(), *v);
        }
        if let Some(r) = self.radius {
            cfg.region.radius = r;
        }
        if let Some(s) = self.samples {
            cfg.region.samples = s;
        }
        if let Some(s) = &self.start {
            cfg.start = s.clone();
        }
        if let Some(m) = self.method {
            cfg.solver.method = m;
        }
        if let Some(n) = self.max_iter {
            cfg.solver.max_iter = n;
        }
        if let Some(o) = &self.out_dir {
            cfg.out_dir = Some(o.clone());
        }
        Ok(cfg)
    }
}

/// Mapping used when only a problem name is given.
pub fn default_mapping(problem: &str) -> Option<&'static str> {
    match problem {
        "quad2d" => Some("linear"),
        "flat-quartic-sine" => Some("sin"),
        "quad-hd" => Some("affine"),
        "tanh-hd" => Some("tanh"),
        _ => None,
    }
}

/// `KEY=VALUE` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("value of {k} is not a number: {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
start = "random(3)"

[problem]
name = "quad2d"
params = { M = 10 }

[mapping]
name = "nonlinear"

[solver]
method = "gd_reduced"
step = "fixed"
eta = 0.01

[region]
radius = 1.0
samples = 16
"#;

    #[test]
    fn toml_and_json_agree() {
        let a = RunConfig::from_str_with_format(TOML, false).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = RunConfig::from_str_with_format(&json, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.problem.params["M"], 10.0);
        assert_eq!(a.solver.method, MethodName::GdReduced);
        assert_eq!(a.solver.max_iter, 1000);
        let cfg = a.solver.to_config().unwrap();
        assert_eq!(cfg.step_rule, StepRule::Fixed { eta: 0.01 });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = TOML.replace("radius", "raduis");
        assert!(matches!(RunConfig::from_str_with_format(&bad, false), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let base = RunConfig::from_str_with_format(TOML, false).unwrap();
        let o = Overrides {
            mapping: Some("linear".into()),
            params: vec![("M".into(), 4.0)],
            samples: Some(3),
            ..Overrides::default()
        };
        let c = o.apply(Some(base)).unwrap();
        assert_eq!(c.mapping.name, "linear");
        assert_eq!(c.problem.params["M"], 4.0);
        assert_eq!(c.region.samples, 3);
        assert_eq!(c.region.radius, 1.0);
    }

    #[test]
    fn names_are_checked() {
        let mut c = RunConfig::new("quad2d", "curvy");
        assert!(matches!(c.build(), Err(CliError::Config(_))));
        c.problem.name = "quad3d".into();
        assert!(matches!(c.build(), Err(CliError::Config(_))));
    }

    #[test]
    fn start_presets() {
        assert_eq!(StartSpec::parse("unit").unwrap().resolve(3, 0).unwrap(), DVector::from_element(3, 1.0));
        let r = StartSpec::parse("random(5)").unwrap().resolve(4, 0).unwrap();
        assert_eq!(r, seeded_start(4, 5));
        assert_eq!(StartSpec::Preset("random".into()).resolve(4, 5).unwrap(), r);
        assert_eq!(StartSpec::parse("[1, 2]").unwrap().resolve(2, 0).unwrap()[1], 2.0);
        assert!(StartSpec::parse("randm(5)").is_err());
        assert!(StartSpec::parse("[1, 2]").unwrap().resolve(3, 0).is_err());
    }

    #[test]
    fn param_flags() {
        assert_eq!(parse_param("M=10").unwrap(), ("M".to_string(), 10.0));
        assert!(parse_param("M").is_err());
        assert!(parse_param("M=x").is_err());
    }
}
