//! Built-in benchmark problems with analytic derivatives.

mod flat_quartic;
mod highdim;
mod quad2d;
mod solution;

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fd;
use crate::mapping::ReductionMapping;
use crate::reduced::{Objective, ReducedProblem};

pub use flat_quartic::{flat_quartic, make_flat_quartic_sine, SineInner};
pub use highdim::{coupling_matrix, make_highdim_quadratic, make_highdim_tanh, DEFAULT_TANH_ALPHA};
pub use quad2d::make_quad2d;
pub use solution::SolutionSet;

const VALIDATION_POINTS: usize = 20;
const VALIDATION_SEED: u64 = 0x5eed;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub objective: Objective,
    pub mappings: Vec<(String, ReductionMapping)>,
    pub known_solution_set: Option<SolutionSet>,
}

impl ProblemSpec {
    /// Assembles a problem and validates its derivatives by finite differences.
    pub fn new(
        name: &str,
        params: BTreeMap<String, f64>,
        objective: Objective,
        mappings: Vec<(String, ReductionMapping)>,
        known_solution_set: Option<SolutionSet>,
    ) -> Result<Self> {
        let spec = Self {
            name: name.to_string(),
            params,
            objective,
            mappings,
            known_solution_set,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mapping_names(&self) -> Vec<&str> {
        self.mappings.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn mapping(&self, name: &str) -> Result<&ReductionMapping> {
        self.mappings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| {
                Error::InvalidParam(format!(
                    "problem {} has no mapping {name:?} (available: {})",
                    self.name,
                    self.mapping_names().join(", ")
                ))
            })
    }

    pub fn reduced(&self, mapping: &str) -> Result<ReducedProblem> {
        ReducedProblem::new(self.objective.clone(), self.mapping(mapping)?.clone())
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_POINTS {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let g = self.objective.gradient(&x)?;
            let g_fd = fd::gradient(|y| self.objective.value(y), &x, fd::first_order_step(&x))?;
            if (&g - &g_fd).norm() > 1e-5 * (1.0 + g.norm()) {
                return Err(Error::InvalidParam(format!(
                    "{}: gradient disagrees with finite differences",
                    self.name
                )));
            }
            let h = self.objective.hessian(&x)?;
            let h_fd = fd::jacobian(|y| self.objective.gradient(y), &x, fd::first_order_step(&x))?;
            if (h.matrix() - &h_fd).norm() > 1e-4 * (1.0 + h.frobenius_norm()) {
                return Err(Error::InvalidParam(format!(
                    "{}: Hessian disagrees with finite differences",
                    self.name
                )));
            }
        }
        if let Some(SolutionSet::Point(x)) = &self.known_solution_set {
            let g = self.objective.gradient(x)?.norm();
            if g > 1e-10 {
                return Err(Error::NotCritical { grad_norm: g });
            }
        }
        Ok(())
    }
}

/// Euclidean distance from `x` to the known solution set.
pub fn distance_to_solution(spec: &ProblemSpec, x: &DVector<f64>) -> Result<f64> {
    let set = spec.known_solution_set.as_ref().ok_or(Error::NoSolutionSet)?;
    if x.len() != spec.objective.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.objective.dim(),
            got: x.len(),
            context: "distance query",
        });
    }
    Ok(set.distance(x))
}

/// Curvature `f''/(1+f'²)^{3/2}` of the graph of a scalar function.
pub fn plane_curve_curvature(d1: f64, d2: f64) -> f64 {
    d2 / (1.0 + d1 * d1).powf(1.5)
}

/// Problem lookup by name, using defaults for omitted parameters.
pub fn make_problem(name: &str, params: &BTreeMap<String, f64>) -> Result<ProblemSpec> {
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    let int = |k: &str, default: f64| -> Result<usize> {
        let v = get(k, default);
        if v.fract() != 0.0 || v < 1.0 {
            return Err(Error::InvalidParam(format!("{k} must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    };
    let seed = get("seed", 0.0);
    if seed.fract() != 0.0 || seed < 0.0 {
        return Err(Error::InvalidParam(format!("seed must be a nonnegative integer, got {seed}")));
    }
    match name {
        "quad2d" => make_quad2d(get("M", 10.0)),
        "flat-quartic-sine" => make_flat_quartic_sine(get("a", -0.5), get("b", 0.5)),
        "quad-hd" => make_highdim_quadratic(int("n", 40.0)?, get("lambda", 10.0), seed as u64),
        "tanh-hd" => make_highdim_tanh(
            int("n", 40.0)?,
            get("lambda", 10.0),
            get("alpha", DEFAULT_TANH_ALPHA),
            seed as u64,
        ),
        other => Err(Error::InvalidParam(format!(
            "unknown problem {other:?} (expected quad2d, flat-quartic-sine, quad-hd or tanh-hd)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_name() {
        let p = make_problem("quad2d", &BTreeMap::new()).unwrap();
        assert_eq!(p.param("M"), Some(10.0));
        assert!(make_problem("nope", &BTreeMap::new()).is_err());
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), 2.5);
        assert!(make_problem("quad-hd", &params).is_err());
        assert!(p.mapping("missing").is_err());
    }

    #[test]
    fn curvature_helper() {
        assert_eq!(plane_curve_curvature(0.0, 2.0), 2.0);
        assert!((plane_curve_curvature(1.0, 1.0) - 2f64.powf(-1.5)).abs() < 1e-15);
    }
}
