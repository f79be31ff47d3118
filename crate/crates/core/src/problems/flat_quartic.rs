use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ProblemSpec, SolutionSet};
use crate::error::{Error, Result};
use crate::mapping::{InnerObjective, InnerProblem, ReductionMapping};
use crate::reduced::{Objective, ObjectiveFn};
use crate::tensor::Tensor3;

/// Flat-bottom quartic: zero on `[a, b]`, `(x−b)⁴` to the right, `(a−x)⁴` to the left.
/// Returns `(φ, φ', φ'')`.
pub fn flat_quartic(x: f64, a: f64, b: f64) -> (f64, f64, f64) {
    if x > b {
        let d = x - b;
        (d.powi(4), 4.0 * d.powi(3), 12.0 * d * d)
    } else if x < a {
        let d = x - a;
        (d.powi(4), 4.0 * d.powi(3), 12.0 * d * d)
    } else {
        (0.0, 0.0, 0.0)
    }
}

/// `f(x₁, x₂) = φ(x₁) + (x₂ − sin x₁)²`
struct FlatQuarticSine {
    a: f64,
    b: f64,
}

impl ObjectiveFn for FlatQuarticSine {
    fn value(&self, x: &DVector<f64>) -> f64 {
        flat_quartic(x[0], self.a, self.b).0 + (x[1] - x[0].sin()).powi(2)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, d1, _) = flat_quartic(x[0], self.a, self.b);
        let r = x[1] - x[0].sin();
        DVector::from_vec(vec![d1 - 2.0 * r * x[0].cos(), 2.0 * r])
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (_, _, d2) = flat_quartic(x[0], self.a, self.b);
        let (s, c) = x[0].sin_cos();
        let r = x[1] - s;
        DMatrix::from_row_slice(2, 2, &[d2 + 2.0 * r * s + 2.0 * c * c, -2.0 * c, -2.0 * c, 2.0])
    }
}

/// `G(x₁, u) = (u − sin x₁)²`, whose argmin is `u = sin x₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SineInner;

impl InnerObjective for SineInner {
    fn n1(&self) -> usize {
        1
    }
    fn n2(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (u[0] - x[0].sin()).powi(2)
    }
    fn grad_u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, 2.0 * (u[0] - x[0].sin()))
    }
    fn hess_uu(&self, _x: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 2.0)
    }
    fn hess_x1u(&self, x: &DVector<f64>, _u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -2.0 * x[0].cos())
    }
    fn third_x1x1u(&self, x: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::from_fn(1, 1, 1, |_, _, _| 2.0 * x[0].sin()))
    }
    fn third_x1uu(&self, _x: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::zeros(1, 1, 1))
    }
    fn third_uuu(&self, _x: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::zeros(1, 1, 1))
    }
}

/// Flat-bottom quartic plus a sine valley. Mappings: `sin`, `sin-implicit`,
/// `zero` and `linear` (y = x). Minimisers: `{(t, sin t) : t ∈ [a, b]}`.
pub fn make_flat_quartic_sine(a: f64, b: f64) -> Result<ProblemSpec> {
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParam(format!("need a < b, got a = {a}, b = {b}")));
    }
    let objective = Objective::new(1, 1, Arc::new(FlatQuarticSine { a, b }))?;
    let sine = ReductionMapping::closed_form(
        1,
        1,
        Arc::new(|x| x.map(f64::sin)),
        Arc::new(|x| DMatrix::from_element(1, 1, x[0].cos())),
        Arc::new(|x| Tensor3::from_fn(1, 1, 1, |_, _, _| -x[0].sin())),
    )?;
    let implicit = ReductionMapping::implicit(InnerProblem::new(Arc::new(SineInner)))?;
    let zero = ReductionMapping::constant(1, DVector::zeros(1))?;
    let linear = ReductionMapping::affine(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1))?;
    let mut params = BTreeMap::new();
    params.insert("a".to_string(), a);
    params.insert("b".to_string(), b);
    ProblemSpec::new(
        "flat-quartic-sine",
        params,
        objective,
        vec![
            ("sin".into(), sine),
            ("sin-implicit".into(), implicit),
            ("zero".into(), zero),
            ("linear".into(), linear),
        ],
        Some(SolutionSet::SineCurve { a, b }),
    )
}
