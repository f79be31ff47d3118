use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ProblemSpec, SolutionSet};
use crate::error::{Error, Result};
use crate::mapping::ReductionMapping;
use crate::reduced::{Objective, ObjectiveFn};
use crate::tensor::Tensor3;

/// `f(x₁, x₂) = x₁² + M(x₂ − x₁)²`
struct Quad2d {
    m: f64,
}

impl ObjectiveFn for Quad2d {
    fn value(&self, x: &DVector<f64>) -> f64 {
        x[0] * x[0] + self.m * (x[1] - x[0]).powi(2)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = x[1] - x[0];
        DVector::from_vec(vec![2.0 * x[0] - 2.0 * self.m * d, 2.0 * self.m * d])
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_row_slice(2, 2, &[2.0 + 2.0 * m, -2.0 * m, -2.0 * m, 2.0 * m])
    }
}

/// Two-variable quadratic with mappings `linear` (y = x), `fixed` (y = 0) and
/// `nonlinear` (y = x − 2 sin x).
pub fn make_quad2d(m_param: f64) -> Result<ProblemSpec> {
    if !(m_param > 0.0 && m_param.is_finite()) {
        return Err(Error::InvalidParam(format!("M must be positive, got {m_param}")));
    }
    let objective = Objective::new(1, 1, Arc::new(Quad2d { m: m_param }))?;
    let linear = ReductionMapping::affine(DMatrix::from_element(1, 1, 1.0), DVector::zeros(1))?;
    let fixed = ReductionMapping::constant(1, DVector::zeros(1))?;
    let nonlinear = ReductionMapping::closed_form(
        1,
        1,
        Arc::new(|x| x.map(|t| t - 2.0 * t.sin())),
        Arc::new(|x| DMatrix::from_element(1, 1, 1.0 - 2.0 * x[0].cos())),
        Arc::new(|x| Tensor3::from_fn(1, 1, 1, |_, _, _| 2.0 * x[0].sin())),
    )?;
    let mut params = BTreeMap::new();
    params.insert("M".to_string(), m_param);
    ProblemSpec::new(
        "quad2d",
        params,
        objective,
        vec![
            ("linear".into(), linear),
            ("fixed".into(), fixed),
            ("nonlinear".into(), nonlinear),
        ],
        Some(SolutionSet::Point(DVector::zeros(2))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::sym_eig;

    #[test]
    fn hessian_spectrum_m10() {
        let p = make_quad2d(10.0).unwrap();
        let h = p.objective.hessian(&DVector::zeros(2)).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_row_slice(2, 2, &[22.0, -20.0, -20.0, 20.0]));
        let e = sym_eig(&h).unwrap();
        let r = 401f64.sqrt();
        assert!((e.values[0] - (21.0 - r)).abs() < 1e-12);
        assert!((e.values[1] - (21.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn figure_one_instance_and_origin() {
        for m in [2.0, 10.0, 0.3] {
            let p = make_quad2d(m).unwrap();
            assert_eq!(p.objective.gradient(&DVector::zeros(2)).unwrap(), DVector::zeros(2));
        }
        let p = make_quad2d(2.0).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(p.objective.value(&x).unwrap(), 1.0 + 2.0);
    }

    #[test]
    fn rejects_nonpositive_m() {
        assert!(matches!(make_quad2d(0.0), Err(Error::InvalidParam(_))));
        assert!(matches!(make_quad2d(-1.0), Err(Error::InvalidParam(_))));
    }
}
