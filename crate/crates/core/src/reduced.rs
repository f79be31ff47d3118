//! The reduced objective `F = f ∘ Φ`, its exact derivatives and the pullback metric.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linops::{sym_eig, SymMatrix};
use crate::mapping::{concat, stack_d_phi, ReductionMapping};
use crate::tensor::Tensor3;

/// A twice-differentiable scalar field on `R^{n₁+n₂}`.
pub trait ObjectiveFn: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

type ValueFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

struct Closures {
    value: ValueFn,
    gradient: GradFn,
    hessian: HessFn,
}

impl ObjectiveFn for Closures {
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.hessian)(x)
    }
}

#[derive(Clone)]
pub struct Objective {
    pub n1: usize,
    pub n2: usize,
    pub func: Arc<dyn ObjectiveFn>,
    /// Subtracted before PL estimation; the minimum is taken to be 0 by default.
    pub known_min_value: f64,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("known_min_value", &self.known_min_value)
            .finish()
    }
}

impl Objective {
    pub fn new(n1: usize, n2: usize, func: Arc<dyn ObjectiveFn>) -> Result<Self> {
        if n1 == 0 {
            return Err(Error::InvalidParam("objective needs n1 >= 1".into()));
        }
        Ok(Self {
            n1,
            n2,
            func,
            known_min_value: 0.0,
        })
    }

    pub fn from_fns(
        n1: usize,
        n2: usize,
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
        hessian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let closures = Closures {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
        };
        Self::new(n1, n2, Arc::new(closures))
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    fn check(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
                context: "objective input",
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.check(x)?;
        let v = self.func.value(x);
        v.is_finite().then_some(v).ok_or(Error::NonFinite("objective value"))
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x)?;
        let g = self.func.gradient(x);
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: g.len(),
                context: "objective gradient",
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective gradient"));
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Result<SymMatrix> {
        self.check(x)?;
        let h = SymMatrix::new(self.func.hessian(x))?;
        if h.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: h.dim(),
                context: "objective hessian",
            });
        }
        if !h.is_finite() {
            return Err(Error::NonFinite("objective hessian"));
        }
        Ok(h)
    }
}

/// Everything known about `F` at one reduced point.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub x1: DVector<f64>,
    /// `Φ(x₁)`
    pub x: DVector<f64>,
    pub value: f64,
    /// `∇f(Φ(x₁))`
    pub grad_full: DVector<f64>,
    /// `DΨ(x₁)`
    pub jacobian: DMatrix<f64>,
    /// `∇²f(Φ(x₁))`, present at order 2.
    pub hess_full: Option<SymMatrix>,
    /// `D²Ψ(x₁)`, present at order 2.
    pub second: Option<Tensor3>,
}

impl PointEval {
    pub fn d_phi(&self) -> DMatrix<f64> {
        stack_d_phi(&self.jacobian)
    }

    pub fn grad_x2(&self) -> DVector<f64> {
        let n1 = self.x1.len();
        self.grad_full.rows(n1, self.grad_full.len() - n1).into_owned()
    }

    /// `DΦᵀ ∇f`
    pub fn grad_reduced(&self) -> DVector<f64> {
        let n1 = self.x1.len();
        self.grad_full.rows(0, n1) + self.jacobian.transpose() * self.grad_x2()
    }

    /// `I + DΨᵀDΨ`
    pub fn metric(&self) -> SymMatrix {
        let n1 = self.x1.len();
        SymMatrix::symmetrize(DMatrix::identity(n1, n1) + self.jacobian.transpose() * &self.jacobian)
    }

    /// `DΦᵀ ∇²f DΦ`, the part of `∇²F` that ignores curvature of the graph.
    pub fn hess_first_part(&self) -> SymMatrix {
        let h = self.hess_full.as_ref().expect("order-2 evaluation");
        h.congruence(&self.d_phi())
    }

    /// `C = Σ_k D²Ψ[k] · ∂f/∂x₂ₖ`
    pub fn correction(&self) -> SymMatrix {
        let t = self.second.as_ref().expect("order-2 evaluation");
        SymMatrix::symmetrize(t.contract_first(&self.grad_x2()))
    }

    pub fn hess_reduced(&self) -> SymMatrix {
        SymMatrix::symmetrize(self.hess_first_part().into_inner() + self.correction().into_inner())
    }
}

#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub objective: Objective,
    pub mapping: ReductionMapping,
}

impl ReducedProblem {
    pub fn new(objective: Objective, mapping: ReductionMapping) -> Result<Self> {
        if objective.n1 != mapping.n1() || objective.n2 != mapping.n2() {
            return Err(Error::InvalidParam(format!(
                "objective split {}+{} does not match mapping {}->{}",
                objective.n1,
                objective.n2,
                mapping.n1(),
                mapping.n2()
            )));
        }
        Ok(Self { objective, mapping })
    }

    pub fn n1(&self) -> usize {
        self.objective.n1
    }

    /// Evaluates the mapping jet and objective at `Φ(x₁)`; `order` is 1 or 2.
    pub fn eval(&self, x1: &DVector<f64>, order: usize) -> Result<PointEval> {
        let jet = self.mapping.jet(x1, order.clamp(1, 2))?;
        let x = concat(x1, &jet.value);
        let value = self.objective.value(&x)?;
        let grad_full = self.objective.gradient(&x)?;
        let hess_full = if order >= 2 {
            Some(self.objective.hessian(&x)?)
        } else {
            None
        };
        Ok(PointEval {
            x1: x1.clone(),
            x,
            value,
            grad_full,
            jacobian: jet.jacobian.expect("order >= 1"),
            hess_full,
            second: jet.second,
        })
    }

    pub fn f_reduced(&self, x1: &DVector<f64>) -> Result<f64> {
        let x = self.mapping.phi(x1)?;
        self.objective.value(&x)
    }

    pub fn grad_reduced(&self, x1: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.eval(x1, 1)?.grad_reduced())
    }

    pub fn hess_reduced(&self, x1: &DVector<f64>) -> Result<SymMatrix> {
        Ok(self.eval(x1, 2)?.hess_reduced())
    }

    pub fn correction_term(&self, x1: &DVector<f64>) -> Result<SymMatrix> {
        Ok(self.eval(x1, 2)?.correction())
    }

    pub fn pullback_metric(&self, x1: &DVector<f64>) -> Result<SymMatrix> {
        let j = self.mapping.d_psi(x1)?;
        let n1 = j.ncols();
        Ok(SymMatrix::symmetrize(DMatrix::identity(n1, n1) + j.transpose() * &j))
    }

    /// `(m^Φ, M^Φ)`, the extreme eigenvalues of `R`.
    pub fn metric_extremes(&self, x1: &DVector<f64>) -> Result<(f64, f64)> {
        let e = sym_eig(&self.pullback_metric(x1)?)?;
        Ok((e.min(), e.max()))
    }
}
