//! Reduction mappings `Φ(x₁) = (x₁, Ψ(x₁))` and their derivatives.
//!
//! Implicit mappings `Ψ(x₁) = argmin_u G(x₁, u)` are solved by damped Newton
//! and differentiated through the stationarity condition `∇_u G = 0`.
//!
//! Tensor layouts (first index always runs over `u`):
//! - `D²Ψ`: `(n₂, n₁, n₁)`, `[k][i][j] = ∂²Ψ_k/∂x_i∂x_j`
//! - `∇²_{x₁u}G`: `n₂ × n₁`, `[(k, i)] = ∂²G/∂u_k∂x_i`
//! - `∇³_{x₁x₁u}G`: `(n₂, n₁, n₁)`
//! - `∇³_{x₁uu}G`: `(n₂, n₁, n₂)`, `[k][i][l] = ∂³G/∂u_k∂x_i∂u_l`
//! - `∇³_{uuu}G`: `(n₂, n₂, n₂)`

use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linops::{sym_eig, SymMatrix};
use crate::tensor::Tensor3;

pub type VectorFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(&DVector<f64>) -> Tensor3 + Send + Sync>;

/// Inner objective `G(x₁, u)` of an argmin mapping.
pub trait InnerObjective: Send + Sync {
    fn n1(&self) -> usize;
    fn n2(&self) -> usize;
    fn value(&self, x1: &DVector<f64>, u: &DVector<f64>) -> f64;
    fn grad_u(&self, x1: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
    fn hess_uu(&self, x1: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64>;
    fn hess_x1u(&self, x1: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64>;

    fn third_x1x1u(&self, _x1: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        None
    }
    fn third_x1uu(&self, _x1: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        None
    }
    fn third_uuu(&self, _x1: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        None
    }
}

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 100;
pub const DEFAULT_SSOSC_FLOOR: f64 = 1e-10;
const MAX_HALVINGS: usize = 30;
const MERIT_C: f64 = 1e-4;

#[derive(Clone)]
pub struct InnerProblem {
    pub g: Arc<dyn InnerObjective>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub ssosc_floor: f64,
    /// Starting point used before any warm start is available.
    pub initial_guess: DVector<f64>,
}

impl fmt::Debug for InnerProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InnerProblem")
            .field("n1", &self.g.n1())
            .field("n2", &self.g.n2())
            .field("newton_tol", &self.newton_tol)
            .field("newton_max_iter", &self.newton_max_iter)
            .field("ssosc_floor", &self.ssosc_floor)
            .finish()
    }
}

impl InnerProblem {
    pub fn new(g: Arc<dyn InnerObjective>) -> Self {
        let n2 = g.n2();
        Self {
            g,
            newton_tol: DEFAULT_NEWTON_TOL,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            ssosc_floor: DEFAULT_SSOSC_FLOOR,
            initial_guess: DVector::zeros(n2),
        }
    }

    /// Inner Hessian at a solution, failing if SSOSC does not hold there.
    pub fn checked_hessian(&self, x1: &DVector<f64>, u: &DVector<f64>) -> Result<SymMatrix> {
        let h = SymMatrix::new(self.g.hess_uu(x1, u))?;
        let lambda_min = sym_eig(&h)?.min();
        if lambda_min <= self.ssosc_floor {
            return Err(Error::SsoscViolation { lambda_min });
        }
        Ok(h)
    }
}

/// Damped Newton on `∇_u G(x₁, ·) = 0` with Armijo backtracking on `‖∇_u G‖²`.
///
/// Multimodal inner problems return the stationary point in the basin of `u0`.
pub fn inner_solve(p: &InnerProblem, x1: &DVector<f64>, u0: &DVector<f64>) -> Result<DVector<f64>> {
    if u0.iter().chain(x1.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("inner_solve start"));
    }
    let mut u = u0.clone();
    let mut g = p.g.grad_u(x1, &u);
    let mut merit = g.norm_squared();
    for _ in 0..p.newton_max_iter {
        if !merit.is_finite() {
            return Err(Error::NonFinite("inner gradient"));
        }
        if merit.sqrt() <= p.newton_tol {
            return Ok(polish(p, x1, u, merit));
        }
        let h = p.g.hess_uu(x1, &u);
        let dir = h.lu().solve(&(-&g)).filter(|d| d.iter().all(|v| v.is_finite())).unwrap_or(-&g);
        let mut t = 1.0;
        let mut trial = &u + t * &dir;
        let mut g_trial = p.g.grad_u(x1, &trial);
        for _ in 0..MAX_HALVINGS {
            if g_trial.norm_squared() <= (1.0 - 2.0 * MERIT_C * t) * merit {
                break;
            }
            t *= 0.5;
            trial = &u + t * &dir;
            g_trial = p.g.grad_u(x1, &trial);
        }
        u = trial;
        g = g_trial;
        merit = g.norm_squared();
    }
    if merit.sqrt() <= p.newton_tol {
        return Ok(polish(p, x1, u, merit));
    }
    Err(Error::InnerDivergence {
        iters: p.newton_max_iter,
        residual: merit.sqrt(),
    })
}

/// One extra full Newton step, kept only if it does not raise the residual,
/// so that `Ψ` is accurate to rounding rather than to `newton_tol`.
fn polish(p: &InnerProblem, x1: &DVector<f64>, u: DVector<f64>, merit: f64) -> DVector<f64> {
    if merit == 0.0 {
        return u;
    }
    let g = p.g.grad_u(x1, &u);
    let Some(dir) = p.g.hess_uu(x1, &u).lu().solve(&(-g)) else {
        return u;
    };
    let trial = &u + dir;
    let m = p.g.grad_u(x1, &trial).norm_squared();
    if m.is_finite() && m <= merit {
        trial
    } else {
        u
    }
}

/// Derivative blocks of the inner problem at its solution.
#[derive(Debug, Clone)]
pub struct InnerBlocks {
    pub u: DVector<f64>,
    pub h: SymMatrix,
    pub g_x1u: DMatrix<f64>,
    pub a: Tensor3,
    pub b: Tensor3,
    pub c: Tensor3,
}

#[derive(Clone)]
pub struct ClosedForm {
    pub value: VectorFn,
    pub jacobian: MatrixFn,
    pub second: TensorFn,
}

#[derive(Clone)]
pub enum MappingKind {
    Constant(DVector<f64>),
    Affine { a: DMatrix<f64>, b: DVector<f64> },
    ClosedForm(ClosedForm),
    ImplicitArgmin(InnerProblem),
}

impl fmt::Debug for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingKind::Constant(x2) => f.debug_tuple("Constant").field(x2).finish(),
            MappingKind::Affine { a, b } => f.debug_struct("Affine").field("a", a).field("b", b).finish(),
            MappingKind::ClosedForm(_) => f.write_str("ClosedForm"),
            MappingKind::ImplicitArgmin(p) => f.debug_tuple("ImplicitArgmin").field(p).finish(),
        }
    }
}

/// Value and derivatives of `Ψ` at one point; higher orders are present only
/// when requested.
#[derive(Debug, Clone)]
pub struct MappingJet {
    pub value: DVector<f64>,
    pub jacobian: Option<DMatrix<f64>>,
    pub second: Option<Tensor3>,
}

pub struct ReductionMapping {
    n1: usize,
    n2: usize,
    kind: MappingKind,
    scale_alpha: f64,
    warm_start: Mutex<Option<(DVector<f64>, DVector<f64>)>>,
}

impl Clone for ReductionMapping {
    /// Clones share nothing; the copy starts with an empty warm-start cache.
    fn clone(&self) -> Self {
        Self {
            n1: self.n1,
            n2: self.n2,
            kind: self.kind.clone(),
            scale_alpha: self.scale_alpha,
            warm_start: Mutex::new(None),
        }
    }
}

impl fmt::Debug for ReductionMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReductionMapping")
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .field("kind", &self.kind)
            .field("scale_alpha", &self.scale_alpha)
            .finish()
    }
}

impl ReductionMapping {
    fn with_kind(n1: usize, n2: usize, kind: MappingKind) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParam(format!("mapping dims must be positive, got {n1}x{n2}")));
        }
        Ok(Self {
            n1,
            n2,
            kind,
            scale_alpha: 1.0,
            warm_start: Mutex::new(None),
        })
    }

    pub fn constant(n1: usize, x2: DVector<f64>) -> Result<Self> {
        let n2 = x2.len();
        Self::with_kind(n1, n2, MappingKind::Constant(x2))
    }

    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                got: b.len(),
                context: "affine offset",
            });
        }
        Self::with_kind(a.ncols(), a.nrows(), MappingKind::Affine { a, b })
    }

    pub fn closed_form(n1: usize, n2: usize, value: VectorFn, jacobian: MatrixFn, second: TensorFn) -> Result<Self> {
        Self::with_kind(n1, n2, MappingKind::ClosedForm(ClosedForm { value, jacobian, second }))
    }

    pub fn implicit(inner: InnerProblem) -> Result<Self> {
        if inner.initial_guess.len() != inner.g.n2() {
            return Err(Error::DimensionMismatch {
                expected: inner.g.n2(),
                got: inner.initial_guess.len(),
                context: "inner initial guess",
            });
        }
        Self::with_kind(inner.g.n1(), inner.g.n2(), MappingKind::ImplicitArgmin(inner))
    }

    /// Small-slope rescaling `Ψ_α = αΨ`.
    pub fn with_scale_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParam(format!("scale_alpha must be positive, got {alpha}")));
        }
        self.scale_alpha = alpha;
        Ok(self)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn scale_alpha(&self) -> f64 {
        self.scale_alpha
    }

    /// True for constant and affine kinds, where `D²Ψ ≡ 0`.
    pub fn is_affine(&self) -> bool {
        matches!(self.kind, MappingKind::Constant(_) | MappingKind::Affine { .. })
    }

    fn check_point(&self, x1: &DVector<f64>) -> Result<()> {
        if x1.len() != self.n1 {
            return Err(Error::DimensionMismatch {
                expected: self.n1,
                got: x1.len(),
                context: "mapping input",
            });
        }
        if x1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mapping input"));
        }
        Ok(())
    }

    fn solve_inner(&self, p: &InnerProblem, x1: &DVector<f64>) -> Result<DVector<f64>> {
        let start = {
            let cache = self.warm_start.lock().unwrap_or_else(|e| e.into_inner());
            match cache.as_ref() {
                Some((x, u)) if x == x1 => return Ok(u.clone()),
                Some((_, u)) => u.clone(),
                None => p.initial_guess.clone(),
            }
        };
        let u = inner_solve(p, x1, &start)?;
        *self.warm_start.lock().unwrap_or_else(|e| e.into_inner()) = Some((x1.clone(), u.clone()));
        Ok(u)
    }

    /// Inner solution and all derivative blocks needed by the implicit
    /// function theorem.
    pub fn inner_blocks(&self, x1: &DVector<f64>) -> Result<InnerBlocks> {
        self.check_point(x1)?;
        let MappingKind::ImplicitArgmin(p) = &self.kind else {
            return Err(Error::WrongMappingKind);
        };
        let u = self.solve_inner(p, x1)?;
        let h = p.checked_hessian(x1, &u)?;
        let g_x1u = p.g.hess_x1u(x1, &u);
        let (Some(a), Some(b), Some(c)) = (
            p.g.third_x1x1u(x1, &u),
            p.g.third_x1uu(x1, &u),
            p.g.third_uuu(x1, &u),
        ) else {
            return Err(Error::MissingThirdDerivatives);
        };
        Ok(InnerBlocks { u, h, g_x1u, a, b, c })
    }

    /// Evaluates `Ψ` and, for `order ≥ 1`, `DΨ`, for `order ≥ 2`, `D²Ψ`.
    pub fn jet(&self, x1: &DVector<f64>, order: usize) -> Result<MappingJet> {
        self.check_point(x1)?;
        let (n1, n2) = (self.n1, self.n2);
        let mut jet = match &self.kind {
            MappingKind::Constant(x2) => MappingJet {
                value: x2.clone(),
                jacobian: (order >= 1).then(|| DMatrix::zeros(n2, n1)),
                second: (order >= 2).then(|| Tensor3::zeros(n2, n1, n1)),
            },
            MappingKind::Affine { a, b } => MappingJet {
                value: a * x1 + b,
                jacobian: (order >= 1).then(|| a.clone()),
                second: (order >= 2).then(|| Tensor3::zeros(n2, n1, n1)),
            },
            MappingKind::ClosedForm(cf) => {
                let mut second = (order >= 2).then(|| (cf.second)(x1));
                if let Some(t) = second.as_mut() {
                    t.symmetrize_last_two();
                }
                MappingJet {
                    value: (cf.value)(x1),
                    jacobian: (order >= 1).then(|| (cf.jacobian)(x1)),
                    second,
                }
            }
            MappingKind::ImplicitArgmin(p) => implicit_jet(self, p, x1, order)?,
        };
        let alpha = self.scale_alpha;
        if alpha != 1.0 {
            jet.value *= alpha;
            if let Some(j) = jet.jacobian.as_mut() {
                *j *= alpha;
            }
            if let Some(t) = jet.second.as_mut() {
                t.scale(alpha);
            }
        }
        let finite = jet.value.iter().all(|v| v.is_finite())
            && jet.jacobian.as_ref().is_none_or(|j| j.iter().all(|v| v.is_finite()))
            && jet.second.as_ref().is_none_or(Tensor3::is_finite);
        if !finite {
            return Err(Error::NonFinite("mapping output"));
        }
        Ok(jet)
    }

    pub fn psi(&self, x1: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.jet(x1, 0)?.value)
    }

    pub fn d_psi(&self, x1: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.jet(x1, 1)?.jacobian.expect("order 1 requested"))
    }

    pub fn d2_psi(&self, x1: &DVector<f64>) -> Result<Tensor3> {
        Ok(self.jet(x1, 2)?.second.expect("order 2 requested"))
    }

    /// `DΦ = [I; DΨ]`, an `(n₁+n₂) × n₁` matrix.
    pub fn d_phi(&self, x1: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(stack_d_phi(&self.d_psi(x1)?))
    }

    /// `Φ(x₁) = (x₁, Ψ(x₁))`.
    pub fn phi(&self, x1: &DVector<f64>) -> Result<DVector<f64>> {
        let psi = self.psi(x1)?;
        Ok(concat(x1, &psi))
    }
}

pub(crate) fn concat(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

pub(crate) fn stack_d_phi(j: &DMatrix<f64>) -> DMatrix<f64> {
    let (n2, n1) = j.shape();
    let mut out = DMatrix::zeros(n1 + n2, n1);
    out.view_mut((0, 0), (n1, n1)).fill_with_identity();
    out.view_mut((n1, 0), (n2, n1)).copy_from(j);
    out
}

fn implicit_jet(m: &ReductionMapping, p: &InnerProblem, x1: &DVector<f64>, order: usize) -> Result<MappingJet> {
    if order == 0 {
        return Ok(MappingJet {
            value: m.solve_inner(p, x1)?,
            jacobian: None,
            second: None,
        });
    }
    let u = m.solve_inner(p, x1)?;
    let h = p.checked_hessian(x1, &u)?;
    let chol = h.matrix().clone().cholesky().ok_or(Error::NotSpd {
        lambda_min: p.ssosc_floor,
        lambda_max: f64::NAN,
    })?;
    // DΨ = −H⁻¹ ∇²_{x₁u}G
    let j = -chol.solve(&p.g.hess_x1u(x1, &u));
    if order == 1 {
        return Ok(MappingJet {
            value: u,
            jacobian: Some(j),
            second: None,
        });
    }
    let (Some(a), Some(b), Some(c)) = (
        p.g.third_x1x1u(x1, &u),
        p.g.third_x1uu(x1, &u),
        p.g.third_uuu(x1, &u),
    ) else {
        return Err(Error::MissingThirdDerivatives);
    };
    let second = implicit_second(&chol, &j, &a, &b, &c);
    Ok(MappingJet {
        value: u,
        jacobian: Some(j),
        second: Some(second),
    })
}

/// `D²Ψ[·,i,j] = −H⁻¹(A[·,i,j] + Σ_l B[·,i,l]J[l,j] + Σ_l B[·,j,l]J[l,i]
///               + Σ_{l,m} C[·,l,m]J[l,i]J[m,j])`
fn implicit_second(
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    j: &DMatrix<f64>,
    a: &Tensor3,
    b: &Tensor3,
    c: &Tensor3,
) -> Tensor3 {
    let (n2, n1) = j.shape();
    let mut rhs = a.clone();
    for k in 0..n2 {
        let bk = b.slice(k); // n1 × n2
        let ck = c.slice(k); // n2 × n2
        let bj = &bk * j; // [i, j] = Σ_l B[k,i,l] J[l,j]
        let cjj = j.transpose() * &ck * j;
        for i in 0..n1 {
            for jj in 0..n1 {
                let v = rhs.get(k, i, jj) + bj[(i, jj)] + bj[(jj, i)] + cjj[(i, jj)];
                rhs.set(k, i, jj, v);
            }
        }
    }
    let unfolded = -chol.solve(&rhs.unfold_first());
    let mut out = Tensor3::from_fn(n2, n1, n1, |k, i, jj| unfolded[(k, i * n1 + jj)]);
    out.symmetrize_last_two();
    out
}
