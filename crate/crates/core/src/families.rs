//! Seeded random instance families for the property suites.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linops::SymMatrix;
use crate::mapping::{InnerObjective, InnerProblem, ReductionMapping};
use crate::problems::SineInner;
use crate::reduced::{Objective, ReducedProblem};
use crate::tensor::Tensor3;

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    // row-major fill so the stream order is independent of storage layout
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

pub fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DVector::from_fn(n, |i, _| if r[(i, i)] < 0.0 { -1.0 } else { 1.0 });
    q * DMatrix::from_diagonal(&signs)
}

/// `f(x) = ½xᵀHx` split as `n₁ + n₂`.
pub fn quadratic_objective(n1: usize, h: &SymMatrix) -> Result<Objective> {
    let n2 = h.dim() - n1;
    let (hv, hg, hh) = (h.matrix().clone(), h.matrix().clone(), h.matrix().clone());
    Objective::from_fns(n1, n2, move |x| 0.5 * x.dot(&(&hv * x)), move |x| &hg * x, move |_| hh.clone())
}

/// Symmetric Gaussian quadratic in `R^n` with a random affine reduction from `R^{n₁}`.
pub fn random_affine_quadratic<R: Rng>(rng: &mut R, n: usize, n1: usize) -> Result<ReducedProblem> {
    let g = gaussian_matrix(rng, n, n);
    let h = SymMatrix::new(0.5 * (&g + g.transpose()))?;
    let a = gaussian_matrix(rng, n - n1, n1);
    let b = gaussian_vector(rng, n - n1);
    ReducedProblem::new(quadratic_objective(n1, &h)?, ReductionMapping::affine(a, b)?)
}

/// Random quadratic with the warped reduction `Ψ(x) = Ax + γ·sin(Bx)`, `γ ∈ [0.05, 0.5]`.
pub fn random_warped_quadratic<R: Rng>(rng: &mut R, n: usize, n1: usize) -> Result<ReducedProblem> {
    let n2 = n - n1;
    let g = gaussian_matrix(rng, n, n);
    let h = SymMatrix::new(0.5 * (&g + g.transpose()))?;
    let a = gaussian_matrix(rng, n2, n1);
    let b = gaussian_matrix(rng, n2, n1);
    let gamma = rng.random_range(0.05..=0.5);
    let (av, bv) = (a.clone(), b.clone());
    let (aj, bj) = (a, b.clone());
    let bt = b;
    let mapping = ReductionMapping::closed_form(
        n1,
        n2,
        Arc::new(move |x| &av * x + (&bv * x).map(f64::sin) * gamma),
        Arc::new(move |x| {
            let c = (&bj * x).map(f64::cos) * gamma;
            &aj + DMatrix::from_diagonal(&c) * &bj
        }),
        Arc::new(move |x| {
            let s = &bt * x;
            Tensor3::from_fn(n2, n1, n1, |k, i, j| -gamma * s[k].sin() * bt[(k, i)] * bt[(k, j)])
        }),
    )?;
    ReducedProblem::new(quadratic_objective(n1, &h)?, mapping)
}

/// Morse–Bott quadratic with a prescribed kernel through the origin.
#[derive(Debug, Clone)]
pub struct MorseBottInstance {
    pub problem: ReducedProblem,
    /// Orthonormal basis of the solution set's tangent (= kernel of `∇²f`).
    pub tangent: DMatrix<f64>,
    /// Reduced point mapped onto the solution set.
    pub minimiser: DVector<f64>,
}

/// PSD `H = Σ_{i>k} λᵢqᵢqᵢᵀ` with `k ∈ {1, 2}` and `λᵢ ∈ [0.5, 10]`, reduced by
/// a linear `Ψ(x₁) = Ax₁` so that `Φ(0) = 0` lies on the solution set.
pub fn random_morse_bott<R: Rng>(rng: &mut R, n: usize, n1: usize) -> Result<MorseBottInstance> {
    let k = rng.random_range(1..=2usize);
    let q = random_orthogonal(rng, n);
    let lambdas: Vec<f64> = (0..n).map(|i| if i < k { 0.0 } else { rng.random_range(0.5..10.0) }).collect();
    let h = SymMatrix::new(&q * DMatrix::from_diagonal(&DVector::from_vec(lambdas)) * q.transpose())?;
    let a = gaussian_matrix(rng, n - n1, n1);
    let problem = ReducedProblem::new(quadratic_objective(n1, &h)?, ReductionMapping::affine(a, DVector::zeros(n - n1))?)?;
    Ok(MorseBottInstance {
        problem,
        tangent: q.columns(0, k).into_owned(),
        minimiser: DVector::zeros(n1),
    })
}

/// Symmetric `H` and a full-column-rank embedding `D`, giving the pencil
/// `(DᵀHD, DᵀD)`.
#[derive(Debug, Clone)]
pub struct EmbeddedPencil {
    pub h: SymMatrix,
    pub d: DMatrix<f64>,
}

impl EmbeddedPencil {
    pub fn a(&self) -> SymMatrix {
        self.h.congruence(&self.d)
    }

    pub fn b(&self) -> SymMatrix {
        SymMatrix::identity(self.d.nrows()).congruence(&self.d)
    }
}

/// `n ∈ [2, max_n]`, embedding dimension `m ∈ [1, n]`.
pub fn random_embedded_pencil<R: Rng>(rng: &mut R, max_n: usize) -> Result<EmbeddedPencil> {
    let n = rng.random_range(2..=max_n.max(2));
    let m = rng.random_range(1..=n);
    let g = gaussian_matrix(rng, n, n);
    let scale = rng.random_range(0.1..10.0);
    let h = SymMatrix::new(scale * 0.5 * (&g + g.transpose()))?;
    let mut d = gaussian_matrix(rng, n, m);
    // keep D well conditioned
    d += DMatrix::identity(n, m) * 0.5;
    Ok(EmbeddedPencil { h, d })
}

/// `G(x, u) = (u − x)⁴ + u²`
#[derive(Debug, Clone, Copy, Default)]
pub struct QuarticInner;

impl InnerObjective for QuarticInner {
    fn n1(&self) -> usize {
        1
    }
    fn n2(&self) -> usize {
        1
    }
    fn value(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (u[0] - x[0]).powi(4) + u[0] * u[0]
    }
    fn grad_u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, 4.0 * (u[0] - x[0]).powi(3) + 2.0 * u[0])
    }
    fn hess_uu(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 12.0 * (u[0] - x[0]).powi(2) + 2.0)
    }
    fn hess_x1u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -12.0 * (u[0] - x[0]).powi(2))
    }
    fn third_x1x1u(&self, x: &DVector<f64>, u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::from_fn(1, 1, 1, |_, _, _| 24.0 * (u[0] - x[0])))
    }
    fn third_x1uu(&self, x: &DVector<f64>, u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::from_fn(1, 1, 1, |_, _, _| -24.0 * (u[0] - x[0])))
    }
    fn third_uuu(&self, x: &DVector<f64>, u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::from_fn(1, 1, 1, |_, _, _| 24.0 * (u[0] - x[0])))
    }
}

/// Coupled inner problem in `R² × R²` with `w = Lx`:
/// `G = ½uᵀSu + Σ u_k⁴/12 + ½Σ u_k²w_k² − Σ u_k sin w_k`.
#[derive(Debug, Clone)]
pub struct CoupledInner {
    pub s: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

impl Default for CoupledInner {
    fn default() -> Self {
        Self {
            s: DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.5]),
            l: DMatrix::from_row_slice(2, 2, &[1.0, -0.4, 0.3, 0.8]),
        }
    }
}

impl InnerObjective for CoupledInner {
    fn n1(&self) -> usize {
        2
    }
    fn n2(&self) -> usize {
        2
    }
    fn value(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let w = &self.l * x;
        0.5 * u.dot(&(&self.s * u))
            + (0..2)
                .map(|k| u[k].powi(4) / 12.0 + 0.5 * u[k] * u[k] * w[k] * w[k] - u[k] * w[k].sin())
                .sum::<f64>()
    }
    fn grad_u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let w = &self.l * x;
        &self.s * u + DVector::from_fn(2, |k, _| u[k].powi(3) / 3.0 + u[k] * w[k] * w[k] - w[k].sin())
    }
    fn hess_uu(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let w = &self.l * x;
        &self.s + DMatrix::from_diagonal(&DVector::from_fn(2, |k, _| u[k] * u[k] + w[k] * w[k]))
    }
    fn hess_x1u(&self, x: &DVector<f64>, u: &DVector<f64>) -> DMatrix<f64> {
        let w = &self.l * x;
        DMatrix::from_fn(2, 2, |k, i| (2.0 * u[k] * w[k] - w[k].cos()) * self.l[(k, i)])
    }
    fn third_x1x1u(&self, x: &DVector<f64>, u: &DVector<f64>) -> Option<Tensor3> {
        let w = &self.l * x;
        Some(Tensor3::from_fn(2, 2, 2, |k, i, j| {
            (2.0 * u[k] + w[k].sin()) * self.l[(k, i)] * self.l[(k, j)]
        }))
    }
    fn third_x1uu(&self, x: &DVector<f64>, _u: &DVector<f64>) -> Option<Tensor3> {
        let w = &self.l * x;
        Some(Tensor3::from_fn(2, 2, 2, |k, i, l| if k == l { 2.0 * w[k] * self.l[(k, i)] } else { 0.0 }))
    }
    fn third_uuu(&self, _x: &DVector<f64>, u: &DVector<f64>) -> Option<Tensor3> {
        Some(Tensor3::from_fn(2, 2, 2, |k, l, m| if k == l && l == m { 2.0 * u[k] } else { 0.0 }))
    }
}

/// `f(x₁, x₂) = ½‖x₁‖² + ½‖x₂ − c‖²`
fn shifted_objective(n1: usize, c: DVector<f64>) -> Result<Objective> {
    let n2 = c.len();
    let (cv, cg) = (c.clone(), c);
    Objective::from_fns(
        n1,
        n2,
        move |x| 0.5 * x.rows(0, n1).norm_squared() + 0.5 * (x.rows(n1, n2) - &cv).norm_squared(),
        move |x| {
            let mut g = x.clone();
            let tail = x.rows(n1, n2) - &cg;
            g.rows_mut(n1, n2).copy_from(&tail);
            g
        },
        move |_| DMatrix::identity(n1 + n2, n1 + n2),
    )
}

/// Implicit-argmin problems with analytic third derivatives:
/// `sine` on `x₁² + 10(x₂ − x₁)²`, and `quartic` and `coupled` on shifted
/// quadratics, so that `∇_{x₂}f ≠ 0` along the graph.
pub fn implicit_instances() -> Result<Vec<(&'static str, ReducedProblem)>> {
    let quad = Objective::from_fns(
        1,
        1,
        |x| x[0] * x[0] + 10.0 * (x[1] - x[0]).powi(2),
        |x| DVector::from_vec(vec![2.0 * x[0] - 20.0 * (x[1] - x[0]), 20.0 * (x[1] - x[0])]),
        |_| DMatrix::from_row_slice(2, 2, &[22.0, -20.0, -20.0, 20.0]),
    )?;
    let sine = ReductionMapping::implicit(InnerProblem::new(Arc::new(SineInner)))?;
    let quartic = ReductionMapping::implicit(InnerProblem::new(Arc::new(QuarticInner)))?;
    let coupled = ReductionMapping::implicit(InnerProblem::new(Arc::new(CoupledInner::default())))?;
    Ok(vec![
        ("sine", ReducedProblem::new(quad, sine)?),
        ("quartic", ReducedProblem::new(shifted_objective(1, DVector::from_element(1, 1.0))?, quartic)?),
        (
            "coupled",
            ReducedProblem::new(shifted_objective(2, DVector::from_vec(vec![1.0, -0.5]))?, coupled)?,
        ),
    ])
}
