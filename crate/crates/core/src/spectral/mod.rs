//! Curvature constants of `f` and `F` and numerical checks of the smoothness
//! and sharpness bounds relating them.
//!
//! Region-level constants follow one convention: smoothness-type quantities
//! (β, Q, Z, M^Φ) take the supremum over samples, gap- and tangency-type
//! quantities (Δ, ε, δ, m^Φ) take the infimum.

mod correction;
mod region;
mod report;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{
    gen_eig, null_space, orthogonal_complement, orthonormal_basis, sigma_max, spd_solve, sym_eig, SymMatrix,
};
use crate::mapping::{concat, stack_d_phi, ReductionMapping};
use crate::reduced::{Objective, ReducedProblem};

pub use correction::{correction_bound, gram_sandwich, CorrectionBound, GramSandwich};
pub use region::Region;
pub use report::{condition_report, condition_report_with, SpectralReport};

/// Relative band (w.r.t. σ_max) inside which eigenvalues count as tied.
pub const DEFAULT_MULT_TOL: f64 = 1e-8;
/// Absolute slack allowed in every bound check, scaled by `1 + |rhs|`.
pub const BOUND_SLACK: f64 = 1e-8;
/// Gradient norm above which a point is not treated as critical.
pub const CRITICAL_TOL: f64 = 1e-8;
const RANK_TOL: f64 = 1e-12;

/// Dominant singular subspace of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Dominant {
    pub sigma_max: f64,
    pub multiplicity: usize,
    /// Orthonormal columns spanning eigenvectors with `|λ| ≥ (1−tol)σ_max`.
    pub basis: DMatrix<f64>,
    /// Largest `|λ|` outside the dominant cluster, if any.
    pub next: Option<f64>,
}

impl Dominant {
    /// `σ_max − σ_{p+1}`, zero when every singular value is tied.
    pub fn gap(&self) -> f64 {
        self.next.map_or(0.0, |s| self.sigma_max - s)
    }
}

pub fn dominant_subspace(h: &SymMatrix, mult_tol: f64) -> Result<Dominant> {
    let e = sym_eig(h)?;
    let n = h.dim();
    let sigma_max = e.sigma_max();
    let cut = (1.0 - mult_tol) * sigma_max;
    let dom: Vec<usize> = (0..n).filter(|&i| e.values[i].abs() >= cut).collect();
    let next = (0..n)
        .filter(|&i| e.values[i].abs() < cut)
        .map(|i| e.values[i].abs())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let mut basis = DMatrix::zeros(n, dom.len());
    for (dst, &src) in dom.iter().enumerate() {
        basis.set_column(dst, &e.vectors.column(src));
    }
    Ok(Dominant {
        sigma_max,
        multiplicity: dom.len(),
        basis,
        next,
    })
}

/// `1 − σ_max(Qᵀ U)` for orthonormal `Q` (tangent) and `U` (curvature subspace).
fn epsilon_from(tangent: &DMatrix<f64>, subspace: &DMatrix<f64>) -> f64 {
    let cos = sigma_max(&(tangent.transpose() * subspace));
    (1.0 - cos).clamp(0.0, 1.0)
}

fn tangent_basis(d_phi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let q = orthonormal_basis(d_phi, RANK_TOL);
    if q.ncols() < d_phi.ncols() {
        return Err(Error::DegenerateTangent);
    }
    Ok(q)
}

fn check_mult_tol(mult_tol: f64) -> Result<()> {
    if mult_tol > 0.0 && mult_tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("mult_tol {mult_tol} not in (0, 1)")))
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Every constant the bounds need, at a single reduced point.
#[derive(Debug, Clone, Serialize)]
pub struct PointConstants {
    /// `σ_max(∇²f(Φ(x₁)))`
    pub beta_f: f64,
    pub epsilon: f64,
    pub multiplicity: usize,
    pub gap: f64,
    /// Largest `|λ|` of the pencil `(∇²F, R)`.
    pub beta_riem: f64,
    /// Largest `|λ|` of `(DΦᵀ∇²f DΦ, R)`, i.e. `σ_max(∇²f|_T)`.
    pub beta_tangent: f64,
    pub pencil_min: f64,
    pub pencil_max: f64,
    /// `σ_max(∇²F)`
    pub beta_eucl: f64,
    pub eucl_min: f64,
    pub eucl_max: f64,
    pub m_phi: f64,
    pub big_m_phi: f64,
    /// Norm bound on `D²Ψ`, exact for `n₂ = 1`.
    pub q: f64,
    /// `‖∇_{x₂} f(Φ(x₁))‖`
    pub z: f64,
    pub correction_norm: f64,
}

pub fn point_constants(p: &ReducedProblem, x1: &DVector<f64>, mult_tol: f64) -> Result<PointConstants> {
    check_mult_tol(mult_tol)?;
    let e = p.eval(x1, 2)?;
    let h = e.hess_full.as_ref().expect("order 2");
    let d_phi = e.d_phi();
    let q_basis = tangent_basis(&d_phi)?;
    let dom = dominant_subspace(h, mult_tol)?;
    let r = e.metric();
    let first = e.hess_first_part();
    let corr = e.correction();
    let hess = e.hess_reduced();
    let pencil = gen_eig(&hess, &r)?;
    let pencil_first = gen_eig(&first, &r)?;
    let eucl = sym_eig(&hess)?;
    let metric = sym_eig(&r)?;
    Ok(PointConstants {
        beta_f: dom.sigma_max,
        epsilon: epsilon_from(&q_basis, &dom.basis),
        multiplicity: dom.multiplicity,
        gap: dom.gap(),
        beta_riem: max_abs(&pencil),
        beta_tangent: max_abs(&pencil_first),
        pencil_min: pencil[0],
        pencil_max: pencil[pencil.len() - 1],
        beta_eucl: eucl.sigma_max(),
        eucl_min: eucl.min(),
        eucl_max: eucl.max(),
        m_phi: metric.min(),
        big_m_phi: metric.max(),
        q: e.second.as_ref().expect("order 2").slice_norm_bound(),
        z: e.grad_x2().norm(),
        correction_norm: sym_eig(&corr)?.sigma_max(),
    })
}

/// Point constants at every sample of `region`.
pub fn region_constants(p: &ReducedProblem, region: &Region, mult_tol: f64) -> Result<Vec<PointConstants>> {
    if region.dim() != p.n1() {
        return Err(Error::DimensionMismatch {
            expected: p.n1(),
            got: region.dim(),
            context: "region center",
        });
    }
    region.points()?.iter().map(|x| point_constants(p, x, mult_tol)).collect()
}

fn sup(cs: &[PointConstants], f: impl Fn(&PointConstants) -> f64) -> f64 {
    cs.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn inf(cs: &[PointConstants], f: impl Fn(&PointConstants) -> f64) -> f64 {
    cs.iter().map(f).fold(f64::INFINITY, f64::min)
}

/// `β_F = sup_x max |λ(∇²F, R)|`
pub fn smoothness_riemannian(p: &ReducedProblem, region: &Region) -> Result<f64> {
    let cs = region_constants(p, region, DEFAULT_MULT_TOL)?;
    Ok(sup(&cs, |c| c.beta_riem))
}

/// `β_F^(E) = sup_x σ_max(∇²F)`
pub fn smoothness_euclidean(p: &ReducedProblem, region: &Region) -> Result<f64> {
    let cs = region_constants(p, region, DEFAULT_MULT_TOL)?;
    Ok(sup(&cs, |c| c.beta_eucl))
}

/// Non-tangency `ε` of the dominant curvature subspace and its multiplicity.
pub fn nontangency_epsilon(p: &ReducedProblem, x1: &DVector<f64>, mult_tol: f64) -> Result<(f64, usize)> {
    check_mult_tol(mult_tol)?;
    let jet = p.mapping.jet(x1, 1)?;
    let d_phi = stack_d_phi(jet.jacobian.as_ref().expect("order 1"));
    let h = p.objective.hessian(&concat(x1, &jet.value))?;
    let q = tangent_basis(&d_phi)?;
    let dom = dominant_subspace(&h, mult_tol)?;
    Ok((epsilon_from(&q, &dom.basis), dom.multiplicity))
}

/// `Δ_max = inf_x [σ_max − σ_{p+1}]` of `∇²f` along the graph.
pub fn spectral_gap_max(p: &ReducedProblem, region: &Region, mult_tol: f64) -> Result<f64> {
    check_mult_tol(mult_tol)?;
    let mut gap = f64::INFINITY;
    for x1 in region.points()? {
        let x = p.mapping.phi(&x1)?;
        gap = gap.min(dominant_subspace(&p.objective.hessian(&x)?, mult_tol)?.gap());
    }
    Ok(gap)
}

fn bound_holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + BOUND_SLACK * (1.0 + rhs.abs())
}

/// Outcome of the affine smoothness bound `β_F ≤ β_f − Δ_max(2ε−ε²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub beta_f: f64,
    pub epsilon: f64,
    pub delta_max: f64,
    /// No usable spectral gap: the hypotheses fail, so nothing is asserted.
    pub vacuous: bool,
}

fn affine_from(cs: &[PointConstants], mult_tol: f64) -> BoundCheck {
    let beta_f = sup(cs, |c| c.beta_f);
    let epsilon = inf(cs, |c| c.epsilon);
    let delta_max = inf(cs, |c| c.gap);
    let lhs = sup(cs, |c| c.beta_riem);
    let rhs = beta_f - delta_max * (2.0 * epsilon - epsilon * epsilon);
    let vacuous = delta_max <= mult_tol * beta_f;
    BoundCheck {
        holds: vacuous || bound_holds(lhs, rhs),
        lhs,
        rhs,
        beta_f,
        epsilon,
        delta_max,
        vacuous,
    }
}

pub fn check_affine_bound(p: &ReducedProblem, region: &Region) -> Result<BoundCheck> {
    check_affine_bound_with(p, region, DEFAULT_MULT_TOL)
}

pub fn check_affine_bound_with(p: &ReducedProblem, region: &Region, mult_tol: f64) -> Result<BoundCheck> {
    if !p.mapping.is_affine() {
        return Err(Error::WrongMappingKind);
    }
    Ok(affine_from(&region_constants(p, region, mult_tol)?, mult_tol))
}

/// Outcome of `β_F ≤ β_f − Δ_max(2ε−ε²) + QZ/m^Φ` and of its Euclidean
/// counterpart `β_F^(E) ≤ M^Φ[β_f − Δ_max(2ε−ε²)] + QZ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub q: f64,
    pub z: f64,
    pub m_phi: f64,
    pub big_m_phi: f64,
    /// `inf_x [σ_max(∇²f) − σ_max(∇²f|_T)]`
    pub delta: f64,
    /// `QZ/m^Φ ≥ δ`: the curvature hypothesis is not met.
    pub hypothesis_failed: bool,
    pub vacuous: bool,
    pub euclidean_holds: bool,
    pub euclidean_lhs: f64,
    pub euclidean_rhs: f64,
    pub affine: BoundCheck,
}

fn nonlinear_from(cs: &[PointConstants], mult_tol: f64) -> NonlinearCheck {
    let affine = affine_from(cs, mult_tol);
    let q = sup(cs, |c| c.q);
    let z = sup(cs, |c| c.z);
    let m_phi = inf(cs, |c| c.m_phi);
    let big_m_phi = sup(cs, |c| c.big_m_phi);
    let delta = inf(cs, |c| c.beta_f - c.beta_tangent);
    let shrink = affine.delta_max * (2.0 * affine.epsilon - affine.epsilon.powi(2));
    let rhs = affine.beta_f - shrink + q * z / m_phi;
    let euclidean_lhs = sup(cs, |c| c.beta_eucl);
    let euclidean_rhs = big_m_phi * (affine.beta_f - shrink) + q * z;
    NonlinearCheck {
        holds: bound_holds(affine.lhs, rhs),
        lhs: affine.lhs,
        rhs,
        q,
        z,
        m_phi,
        big_m_phi,
        delta,
        hypothesis_failed: q * z / m_phi >= delta,
        vacuous: affine.vacuous,
        euclidean_holds: bound_holds(euclidean_lhs, euclidean_rhs),
        euclidean_lhs,
        euclidean_rhs,
        affine,
    }
}

pub fn check_nonlinear_bound(p: &ReducedProblem, region: &Region) -> Result<NonlinearCheck> {
    check_nonlinear_bound_with(p, region, DEFAULT_MULT_TOL)
}

pub fn check_nonlinear_bound_with(p: &ReducedProblem, region: &Region, mult_tol: f64) -> Result<NonlinearCheck> {
    Ok(nonlinear_from(&region_constants(p, region, mult_tol)?, mult_tol))
}

/// Constants of the sharpness bound `μ_F ≥ μ_f + Δ_min(2ε−ε²)` at a minimiser.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MbConstants {
    pub mu_f: f64,
    /// Unavailable when no reduced direction maps normal to the solution set.
    pub mu_big_f: Option<f64>,
    pub delta_min: f64,
    pub eps_min: f64,
    pub bound: f64,
    pub holds: bool,
    pub vacuous: bool,
}

pub fn mb_constants(p: &ReducedProblem, minimiser: &DVector<f64>, solution_tangent: &DMatrix<f64>) -> Result<MbConstants> {
    mb_constants_with(p, minimiser, solution_tangent, DEFAULT_MULT_TOL)
}

pub fn mb_constants_with(
    p: &ReducedProblem,
    minimiser: &DVector<f64>,
    solution_tangent: &DMatrix<f64>,
    mult_tol: f64,
) -> Result<MbConstants> {
    check_mult_tol(mult_tol)?;
    let e = p.eval(minimiser, 2)?;
    let n = e.x.len();
    if solution_tangent.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: solution_tangent.nrows(),
            context: "solution tangent rows",
        });
    }
    let grad_norm = e.grad_full.norm();
    if grad_norm > CRITICAL_TOL {
        return Err(Error::NotCritical { grad_norm });
    }
    let h = e.hess_full.as_ref().expect("order 2");
    let t = orthonormal_basis(solution_tangent, RANK_TOL);
    check_kernel(h, &t)?;

    let normal = orthogonal_complement(&t);
    if normal.ncols() == 0 {
        return Err(Error::KernelMismatch("solution tangent spans the whole space".into()));
    }
    let restricted = h.congruence(&normal);
    let eig = sym_eig(&restricted)?;
    let mu_f = eig.min();
    let scale = eig.sigma_max().max(f64::MIN_POSITIVE);
    let band = mult_tol * scale;
    let cluster: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] <= mu_f + band).collect();
    let delta_min = (0..eig.values.len())
        .map(|i| eig.values[i])
        .find(|&v| v > mu_f + band)
        .map_or(0.0, |v| v - mu_f);
    let mut u_min = DMatrix::zeros(eig.values.len(), cluster.len());
    for (dst, &src) in cluster.iter().enumerate() {
        u_min.set_column(dst, &eig.vectors.column(src));
    }
    let d_phi = e.d_phi();
    let eps_min = epsilon_from(&tangent_basis(&d_phi)?, &(&normal * u_min));
    let bound = mu_f + delta_min * (2.0 * eps_min - eps_min * eps_min);

    // reduced directions whose image is normal to the solution set
    let w = if t.ncols() == 0 {
        DMatrix::identity(minimiser.len(), minimiser.len())
    } else {
        null_space(&(t.transpose() * &d_phi), RANK_TOL)
    };
    let mu_big_f = if w.ncols() == 0 {
        None
    } else {
        let hw = e.hess_reduced().congruence(&w);
        let rw = e.metric().congruence(&w);
        Some(gen_eig(&hw, &rw)?[0])
    };
    Ok(MbConstants {
        mu_f,
        mu_big_f,
        delta_min,
        eps_min,
        bound,
        holds: mu_big_f.is_none_or(|m| m >= bound - BOUND_SLACK),
        vacuous: mu_big_f.is_none(),
    })
}

/// `ker ∇²f = span(T)`, up to a relative tolerance.
fn check_kernel(h: &SymMatrix, t: &DMatrix<f64>) -> Result<()> {
    let eig = sym_eig(h)?;
    let tol = 1e-8 * eig.sigma_max().max(1.0);
    let kernel_dim = eig.values.iter().filter(|v| v.abs() <= tol).count();
    if kernel_dim != t.ncols() {
        return Err(Error::KernelMismatch(format!(
            "Hessian kernel has dimension {kernel_dim}, solution tangent has {}",
            t.ncols()
        )));
    }
    if t.ncols() > 0 {
        let residual = sigma_max(&(h.matrix() * t));
        if residual > tol {
            return Err(Error::KernelMismatch(format!("|H T| = {residual:e} exceeds {tol:e}")));
        }
    }
    Ok(())
}

/// Sampled PL constant `inf ‖∇f‖²/(2(f − f*))`, or with a mapping the
/// metric-weighted reduced analogue `inf ∇Fᵀ R⁻¹ ∇F / (2(F − f*))`.
///
/// Samples whose gap is at most 1e-14 are skipped.
pub fn pl_constant_estimate(obj: &Objective, region: &Region, mapping: Option<&ReductionMapping>) -> Result<f64> {
    let mut best = f64::INFINITY;
    let mut used = 0usize;
    for x in region.points()? {
        let ratio = match mapping {
            None => {
                let gap = obj.value(&x)? - obj.known_min_value;
                if gap <= 1e-14 {
                    continue;
                }
                obj.gradient(&x)?.norm_squared() / (2.0 * gap)
            }
            Some(m) => {
                let p = ReducedProblem::new(obj.clone(), m.clone())?;
                let e = p.eval(&x, 1)?;
                let gap = e.value - obj.known_min_value;
                if gap <= 1e-14 {
                    continue;
                }
                let g = e.grad_reduced();
                g.dot(&spd_solve(&e.metric(), &g)?) / (2.0 * gap)
            }
        };
        used += 1;
        best = best.min(ratio);
    }
    if used == 0 {
        return Err(Error::EmptySample);
    }
    Ok(best)
}
