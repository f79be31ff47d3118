use nalgebra::DVector;
use serde::Serialize;

use crate::error::Result;
use crate::linops::{gen_eig, sigma_max, sym_eig};
use crate::reduced::ReducedProblem;

/// Pointwise constants of the correction-term bound for argmin mappings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionBound {
    /// `λ_min(∇²_u G)`
    pub sigma: f64,
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l3: f64,
    /// `‖∇f(Φ(x₁))‖`, used as `L_f`.
    pub l_f: f64,
    pub xi: f64,
    /// `σL₁₂ + L₂₁L₁₁ + L₃L₁₁²/σ`
    pub l_tilde: f64,
    /// Exact `‖C(x₁)‖₂`.
    pub correction_norm: f64,
    /// `‖D²Ψ‖` bound from slice norms.
    pub d2psi_norm: f64,
    /// `(L̃/σ²)·ξ·L_f`
    pub bound: f64,
    pub holds: bool,
    pub cos_theta: f64,
    pub refined_bound: f64,
    /// Asserted only for `n₂ = 1`, where the top singular subspace is all of `R^{n₂}`.
    pub refined_holds: Option<bool>,
}

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + 1e-10) + 1e-12
}

pub fn correction_bound(p: &ReducedProblem, x1: &DVector<f64>) -> Result<CorrectionBound> {
    let blocks = p.mapping.inner_blocks(x1)?;
    let e = p.eval(x1, 2)?;
    let alpha = p.mapping.scale_alpha();
    let sigma = sym_eig(&blocks.h)?.min();
    let l11 = sigma_max(&blocks.g_x1u);
    let l12 = blocks.a.slice_norm_bound();
    let l21 = blocks.b.slice_norm_bound();
    let l3 = blocks.c.slice_norm_bound();
    let v = e.grad_x2();
    let l_f = e.grad_full.norm();
    let xi = if l_f > 0.0 { v.norm() / l_f } else { 0.0 };
    let l_tilde = sigma * l12 + l21 * l11 + l3 * l11 * l11 / sigma;
    let bound = alpha * l_tilde / (sigma * sigma) * xi * l_f;
    let correction_norm = sym_eig(&e.correction())?.sigma_max();
    let second = e.second.as_ref().expect("order 2");

    let unfolded = second.unfold_first();
    let svd = unfolded.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let vn = v.norm();
    let cos_theta = if vn == 0.0 || smax == 0.0 {
        1.0
    } else {
        let proj: f64 = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] >= (1.0 - 1e-8) * smax)
            .map(|i| u.column(i).dot(&v).powi(2))
            .sum();
        (proj.sqrt() / vn).min(1.0)
    };
    let refined_bound = bound * cos_theta;
    Ok(CorrectionBound {
        sigma,
        l11,
        l12,
        l21,
        l3,
        l_f,
        xi,
        l_tilde,
        correction_norm,
        d2psi_norm: second.slice_norm_bound(),
        bound,
        holds: le(correction_norm, bound),
        cos_theta,
        refined_bound,
        refined_holds: (p.mapping.n2() == 1).then(|| le(correction_norm, refined_bound)),
    })
}

/// Euclidean versus metric Rayleigh bounds of `∇²F` at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramSandwich {
    pub m_phi: f64,
    pub big_m_phi: f64,
    pub pencil_min: f64,
    pub pencil_max: f64,
    pub eucl_min: f64,
    pub eucl_max: f64,
    /// `m^Φ·λ_min(∇²F,R) ≤ λ_min(∇²F)` and `λ_max(∇²F) ≤ M^Φ·λ_max(∇²F,R)`,
    /// valid when both quotients are nonnegative.
    pub holds_unsigned: bool,
    /// The same sandwich with `m^Φ` and `M^Φ` swapped for negative quotients.
    pub holds: bool,
}

pub fn gram_sandwich(p: &ReducedProblem, x1: &DVector<f64>) -> Result<GramSandwich> {
    let e = p.eval(x1, 2)?;
    let hess = e.hess_reduced();
    let r = e.metric();
    let pencil = gen_eig(&hess, &r)?;
    let eucl = sym_eig(&hess)?;
    let metric = sym_eig(&r)?;
    let (m, big_m) = (metric.min(), metric.max());
    let (pmin, pmax) = (pencil[0], pencil[pencil.len() - 1]);
    let tol = 1e-10 * (1.0 + eucl.sigma_max() + pmin.abs().max(pmax.abs()) * big_m);
    let lower = if pmin >= 0.0 { m * pmin } else { big_m * pmin };
    let upper = if pmax >= 0.0 { big_m * pmax } else { m * pmax };
    Ok(GramSandwich {
        m_phi: m,
        big_m_phi: big_m,
        pencil_min: pmin,
        pencil_max: pmax,
        eucl_min: eucl.min(),
        eucl_max: eucl.max(),
        holds_unsigned: m * pmin <= eucl.min() + tol && eucl.max() <= big_m * pmax + tol,
        holds: lower <= eucl.min() + tol && eucl.max() <= upper + tol,
    })
}
