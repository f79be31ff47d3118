use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{affine_from, mb_constants_with, nonlinear_from, region_constants, Region, DEFAULT_MULT_TOL};
use crate::error::Result;
use crate::reduced::ReducedProblem;

/// All curvature constants of a reduction and the verdicts of every bound.
///
/// Serializes to a flat JSON object. Quantities that could not be computed
/// (for example `mu_F` when no reduced direction is normal to the solution
/// set) are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub beta_f: f64,
    #[serde(rename = "beta_F_riem")]
    pub beta_big_f_riem: f64,
    #[serde(rename = "beta_F_eucl")]
    pub beta_big_f_eucl: f64,
    pub epsilon: f64,
    pub multiplicity_p: usize,
    pub delta_max: f64,
    pub delta_min: Option<f64>,
    pub mu_f: Option<f64>,
    #[serde(rename = "mu_F")]
    pub mu_big_f: Option<f64>,
    pub kappa_f: Option<f64>,
    #[serde(rename = "kappa_F")]
    pub kappa_big_f: Option<f64>,
    #[serde(rename = "M_phi")]
    pub big_m_phi: f64,
    pub m_phi: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub correction_norm: f64,
    /// `null` for nonlinear mappings.
    pub bound_affine_holds: Option<bool>,
    pub bound_nonlinear_holds: bool,
    /// `null` when the minimiser checks failed.
    pub bound_mb_holds: Option<bool>,
    pub star_condition_holds: bool,
    pub hypothesis_failed: bool,
    pub vacuous: bool,
}

impl SpectralReport {
    pub const FIELDS: [&'static str; 22] = [
        "beta_f",
        "beta_F_riem",
        "beta_F_eucl",
        "epsilon",
        "multiplicity_p",
        "delta_max",
        "delta_min",
        "mu_f",
        "mu_F",
        "kappa_f",
        "kappa_F",
        "M_phi",
        "m_phi",
        "Q",
        "Z",
        "correction_norm",
        "bound_affine_holds",
        "bound_nonlinear_holds",
        "bound_mb_holds",
        "star_condition_holds",
        "hypothesis_failed",
        "vacuous",
    ];
}

pub fn condition_report(
    p: &ReducedProblem,
    region: &Region,
    minimiser: &DVector<f64>,
    solution_tangent: &DMatrix<f64>,
) -> Result<SpectralReport> {
    condition_report_with(p, region, minimiser, solution_tangent, DEFAULT_MULT_TOL)
}

/// Builds the report. Region constants must be computable; the minimiser part
/// degrades to `null` fields if its preconditions fail.
pub fn condition_report_with(
    p: &ReducedProblem,
    region: &Region,
    minimiser: &DVector<f64>,
    solution_tangent: &DMatrix<f64>,
    mult_tol: f64,
) -> Result<SpectralReport> {
    let cs = region_constants(p, region, mult_tol)?;
    let affine = affine_from(&cs, mult_tol);
    let nonlinear = nonlinear_from(&cs, mult_tol);
    let mb = mb_constants_with(p, minimiser, solution_tangent, mult_tol).ok();
    let mu_f = mb.as_ref().map(|m| m.mu_f);
    let mu_big_f = mb.as_ref().and_then(|m| m.mu_big_f);
    let positive = |v: Option<f64>| v.filter(|x| *x > 0.0);
    let shrink = affine.delta_max * (2.0 * affine.epsilon - affine.epsilon.powi(2));
    let corr = cs.iter().map(|c| c.correction_norm).fold(0.0, f64::max);
    Ok(SpectralReport {
        beta_f: affine.beta_f,
        beta_big_f_riem: affine.lhs,
        beta_big_f_eucl: nonlinear.euclidean_lhs,
        epsilon: affine.epsilon,
        multiplicity_p: cs[0].multiplicity,
        delta_max: affine.delta_max,
        delta_min: mb.as_ref().map(|m| m.delta_min),
        mu_f,
        mu_big_f,
        kappa_f: positive(mu_f).map(|m| affine.beta_f / m),
        kappa_big_f: positive(mu_big_f).map(|m| affine.lhs / m),
        big_m_phi: nonlinear.big_m_phi,
        m_phi: nonlinear.m_phi,
        q: nonlinear.q,
        z: nonlinear.z,
        correction_norm: corr,
        bound_affine_holds: p.mapping.is_affine().then_some(affine.holds),
        bound_nonlinear_holds: nonlinear.holds,
        bound_mb_holds: mb.as_ref().map(|m| m.holds),
        star_condition_holds: shrink > 0.5 * affine.beta_f,
        hypothesis_failed: nonlinear.hypothesis_failed,
        vacuous: affine.vacuous,
    })
}
