use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ProblemSpec, SolutionSet};
use crate::error::{Error, Result};
use crate::mapping::ReductionMapping;
use crate::reduced::{Objective, ObjectiveFn};
use crate::tensor::Tensor3;

pub const DEFAULT_TANH_ALPHA: f64 = 1.0;

/// `n × n` matrix of i.i.d. `N(0, 1)/√n` entries, filled row by row from a
/// ChaCha8 stream seeded with `seed`.
pub fn coupling_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let data: Vec<f64> = (0..n * n).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    DMatrix::from_row_slice(n, n, &data)
}

fn split(x: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    (x.rows(0, n).into_owned(), x.rows(n, n).into_owned())
}

fn join(a: DVector<f64>, b: DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

fn blocks(xx: DMatrix<f64>, xy: DMatrix<f64>, yy: DMatrix<f64>) -> DMatrix<f64> {
    let n = xx.nrows();
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&xx);
    h.view_mut((0, n), (n, n)).copy_from(&xy);
    h.view_mut((n, 0), (n, n)).copy_from(&xy.transpose());
    h.view_mut((n, n), (n, n)).copy_from(&yy);
    h
}

/// `G(x, y) = ½‖x‖² + ½‖y‖² + (λ/2)‖y − Kx‖²`
struct HighDimQuadratic {
    k: DMatrix<f64>,
    lambda: f64,
}

impl ObjectiveFn for HighDimQuadratic {
    fn value(&self, z: &DVector<f64>) -> f64 {
        let (x, y) = split(z, self.k.nrows());
        0.5 * x.norm_squared() + 0.5 * y.norm_squared() + 0.5 * self.lambda * (&y - &self.k * &x).norm_squared()
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let (x, y) = split(z, self.k.nrows());
        let r = &y - &self.k * &x;
        join(&x - self.lambda * self.k.transpose() * &r, &y + self.lambda * &r)
    }

    fn hessian(&self, _z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.k.nrows();
        let eye = DMatrix::identity(n, n);
        blocks(
            &eye + self.lambda * self.k.transpose() * &self.k,
            -self.lambda * self.k.transpose(),
            eye * (1.0 + self.lambda),
        )
    }
}

/// Quadratic in `R^{2n}` reduced by the affine mapping `Ψ(x) = Kx`, for which
/// `∇²F = R = I + KᵀK`.
pub fn make_highdim_quadratic(n: usize, lambda: f64, seed: u64) -> Result<ProblemSpec> {
    if n < 1 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParam(format!("lambda must be positive, got {lambda}")));
    }
    let k = coupling_matrix(n, seed);
    let mapping = ReductionMapping::affine(k.clone(), DVector::zeros(n))?;
    let objective = Objective::new(n, n, Arc::new(HighDimQuadratic { k, lambda }))?;
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("lambda".to_string(), lambda);
    params.insert("seed".to_string(), seed as f64);
    ProblemSpec::new(
        "quad-hd",
        params,
        objective,
        vec![("affine".into(), mapping)],
        Some(SolutionSet::Point(DVector::zeros(2 * n))),
    )
}

/// Intermediates `t = tanh(Kx)` and `s = 1 − t²`.
fn tanh_parts(k: &DMatrix<f64>, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let t = (k * x).map(f64::tanh);
    let s = t.map(|v| 1.0 - v * v);
    (t, s)
}

/// `G(x, y) = ½‖x‖² + ½‖y‖² + (λ/2)‖y − α tanh(Kx)‖²`
struct HighDimTanh {
    k: DMatrix<f64>,
    lambda: f64,
    alpha: f64,
}

impl ObjectiveFn for HighDimTanh {
    fn value(&self, z: &DVector<f64>) -> f64 {
        let (x, y) = split(z, self.k.nrows());
        let (t, _) = tanh_parts(&self.k, &x);
        0.5 * x.norm_squared() + 0.5 * y.norm_squared() + 0.5 * self.lambda * (&y - self.alpha * t).norm_squared()
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let (x, y) = split(z, self.k.nrows());
        let (t, s) = tanh_parts(&self.k, &x);
        let r = &y - self.alpha * &t;
        let gx = &x - self.lambda * self.alpha * self.k.transpose() * s.component_mul(&r);
        join(gx, &y + self.lambda * r)
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.k.nrows();
        let (x, y) = split(z, n);
        let (t, s) = tanh_parts(&self.k, &x);
        let r = &y - self.alpha * &t;
        let (l, a) = (self.lambda, self.alpha);
        // g = 2 r ⊙ s ⊙ t
        let g = 2.0 * r.component_mul(&s).component_mul(&t);
        let diag = s.map(|v| l * a * a * v * v) + l * a * g;
        let kt = self.k.transpose();
        let eye = DMatrix::identity(n, n);
        blocks(
            &eye + &kt * DMatrix::from_diagonal(&diag) * &self.k,
            -l * a * &kt * DMatrix::from_diagonal(&s),
            eye * (1.0 + l),
        )
    }
}

/// Nonlinear problem in `R^{2n}` reduced by `Ψ(x) = α tanh(Kx)`.
pub fn make_highdim_tanh(n: usize, lambda: f64, alpha: f64, seed: u64) -> Result<ProblemSpec> {
    if n < 1 {
        return Err(Error::InvalidParam("n must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParam(format!("lambda must be positive, got {lambda}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParam(format!("alpha must be positive, got {alpha}")));
    }
    let k = Arc::new(coupling_matrix(n, seed));
    let (kv, kj, ks) = (k.clone(), k.clone(), k.clone());
    let mapping = ReductionMapping::closed_form(
        n,
        n,
        Arc::new(move |x| (&*kv * x).map(f64::tanh)),
        Arc::new(move |x| {
            let (_, s) = tanh_parts(&kj, x);
            DMatrix::from_diagonal(&s) * &*kj
        }),
        Arc::new(move |x| {
            let (t, s) = tanh_parts(&ks, x);
            Tensor3::from_fn(n, n, n, |m, i, j| -2.0 * t[m] * s[m] * ks[(m, i)] * ks[(m, j)])
        }),
    )?
    .with_scale_alpha(alpha)?;
    let objective = Objective::new(
        n,
        n,
        Arc::new(HighDimTanh {
            k: (*k).clone(),
            lambda,
            alpha,
        }),
    )?;
    let mut params = BTreeMap::new();
    params.insert("n".to_string(), n as f64);
    params.insert("lambda".to_string(), lambda);
    params.insert("alpha".to_string(), alpha);
    params.insert("seed".to_string(), seed as f64);
    ProblemSpec::new(
        "tanh-hd",
        params,
        objective,
        vec![("tanh".into(), mapping)],
        Some(SolutionSet::Point(DVector::zeros(2 * n))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_matrix_is_seeded() {
        let a = coupling_matrix(7, 3);
        assert_eq!(a, coupling_matrix(7, 3));
        assert_ne!(a, coupling_matrix(7, 4));
        let bytes: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
        let again: Vec<u64> = coupling_matrix(7, 3).iter().map(|v| v.to_bits()).collect();
        assert_eq!(bytes, again);
    }

    #[test]
    fn quadratic_blocks_and_origin() {
        let p = make_highdim_quadratic(6, 10.0, 1).unwrap();
        let z = DVector::zeros(12);
        assert_eq!(p.objective.gradient(&z).unwrap(), z);
        let red = p.reduced("affine").unwrap();
        let k = coupling_matrix(6, 1);
        let x = DVector::from_fn(6, |i, _| i as f64 * 0.1);
        let r = DMatrix::identity(6, 6) + k.transpose() * &k;
        assert!((red.hess_reduced(&x).unwrap().matrix() - &r).norm() < 1e-12);
        assert!((red.pullback_metric(&x).unwrap().matrix() - &r).norm() < 1e-12);
    }

    #[test]
    fn tanh_yy_block_and_origin_identity() {
        let (n, lambda, alpha) = (5, 10.0, 1.5);
        let p = make_highdim_tanh(n, lambda, alpha, 2).unwrap();
        let z = DVector::from_fn(2 * n, |i, _| (i as f64 - 4.0) * 0.2);
        let h = p.objective.hessian(&z).unwrap();
        let yy = h.matrix().view((n, n), (n, n)).into_owned();
        assert_eq!(yy, DMatrix::identity(n, n) * (1.0 + lambda));

        let red = p.reduced("tanh").unwrap();
        let x0 = DVector::zeros(n);
        assert_eq!(red.grad_reduced(&x0).unwrap(), DVector::zeros(n));
        let k = coupling_matrix(n, 2);
        let expect = DMatrix::identity(n, n) + alpha * alpha * k.transpose() * &k;
        assert!((red.hess_reduced(&x0).unwrap().matrix() - &expect).norm() < 1e-12);
        assert!((red.pullback_metric(&x0).unwrap().matrix() - &expect).norm() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(make_highdim_quadratic(0, 1.0, 0).is_err());
        assert!(make_highdim_tanh(3, 1.0, 0.0, 0).is_err());
        assert!(make_highdim_tanh(3, -1.0, 1.0, 0).is_err());
    }
}
