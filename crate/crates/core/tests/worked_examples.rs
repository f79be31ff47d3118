use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use redmap::linops::sym_eig;
use redmap::problems::{coupling_matrix, make_flat_quartic_sine, make_highdim_quadratic, make_highdim_tanh, make_quad2d, plane_curve_curvature};
use redmap::spectral::{smoothness_euclidean, Region};

#[test]
fn quad2d_reduced_values_and_curvatures() {
    let spec = make_quad2d(10.0).unwrap();
    let lin = spec.reduced("linear").unwrap();
    let fixed = spec.reduced("fixed").unwrap();
    let nonlin = spec.reduced("nonlinear").unwrap();
    let x = |v: f64| DVector::from_element(1, v);
    assert_eq!(lin.f_reduced(&x(2.0)).unwrap(), 4.0);
    assert_eq!(fixed.f_reduced(&x(1.0)).unwrap(), 11.0);
    assert_eq!(nonlin.f_reduced(&x(0.0)).unwrap(), 0.0);
    assert_eq!(lin.grad_reduced(&x(3.0)).unwrap()[0], 6.0);

    let at0 = Region::point(x(0.0));
    let full = sym_eig(&spec.objective.hessian(&DVector::zeros(2)).unwrap()).unwrap().max();
    assert!((full - 41.025).abs() < 0.01);
    assert!((smoothness_euclidean(&fixed, &at0).unwrap() - 22.0).abs() < 1e-9);
    assert!((smoothness_euclidean(&lin, &at0).unwrap() - 2.0).abs() < 1e-9);
    assert!((smoothness_euclidean(&nonlin, &at0).unwrap() - 82.0).abs() < 1e-9);
}

#[test]
fn quad2d_correction_at_half_pi() {
    let p = make_quad2d(10.0).unwrap().reduced("nonlinear").unwrap();
    let x = DVector::from_element(1, FRAC_PI_2);
    let c = p.correction_term(&x).unwrap();
    assert!((c.matrix()[(0, 0)] + 80.0).abs() < 1e-12);
    // the same value as ∇²F − DΦᵀ∇²f DΦ
    let e = p.eval(&x, 2).unwrap();
    let diff = e.hess_reduced().matrix() - e.hess_first_part().matrix();
    assert!((diff[(0, 0)] + 80.0).abs() < 1e-12);
}

#[test]
fn flat_quartic_curvatures() {
    let spec = make_flat_quartic_sine(-0.5, 0.5).unwrap();
    let x0 = DVector::zeros(1);
    let f1 = spec.reduced("sin").unwrap();
    for t in [-0.5, -0.25, 0.0, 0.25, 0.5] {
        let x = DVector::from_element(1, t);
        let k = plane_curve_curvature(f1.grad_reduced(&x).unwrap()[0], f1.hess_reduced(&x).unwrap().matrix()[(0, 0)]);
        assert!(k.abs() < 1e-12);
    }
    let f2 = spec.reduced("zero").unwrap();
    let k2 = plane_curve_curvature(f2.grad_reduced(&x0).unwrap()[0], f2.hess_reduced(&x0).unwrap().matrix()[(0, 0)]);
    assert!((k2 - 2.0).abs() < 1e-12);
}

#[test]
fn highdim_quadratic_identities() {
    let n = 40;
    let spec = make_highdim_quadratic(n, 10.0, 0).unwrap();
    let p = spec.reduced("affine").unwrap();
    let k = coupling_matrix(n, 0);
    let r = DMatrix::identity(n, n) + k.transpose() * &k;
    let x = DVector::from_fn(n, |i, _| (i as f64).cos());
    assert!((p.hess_reduced(&x).unwrap().matrix() - &r).norm() < 1e-10);
    assert!((p.pullback_metric(&x).unwrap().matrix() - &r).norm() < 1e-10);
    assert_eq!(spec.objective.gradient(&DVector::zeros(2 * n)).unwrap().norm(), 0.0);
}

#[test]
fn tanh_reduced_formulas() {
    let (n, alpha) = (10, 1.4);
    let spec = make_highdim_tanh(n, 10.0, alpha, 5).unwrap();
    let p = spec.reduced("tanh").unwrap();
    let k = coupling_matrix(n, 5);
    let x = DVector::from_fn(n, |i, _| 0.2 * (i as f64 - 4.5));
    let u = &k * &x;
    let t = u.map(f64::tanh);
    let s = t.map(|v| 1.0 - v * v);
    let grad = &x + alpha * alpha * k.transpose() * s.component_mul(&t);
    assert!((p.grad_reduced(&x).unwrap() - &grad).norm() < 1e-12 * grad.norm());

    let g = s.component_mul(&s) - 2.0 * t.component_mul(&t).component_mul(&s);
    let hess = DMatrix::identity(n, n) + alpha * alpha * k.transpose() * DMatrix::from_diagonal(&g) * &k;
    assert!((p.hess_reduced(&x).unwrap().matrix() - &hess).norm() < 1e-10 * hess.norm());

    let metric = DMatrix::identity(n, n) + alpha * alpha * k.transpose() * DMatrix::from_diagonal(&s.component_mul(&s)) * &k;
    assert!((p.pullback_metric(&x).unwrap().matrix() - &metric).norm() < 1e-10 * metric.norm());

    let x0 = DVector::zeros(n);
    assert_eq!(p.grad_reduced(&x0).unwrap().norm(), 0.0);
}

#[test]
fn tanh_full_hessian_blocks() {
    let (n, lambda) = (6, 10.0);
    let spec = make_highdim_tanh(n, lambda, 1.0, 2).unwrap();
    let z = DVector::from_fn(2 * n, |i, _| ((i * 7) as f64).sin());
    let h = spec.objective.hessian(&z).unwrap();
    let yy = h.matrix().view((n, n), (n, n)).into_owned();
    assert_eq!(yy, DMatrix::identity(n, n) * (1.0 + lambda));
}
