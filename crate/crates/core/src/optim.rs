//! Gradient descent on `f`, on `F`, and preconditioned by the pullback metric.

use std::fmt::Write as _;
use std::io;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{cg_solve, spd_solve, SymMatrix};
use crate::reduced::ReducedProblem;

pub const MAX_SHRINKS: usize = 60;
const IDEMPOTENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    GdFull,
    GdReduced,
    GeoPrecGd,
}

impl Method {
    /// Name used for trace files.
    pub fn slug(self) -> &'static str {
        match self {
            Method::GdFull => "gd_full",
            Method::GdReduced => "gd_reduced",
            Method::GeoPrecGd => "geoprec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepRule {
    Fixed { eta: f64 },
    Armijo { c1: f64, shrink: f64, eta0: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Armijo {
            c1: 1e-4,
            shrink: 0.5,
            eta0: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MetricSolver {
    Direct,
    /// `max_iter = None` means `n₁`.
    Cg { rel_tol: f64, max_iter: Option<usize> },
    WoodburyAffineProjection,
}

impl MetricSolver {
    pub fn cg_default() -> Self {
        MetricSolver::Cg {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    pub method: Method,
    pub step_rule: StepRule,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub metric_solver: MetricSolver,
    /// Record wall time per iteration; when false `elapsed_ns` is 0.
    pub record_time: bool,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            step_rule: StepRule::default(),
            grad_tol: 1e-8,
            max_iter: 1000,
            metric_solver: MetricSolver::Direct,
            record_time: true,
        }
    }

    pub fn with_step(mut self, rule: StepRule) -> Self {
        self.step_rule = rule;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }

    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_metric_solver(mut self, s: MetricSolver) -> Self {
        self.metric_solver = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        match self.step_rule {
            StepRule::Fixed { eta } if !(eta > 0.0 && eta.is_finite()) => return bad(format!("eta must be positive, got {eta}")),
            StepRule::Armijo { c1, shrink, eta0 } => {
                if !(c1 > 0.0 && c1 < 1.0) {
                    return bad(format!("armijo c1 must lie in (0, 1), got {c1}"));
                }
                if !(shrink > 0.0 && shrink < 1.0) {
                    return bad(format!("armijo shrink must lie in (0, 1), got {shrink}"));
                }
                if !(eta0 > 0.0 && eta0.is_finite()) {
                    return bad(format!("armijo eta0 must be positive, got {eta0}"));
                }
            }
            StepRule::Fixed { .. } => {}
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return bad(format!("grad_tol must be positive, got {}", self.grad_tol));
        }
        if let MetricSolver::Cg { rel_tol, max_iter } = self.metric_solver {
            if !(rel_tol > 0.0 && rel_tol < 1.0) {
                return bad(format!("cg rel_tol must lie in (0, 1), got {rel_tol}"));
            }
            if max_iter == Some(0) {
                return bad("cg max_iter must be positive".into());
            }
        }
        Ok(())
    }
}

/// Backtracks from the rule's initial step along `−d`. The accepted step
/// satisfies `f0 − f(x − ηd) ≥ c1·η·gᵀd`.
fn line_search<V>(mut value: V, x: &DVector<f64>, f0: f64, slope: f64, d: &DVector<f64>, rule: StepRule) -> Result<(DVector<f64>, f64)>
where
    V: FnMut(&DVector<f64>) -> Result<f64>,
{
    match rule {
        StepRule::Fixed { eta } => Ok((x - eta * d, eta)),
        StepRule::Armijo { c1, shrink, eta0 } => {
            let mut eta = eta0;
            for _ in 0..=MAX_SHRINKS {
                let cand = x - eta * d;
                // a failed evaluation (e.g. inner solve diverging) counts as rejection
                if let Ok(fc) = value(&cand) {
                    if fc.is_finite() && f0 - fc >= c1 * eta * slope {
                        return Ok((cand, eta));
                    }
                }
                eta *= shrink;
            }
            Err(Error::LineSearchStall { shrinks: MAX_SHRINKS })
        }
    }
}

/// One gradient step `x − η∇f`.
pub fn step_gd<V, G>(mut value_fn: V, mut grad_fn: G, x: &DVector<f64>, cfg: &SolverConfig) -> Result<(DVector<f64>, f64)>
where
    V: FnMut(&DVector<f64>) -> Result<f64>,
    G: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    if cfg.method == Method::GeoPrecGd {
        return Err(Error::InvalidParam("step_gd needs GD_full or GD_reduced".into()));
    }
    let g = grad_fn(x)?;
    if g.iter().all(|v| *v == 0.0) {
        return Ok((x.clone(), 0.0));
    }
    let f0 = value_fn(x)?;
    line_search(value_fn, x, f0, g.norm_squared(), &g, cfg.step_rule)
}

/// `R⁻¹g` via the Woodbury identity for `R = I + JᵀJ`. An orthogonal
/// projection `JᵀJ` gives `g − ½JᵀJg`; otherwise `n₂ < n₁` uses
/// `g − Jᵀ(I + JJᵀ)⁻¹Jg` and the rest fall back to a direct solve.
pub fn woodbury_apply_jacobian(j: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let (n2, n1) = j.shape();
    if g.len() != n1 {
        return Err(Error::DimensionMismatch {
            expected: n1,
            got: g.len(),
            context: "woodbury right-hand side",
        });
    }
    let p = j.transpose() * j;
    if (&p * &p - &p).norm() <= IDEMPOTENT_TOL {
        return Ok(g - 0.5 * (&p * g));
    }
    if n2 < n1 {
        let small = SymMatrix::symmetrize(DMatrix::identity(n2, n2) + j * j.transpose());
        let y = spd_solve(&small, &(j * g))?;
        return Ok(g - j.transpose() * y);
    }
    spd_solve(&SymMatrix::symmetrize(DMatrix::identity(n1, n1) + p), g)
}

pub fn woodbury_apply(p: &ReducedProblem, x1: &DVector<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    woodbury_apply_jacobian(&p.mapping.d_psi(x1)?, g)
}

/// Solves `(I + JᵀJ) z = g`; returns `z` and the CG iteration count.
pub fn metric_solve(j: &DMatrix<f64>, g: &DVector<f64>, solver: MetricSolver) -> Result<(DVector<f64>, usize)> {
    let n1 = j.ncols();
    let direct = || spd_solve(&SymMatrix::symmetrize(DMatrix::identity(n1, n1) + j.transpose() * j), g);
    match solver {
        MetricSolver::Direct => Ok((direct()?, 0)),
        MetricSolver::WoodburyAffineProjection => Ok((woodbury_apply_jacobian(j, g)?, 0)),
        MetricSolver::Cg { rel_tol, max_iter } => {
            let sol = cg_solve(|v| v + j.transpose() * (j * v), g, rel_tol, max_iter.unwrap_or(n1).max(1))?;
            if sol.converged {
                Ok((sol.solution, sol.iters))
            } else {
                Ok((direct()?, sol.iters))
            }
        }
    }
}

/// Preconditioned direction `R⁻¹∇F`, the gradient `∇F` and the metric-solve
/// iteration count at `x1`.
pub fn geoprec_direction(p: &ReducedProblem, x1: &DVector<f64>, solver: MetricSolver) -> Result<(DVector<f64>, DVector<f64>, usize)> {
    let e = p.eval(x1, 1)?;
    let g = e.grad_reduced();
    let (z, iters) = metric_solve(&e.jacobian, &g, solver)?;
    Ok((z, g, iters))
}

/// One step `x₁ − ηR⁻¹∇F`; returns the new point, `η` and metric-solve iterations.
pub fn step_geoprec(p: &ReducedProblem, x1: &DVector<f64>, cfg: &SolverConfig) -> Result<(DVector<f64>, f64, usize)> {
    if cfg.method != Method::GeoPrecGd {
        return Err(Error::InvalidParam("step_geoprec needs GeoPrecGD".into()));
    }
    let e = p.eval(x1, 1)?;
    let g = e.grad_reduced();
    if g.iter().all(|v| *v == 0.0) {
        return Ok((x1.clone(), 0.0, 0));
    }
    let (z, iters) = metric_solve(&e.jacobian, &g, cfg.metric_solver)?;
    let (x, eta) = line_search(|y| p.f_reduced(y), x1, e.value, g.dot(&z), &z, cfg.step_rule)?;
    Ok((x, eta, iters))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub iter: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace {
    pub method: Method,
    pub records: Vec<Record>,
    pub converged: bool,
    pub final_point: Vec<f64>,
    /// Error that stopped the run early, if any.
    pub error: Option<String>,
}

pub const TRACE_HEADER: &str = "iter,f_value,grad_norm,step_size,elapsed_ns";

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("trace has an initial record")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(TRACE_HEADER);
        s.push('\n');
        for r in &self.records {
            writeln!(s, "{},{:?},{:?},{:?},{}", r.iter, r.value, r.grad_norm, r.step, r.elapsed_ns).expect("writing to a String");
        }
        s
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

/// Runs the configured method. `start` lives in the full space for GD_full
/// and in the reduced space otherwise. Step failures end the run and are
/// kept in `SolverTrace::error`.
pub fn run(p: &ReducedProblem, start: &DVector<f64>, cfg: &SolverConfig) -> Result<SolverTrace> {
    cfg.validate()?;
    let expected = match cfg.method {
        Method::GdFull => p.objective.dim(),
        Method::GdReduced | Method::GeoPrecGd => p.n1(),
    };
    if start.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: start.len(),
            context: "solver start",
        });
    }
    if start.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solver start"));
    }
    let clock = Instant::now();
    let elapsed = |c: &Instant| if cfg.record_time { c.elapsed().as_nanos() as u64 } else { 0 };
    let value_grad = |x: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
        match cfg.method {
            Method::GdFull => Ok((p.objective.value(x)?, p.objective.gradient(x)?)),
            _ => {
                let e = p.eval(x, 1)?;
                Ok((e.value, e.grad_reduced()))
            }
        }
    };

    let mut x = start.clone();
    let (f0, g0) = value_grad(&x)?;
    let mut records = vec![Record {
        iter: 0,
        value: f0,
        grad_norm: g0.norm(),
        step: 0.0,
        elapsed_ns: elapsed(&clock),
    }];
    let mut converged = g0.norm() <= cfg.grad_tol;
    let mut error = None;
    let mut iter = 0;
    while !converged && iter < cfg.max_iter {
        iter += 1;
        let stepped = match cfg.method {
            Method::GdFull => step_gd(|y| p.objective.value(y), |y| p.objective.gradient(y), &x, cfg),
            Method::GdReduced => step_gd(|y| p.f_reduced(y), |y| p.grad_reduced(y), &x, cfg),
            Method::GeoPrecGd => step_geoprec(p, &x, cfg).map(|(y, eta, _)| (y, eta)),
        };
        let outcome = stepped.and_then(|(y, eta)| value_grad(&y).map(|(f, g)| (y, eta, f, g)));
        match outcome {
            Ok((y, eta, f, g)) => {
                x = y;
                converged = g.norm() <= cfg.grad_tol;
                records.push(Record {
                    iter,
                    value: f,
                    grad_norm: g.norm(),
                    step: eta,
                    elapsed_ns: elapsed(&clock),
                });
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    Ok(SolverTrace {
        method: cfg.method,
        records,
        converged,
        final_point: x.as_slice().to_vec(),
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::sym_eig;
    use crate::problems::{coupling_matrix, make_flat_quartic_sine, make_highdim_quadratic, make_highdim_tanh, make_quad2d};
    use crate::reduced::Objective;
    use crate::ReductionMapping;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geo(rule: StepRule) -> SolverConfig {
        SolverConfig::new(Method::GeoPrecGd).with_step(rule)
    }

    #[test]
    fn newton_step_on_linear_reduction() {
        let p = make_quad2d(10.0).unwrap().reduced("linear").unwrap();
        let (x, eta, _) = step_geoprec(&p, &DVector::from_element(1, 5.0), &geo(StepRule::Fixed { eta: 1.0 })).unwrap();
        assert!(x[0].abs() < 1e-14);
        assert_eq!(eta, 1.0);
    }

    #[test]
    fn one_step_on_highdim_quadratic() {
        let p = make_highdim_quadratic(20, 10.0, 4).unwrap().reduced("affine").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for solver in [MetricSolver::Direct, MetricSolver::WoodburyAffineProjection] {
            let x0 = DVector::from_fn(20, |_, _| rng.random_range(-3.0..3.0));
            let cfg = geo(StepRule::default()).with_metric_solver(solver).with_grad_tol(1e-10);
            let t = run(&p, &x0, &cfg).unwrap();
            assert!(t.converged, "{solver:?}");
            assert_eq!(t.iterations(), 1);
        }
        // CG stops at a relative residual, so one step shrinks ‖∇F‖ by about that factor
        let x0 = DVector::from_fn(20, |_, _| rng.random_range(-3.0..3.0));
        let cfg = geo(StepRule::default()).with_metric_solver(MetricSolver::cg_default()).with_max_iter(1);
        let t = run(&p, &x0, &cfg).unwrap();
        assert!(t.records[1].grad_norm <= 1e-8 * t.records[0].grad_norm);
    }

    #[test]
    fn tanh_direction_is_gauss_newton() {
        let (n, alpha) = (12, 1.3);
        let p = make_highdim_tanh(n, 10.0, alpha, 6).unwrap().reduced("tanh").unwrap();
        let k = coupling_matrix(n, 6);
        let x = DVector::from_fn(n, |i, _| 0.3 * (i as f64).sin());
        let (z, g, _) = geoprec_direction(&p, &x, MetricSolver::Direct).unwrap();
        let s = (&k * &x).map(|u| 1.0 - u.tanh().powi(2));
        let jr = alpha * DMatrix::from_diagonal(&s) * &k;
        let gn = (DMatrix::identity(n, n) + jr.transpose() * &jr).lu().solve(&g).unwrap();
        assert!((&z - &gn).norm() <= 1e-10 * gn.norm());
    }

    #[test]
    fn gd_steps() {
        let cfg = SolverConfig::new(Method::GdFull).with_step(StepRule::Fixed { eta: 1.0 });
        let v = |x: &DVector<f64>| Ok(0.5 * x.norm_squared());
        let g = |x: &DVector<f64>| Ok(x.clone());
        let (x, _) = step_gd(v, g, &DVector::from_element(1, 3.0), &cfg).unwrap();
        assert_eq!(x[0], 0.0);
        let (x, eta) = step_gd(v, g, &DVector::zeros(1), &cfg).unwrap();
        assert_eq!((x[0], eta), (0.0, 0.0));
    }

    #[test]
    fn fixed_step_gd_contracts_at_classical_rate() {
        let spec = make_quad2d(10.0).unwrap();
        let beta = 21.0 + 401f64.sqrt();
        let kappa = beta / (21.0 - 401f64.sqrt());
        let cfg = SolverConfig::new(Method::GdFull).with_step(StepRule::Fixed { eta: 1.0 / beta });
        let f = |x: &DVector<f64>| spec.objective.value(x);
        let mut x = DVector::from_vec(vec![1.0, -2.0]);
        for _ in 0..50 {
            let (y, _) = step_gd(f, |x| spec.objective.gradient(x), &x, &cfg).unwrap();
            assert!(f(&y).unwrap() <= (1.0 - 1.0 / kappa) * f(&x).unwrap() + 1e-15);
            x = y;
        }
    }

    #[test]
    fn run_geoprec_single_step_and_gd_many() {
        let p = make_quad2d(10.0).unwrap().reduced("linear").unwrap();
        let t = run(&p, &DVector::from_element(1, 2.0), &geo(StepRule::Fixed { eta: 1.0 })).unwrap();
        assert!(t.converged);
        assert_eq!(t.records.len(), 2);

        let cfg = SolverConfig::new(Method::GdFull).with_grad_tol(1e-8).with_max_iter(10_000);
        let t = run(&p, &DVector::from_vec(vec![2.0, 2.0]), &cfg).unwrap();
        assert!(t.converged);
        assert!(t.iterations() >= 50);
        assert!(t.records.windows(2).all(|w| w[1].value <= w[0].value));
        assert!(t.last().grad_norm <= 1e-8);
    }

    #[test]
    fn zero_budget() {
        let p = make_quad2d(10.0).unwrap().reduced("linear").unwrap();
        let cfg = geo(StepRule::default()).with_max_iter(0);
        let t = run(&p, &DVector::from_element(1, 2.0), &cfg).unwrap();
        assert_eq!(t.records.len(), 1);
        assert!(!t.converged);
        let t = run(&p, &DVector::zeros(1), &cfg).unwrap();
        assert!(t.converged);
    }

    #[test]
    fn woodbury_examples() {
        let j = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let z = woodbury_apply_jacobian(&j, &DVector::from_vec(vec![2.0, 3.0])).unwrap();
        assert_eq!(z, DVector::from_vec(vec![1.0, 3.0]));
        let z = woodbury_apply_jacobian(&DMatrix::from_element(1, 1, 1.0), &DVector::from_element(1, 4.0)).unwrap();
        assert_eq!(z[0], 2.0);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut normal = || rng.random_range(-1.0..1.0);
        let a = DMatrix::from_fn(3, 2, |_, _| normal());
        let b = DMatrix::from_fn(2, 8, |_, _| normal());
        let j = a * b;
        let g = DVector::from_fn(8, |_, _| normal());
        let r = SymMatrix::symmetrize(DMatrix::identity(8, 8) + j.transpose() * &j);
        let direct = spd_solve(&r, &g).unwrap();
        let w = woodbury_apply_jacobian(&j, &g).unwrap();
        assert!((&w - &direct).norm() <= 1e-10 * direct.norm());
        // square jacobian takes the direct path
        let sq = DMatrix::from_fn(4, 4, |i, k| (i * 4 + k) as f64 * 0.1);
        let g = DVector::from_element(4, 1.0);
        let direct = spd_solve(&SymMatrix::symmetrize(DMatrix::identity(4, 4) + sq.transpose() * &sq), &g).unwrap();
        assert!((woodbury_apply_jacobian(&sq, &g).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn cg_fallback_keeps_exact_direction() {
        let p = make_highdim_quadratic(15, 10.0, 2).unwrap().reduced("affine").unwrap();
        let x = DVector::from_element(15, 1.0);
        let starved = MetricSolver::Cg {
            rel_tol: 1e-12,
            max_iter: Some(1),
        };
        let (z, _, iters) = geoprec_direction(&p, &x, starved).unwrap();
        let (zd, _, _) = geoprec_direction(&p, &x, MetricSolver::Direct).unwrap();
        assert_eq!(iters, 1);
        assert!((z - &zd).norm() <= 1e-12 * zd.norm());
    }

    #[test]
    fn armijo_monotone_on_nonlinear_problems() {
        let tanh = make_highdim_tanh(10, 10.0, 1.0, 1).unwrap().reduced("tanh").unwrap();
        let start = DVector::from_fn(10, |i, _| if i % 2 == 0 { 1.5 } else { -1.0 });
        for m in [Method::GdReduced, Method::GeoPrecGd] {
            let t = run(&tanh, &start, &SolverConfig::new(m).with_max_iter(200)).unwrap();
            assert!(t.records.windows(2).all(|w| w[1].value <= w[0].value), "{m:?}");
            assert!(t.error.is_none());
        }
        let fq = make_flat_quartic_sine(-0.5, 0.5).unwrap().reduced("sin-implicit").unwrap();
        let t = run(&fq, &DVector::from_element(1, 2.0), &geo(StepRule::default())).unwrap();
        assert!(t.records.windows(2).all(|w| w[1].value <= w[0].value));
    }

    #[test]
    fn wrong_gradient_stalls() {
        let obj = Objective::from_fns(1, 1, |x| x.norm_squared(), |x| -2.0 * x, |_| DMatrix::identity(2, 2) * 2.0).unwrap();
        let m = ReductionMapping::constant(1, DVector::zeros(1)).unwrap();
        let p = ReducedProblem::new(obj, m).unwrap();
        let t = run(&p, &DVector::from_vec(vec![1.0, 0.0]), &SolverConfig::new(Method::GdFull)).unwrap();
        assert!(t.error.unwrap().contains("60"));
        assert!(!t.converged);
    }

    #[test]
    fn descent_direction_positive() {
        let p = make_highdim_tanh(8, 10.0, 2.0, 3).unwrap().reduced("tanh").unwrap();
        let (z, g, _) = geoprec_direction(&p, &DVector::from_element(8, 0.7), MetricSolver::Direct).unwrap();
        assert!(g.dot(&z) > 0.0);
        let r = p.pullback_metric(&DVector::from_element(8, 0.7)).unwrap();
        assert!(sym_eig(&r).unwrap().min() >= 1.0 - 1e-12);
    }

    #[test]
    fn csv_layout() {
        let p = make_quad2d(10.0).unwrap().reduced("linear").unwrap();
        let mut cfg = geo(StepRule::Fixed { eta: 1.0 }).with_metric_solver(MetricSolver::WoodburyAffineProjection);
        cfg.record_time = false;
        let csv = run(&p, &DVector::from_element(1, 2.0), &cfg).unwrap().to_csv();
        assert_eq!(csv, "iter,f_value,grad_norm,step_size,elapsed_ns\n0,4.0,4.0,0.0,0\n1,0.0,0.0,1.0,0\n");
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(Method::GdFull).with_step(StepRule::Fixed { eta: 0.0 }).validate().is_err());
        let bad = StepRule::Armijo {
            c1: 1.5,
            shrink: 0.5,
            eta0: 1.0,
        };
        assert!(SolverConfig::new(Method::GdFull).with_step(bad).validate().is_err());
        assert!(SolverConfig::new(Method::GdFull).with_grad_tol(-1.0).validate().is_err());
        let p = make_quad2d(10.0).unwrap().reduced("linear").unwrap();
        assert!(run(&p, &DVector::zeros(1), &SolverConfig::new(Method::GdFull)).is_err());
    }
}
