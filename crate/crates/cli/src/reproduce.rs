//! `reproduce`: the three worked optimisation examples.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use redmap::linops::{gen_eig, sym_eig};
use redmap::optim::{geoprec_direction, run, step_geoprec, Method, MetricSolver, SolverConfig, SolverTrace, StepRule};
use redmap::problems::{coupling_matrix, make_problem, ProblemSpec};
use redmap::spectral::{condition_report, Region, SpectralReport};
use redmap::ReducedProblem;

use crate::config::{reduced_minimiser, seeded_start, solution_tangent, DEFAULT_RADIUS, DEFAULT_SAMPLES};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_eigs, write_report, write_trace, EigKind};

pub const GAUSS_NEWTON_ITERS: usize = 20;
pub const GAUSS_NEWTON_TOL: f64 = 1e-10;
/// Fixed step for the iterates after the Armijo run has converged.
pub const GAUSS_NEWTON_FIXED_ETA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Example {
    #[value(name = "quad2d")]
    Quad2d,
    #[value(name = "quad-hd")]
    QuadHd,
    #[value(name = "tanh-hd")]
    TanhHd,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Quad2d => "quad2d",
            Example::QuadHd => "quad-hd",
            Example::TanhHd => "tanh-hd",
        }
    }

    pub fn mapping(self) -> &'static str {
        match self {
            Example::Quad2d => "linear",
            Example::QuadHd => "affine",
            Example::TanhHd => "tanh",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub example: Example,
    pub m: Option<f64>,
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub record_time: bool,
    pub max_iter: usize,
}

impl ReproduceOptions {
    pub fn new(example: Example) -> Self {
        Self {
            example,
            m: None,
            n: None,
            lambda: None,
            alpha: None,
            record_time: false,
            max_iter: 1000,
        }
    }

    fn params(&self, seed: u64) -> CliResult<BTreeMap<String, f64>> {
        let mut params = BTreeMap::new();
        let mut put = |k: &str, v: Option<f64>, allowed: bool| -> CliResult<()> {
            match (v, allowed) {
                (Some(v), true) => {
                    params.insert(k.to_string(), v);
                    Ok(())
                }
                (Some(_), false) => Err(CliError::Config(format!("--{k} does not apply to {}", self.example.name()))),
                (None, _) => Ok(()),
            }
        };
        let hd = self.example != Example::Quad2d;
        put("M", self.m, !hd)?;
        put("n", self.n.map(|n| n as f64), hd)?;
        put("lambda", self.lambda, hd)?;
        put("alpha", self.alpha, self.example == Example::TanhHd)?;
        if hd {
            params.insert("seed".into(), seed as f64);
        }
        Ok(params)
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOutcome {
    pub dir: PathBuf,
    pub traces: Vec<SolverTrace>,
    pub report: SpectralReport,
    /// Largest relative deviation from the Gauss–Newton direction (tanh-hd only).
    pub gauss_newton_deviation: Option<f64>,
}

/// Runs all three methods from a common seeded start (drawn in the full
/// space, truncated to `x₁` for the reduced methods) and writes the artifacts
/// into `<out>/<example>/`.
pub fn reproduce(opts: &ReproduceOptions, seed: u64, out: &Path) -> CliResult<ReproduceOutcome> {
    if opts.max_iter == 0 {
        return Err(CliError::Config("--max-iter must be positive".into()));
    }
    let spec = make_problem(opts.example.name(), &opts.params(seed)?).map_err(CliError::config)?;
    let p = spec.reduced(opts.example.mapping()).map_err(CliError::config)?;
    let dir = out.join(opts.example.name());
    ensure_dir(&dir)?;

    // a point on the graph of Ψ would make the unit GD step on quad-hd exact
    let x_full = seeded_start(p.objective.dim(), seed);
    let x1 = x_full.rows(0, p.n1()).into_owned();
    let mut traces = Vec::new();
    for method in [Method::GdFull, Method::GdReduced, Method::GeoPrecGd] {
        let mut cfg = SolverConfig::new(method).with_max_iter(opts.max_iter);
        cfg.record_time = opts.record_time;
        let start = if method == Method::GdFull { &x_full } else { &x1 };
        let trace = run(&p, start, &cfg).map_err(CliError::solver)?;
        write_trace(&dir, &trace)?;
        traces.push(trace);
    }

    let report = spectral_report(&spec, &p, seed)?;
    write_report(&dir, &report)?;
    write_eigs(&dir, &eigenspectra(&p, &x1)?)?;

    if let Some(t) = traces.iter().find(|t| t.error.is_some()) {
        return Err(CliError::Solver(format!(
            "{} stopped at iteration {}: {}",
            t.method.slug(),
            t.iterations(),
            t.error.as_deref().unwrap_or_default()
        )));
    }

    let gauss_newton_deviation = match opts.example {
        Example::TanhHd => {
            let n = p.n1();
            let k = coupling_matrix(n, seed);
            let alpha = spec.param("alpha").unwrap_or(1.0);
            let dev = gauss_newton_deviation(&p, &k, alpha, &x1, GAUSS_NEWTON_ITERS)?;
            if dev.is_nan() || dev > GAUSS_NEWTON_TOL {
                return Err(CliError::Solver(format!(
                    "preconditioned direction deviates from Gauss-Newton by {dev:e}"
                )));
            }
            Some(dev)
        }
        _ => None,
    };

    Ok(ReproduceOutcome {
        dir,
        traces,
        report,
        gauss_newton_deviation,
    })
}

fn spectral_report(spec: &ProblemSpec, p: &ReducedProblem, seed: u64) -> CliResult<SpectralReport> {
    let center = reduced_minimiser(spec, p);
    let region = Region::new(center.clone(), DEFAULT_RADIUS, DEFAULT_SAMPLES, seed).map_err(CliError::config)?;
    condition_report(p, &region, &center, &solution_tangent(spec)).map_err(CliError::solver)
}

/// Spectra of `∇²f` at `Φ(x₁)`, of `∇²F` at `x₁`, and of the pencil `(∇²F, R)`.
pub fn eigenspectra(p: &ReducedProblem, x1: &DVector<f64>) -> CliResult<Vec<(EigKind, Vec<f64>)>> {
    let e = p.eval(x1, 2).map_err(CliError::solver)?;
    let full = sym_eig(e.hess_full.as_ref().expect("order 2")).map_err(CliError::solver)?;
    let hess = e.hess_reduced();
    let reduced = sym_eig(&hess).map_err(CliError::solver)?;
    let pencil = gen_eig(&hess, &e.metric()).map_err(CliError::solver)?;
    Ok(vec![
        (EigKind::Full, full.values.as_slice().to_vec()),
        (EigKind::ReducedEucl, reduced.values.as_slice().to_vec()),
        (EigKind::ReducedPencil, pencil.as_slice().to_vec()),
    ])
}

/// Least-squares Gauss–Newton step for the residual `r(x) = (x, α tanh(Kx))`,
/// whose half squared norm is the reduced tanh objective. Solved by QR of the
/// stacked Jacobian `[I; α diag(1 − tanh²(Kx)) K]`.
pub fn gauss_newton_step(k: &DMatrix<f64>, alpha: f64, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let t = (k * x).map(f64::tanh);
    let s = t.map(|v| 1.0 - v * v);
    let mut j = DMatrix::zeros(2 * n, n);
    j.view_mut((0, 0), (n, n)).fill_with_identity();
    j.view_mut((n, 0), (n, n)).copy_from(&(DMatrix::from_diagonal(&s) * k * alpha));
    let mut r = DVector::zeros(2 * n);
    r.rows_mut(0, n).copy_from(x);
    r.rows_mut(n, n).copy_from(&(t * alpha));
    let qr = j.qr();
    let rhs = qr.q().transpose() * r;
    qr.r().solve_upper_triangular(&rhs).expect("R has a unit-bounded diagonal")
}

/// Worst relative gap between the preconditioned direction and the
/// Gauss–Newton step over `iters` iterates: the Armijo run first, then
/// fixed-step iterates from the same start once it has converged.
pub fn gauss_newton_deviation(
    p: &ReducedProblem,
    k: &DMatrix<f64>,
    alpha: f64,
    start: &DVector<f64>,
    iters: usize,
) -> CliResult<f64> {
    let armijo = SolverConfig::new(Method::GeoPrecGd);
    let fixed = armijo.clone().with_step(StepRule::Fixed {
        eta: GAUSS_NEWTON_FIXED_ETA,
    });
    let mut cfg = &armijo;
    let mut x = start.clone();
    let mut worst: f64 = 0.0;
    for _ in 0..iters {
        let (z, g, _) = geoprec_direction(p, &x, MetricSolver::Direct).map_err(CliError::solver)?;
        if g.norm() <= armijo.grad_tol && cfg == &armijo {
            cfg = &fixed;
            x = start.clone();
            continue;
        }
        let d = gauss_newton_step(k, alpha, &x);
        if d.norm() > 0.0 {
            worst = worst.max((&z - &d).norm() / d.norm());
        }
        x = step_geoprec(p, &x, cfg).map_err(CliError::solver)?.0;
    }
    Ok(worst)
}
