//! `analyze` and the per-entry work of `sweep`.

use std::path::Path;

use redmap::optim::{run, Method, SolverTrace};
use redmap::spectral::{condition_report, SpectralReport};

use crate::config::{reduced_minimiser, solution_tangent, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_report, write_trace};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: SpectralReport,
    pub trace: Option<SolverTrace>,
}

/// Writes `spectral.json` into `dir`; with `solve` also runs the configured
/// method from the configured start and writes its trace.
pub fn execute(cfg: &RunConfig, seed: u64, dir: &Path, solve: bool) -> CliResult<Analysis> {
    let (spec, p) = cfg.build()?;
    let region = cfg.region(&spec, &p, seed)?;
    let solver = cfg.solver.to_config()?;
    let x1 = cfg.start.resolve(p.n1(), seed)?;
    ensure_dir(dir)?;

    let report = condition_report(&p, &region, &reduced_minimiser(&spec, &p), &solution_tangent(&spec)).map_err(CliError::solver)?;
    write_report(dir, &report)?;
    if !solve {
        return Ok(Analysis { report, trace: None });
    }
    let start = match solver.method {
        Method::GdFull => p.mapping.phi(&x1).map_err(CliError::solver)?,
        _ => x1,
    };
    let trace = run(&p, &start, &solver).map_err(CliError::solver)?;
    write_trace(dir, &trace)?;
    if let Some(e) = &trace.error {
        return Err(CliError::Solver(format!("{} stopped at iteration {}: {e}", solver.method.slug(), trace.iterations())));
    }
    Ok(Analysis { report, trace: Some(trace) })
}

/// Spectral report for one configuration, written to `<out>/<problem>/spectral.json`.
pub fn analyze(cfg: &RunConfig, seed: u64, out: &Path) -> CliResult<SpectralReport> {
    Ok(execute(cfg, seed, &out.join(&cfg.problem.name), false)?.report)
}
