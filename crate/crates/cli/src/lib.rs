//! Command-line driver for the redmap experiments: reproduce the worked
//! examples, analyse a configuration, run the property suites, sweep a grid.

pub mod analyze;
pub mod config;
pub mod error;
pub mod output;
pub mod propcheck;
pub mod reproduce;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use redmap::suites::SuiteOptions;

use crate::config::{parse_param, MethodName, Overrides, RunConfig, StartSpec};
use crate::error::{CliError, CliResult};
use crate::reproduce::{Example, ReproduceOptions};

pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "redmap", version, about = "Reduction mappings and pullback-metric preconditioning")]
pub struct Cli {
    /// Seed for starts, coupling matrices and region samples.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (overrides `out_dir` in the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Concurrent sweep entries.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// TOML or JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run GD on f, GD on F and GeoPrecGD on F for a worked example.
    Reproduce(ReproduceArgs),
    /// Write the spectral report for a configuration.
    Analyze(RunArgs),
    /// Run the randomized inequality suites.
    Propcheck(PropcheckArgs),
    /// Analyse and solve every point of a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub example: Example,
    #[arg(long = "M")]
    pub m: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Record wall time per iteration (outputs are then not reproducible).
    #[arg(long)]
    pub record_time: bool,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub mapping: Option<String>,
    /// Problem parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// `unit`, `zero`, `random`, `random(<seed>)` or a JSON vector.
    #[arg(long, value_parser = parse_start)]
    pub start: Option<StartSpec>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MethodArg {
    #[value(name = "gd_full")]
    GdFull,
    #[value(name = "gd_reduced")]
    GdReduced,
    #[value(name = "geoprec")]
    Geoprec,
}

impl From<MethodArg> for MethodName {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::GdFull => MethodName::GdFull,
            MethodArg::GdReduced => MethodName::GdReduced,
            MethodArg::Geoprec => MethodName::Geoprec,
        }
    }
}

#[derive(Debug, Args)]
pub struct PropcheckArgs {
    /// Instances per suite (interlacing runs twice as many).
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Test hook: shift analytic Hessians so the suites must fail.
    #[arg(long, hide = true)]
    pub corrupt_hessian: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Grid axis over a problem parameter, repeatable.
    #[arg(long = "vary", value_name = "KEY=V1,V2,...", value_parser = sweep::parse_axis)]
    pub vary: Vec<(String, Vec<f64>)>,
}

fn parse_start(s: &str) -> Result<StartSpec, String> {
    StartSpec::parse(s).map_err(|e| e.to_string())
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            problem: self.problem.clone(),
            mapping: self.mapping.clone(),
            params: self.params.clone(),
            radius: self.radius,
            samples: self.samples,
            start: self.start.clone(),
            method: self.method.map(Into::into),
            max_iter: self.max_iter,
            out_dir: None,
        }
    }
}

impl Cli {
    fn run_config(&self, args: &RunArgs) -> CliResult<RunConfig> {
        let base = self.config.as_deref().map(RunConfig::load).transpose()?;
        let mut cfg = args.overrides().apply(base)?;
        // the global seed draws the coupling matrix unless the file fixes it
        if matches!(cfg.problem.name.as_str(), "quad-hd" | "tanh-hd") {
            cfg.problem.params.entry("seed".into()).or_insert(self.seed as f64);
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&RunConfig>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}

/// Executes the parsed command, printing progress to stdout.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Reproduce(a) => {
            if cli.config.is_some() {
                return Err(CliError::Config("reproduce takes flags only, not --config".into()));
            }
            let opts = ReproduceOptions {
                example: a.example,
                m: a.m,
                n: a.n,
                lambda: a.lambda,
                alpha: a.alpha,
                record_time: a.record_time,
                max_iter: a.max_iter,
            };
            let r = reproduce::reproduce(&opts, cli.seed, &cli.out_dir(None))?;
            for t in &r.traces {
                println!(
                    "{:<11} iterations={:<5} converged={:<5} f={:e} |grad|={:e}",
                    t.method.slug(),
                    t.iterations(),
                    t.converged,
                    t.last().value,
                    t.last().grad_norm
                );
            }
            if let Some(d) = r.gauss_newton_deviation {
                println!("gauss_newton max_rel_deviation={d:e}");
            }
            println!("wrote {}", r.dir.display());
        }
        Command::Analyze(a) => {
            let cfg = cli.run_config(a)?;
            let out = cli.out_dir(Some(&cfg));
            let report = analyze::analyze(&cfg, cli.seed, &out)?;
            print!("{}", output::to_json(&report));
        }
        Command::Propcheck(a) => {
            let opts = SuiteOptions {
                corrupt_hessian: a.corrupt_hessian,
                ..SuiteOptions::new(cli.seed, a.count)
            };
            let (outcomes, verdict) = propcheck::propcheck(&opts);
            print!("{}", propcheck::format_table(&outcomes));
            verdict?;
        }
        Command::Sweep(a) => {
            let cfg = cli.run_config(&a.run)?;
            let out = cli.out_dir(Some(&cfg));
            let entries = sweep::expand(&cfg, &a.vary);
            let rows = sweep::sweep(&entries, cli.seed, &out, cli.jobs)?;
            print!("{}", sweep::format_summary(&rows));
        }
    }
    Ok(())
}

/// Parses `args`, runs, and maps failures to exit codes with a diagnostic
/// line on stderr.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("redmap: {e}");
            e.exit_code()
        }
    }
}

/// Directory `reproduce` writes for `example` under `out`.
pub fn example_dir(out: &Path, example: Example) -> PathBuf {
    out.join(example.name())
}
