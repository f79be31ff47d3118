//! `propcheck`: the seeded inequality suites as a pass/fail table.

use std::fmt::Write as _;

use redmap::suites::{run_all, SuiteOptions, SuiteOutcome};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// What a failing run prints so the instance can be regenerated alone.
#[derive(Debug, Serialize)]
struct Reproducer<'a> {
    suite: &'a str,
    index: usize,
    seed: u64,
    base_seed: u64,
    count: usize,
    detail: &'a str,
}

pub fn format_table(outcomes: &[SuiteOutcome]) -> String {
    let mut s = format!("{:<18}{:>9}{:>9}{:>10}  status\n", "suite", "checked", "skipped", "failures");
    for o in outcomes {
        let status = if o.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "{:<18}{:>9}{:>9}{:>10}  {status}", o.name, o.checked, o.skipped, o.failures.len());
    }
    s
}

/// Runs every suite; the error carries the first failing instance as JSON.
pub fn propcheck(opts: &SuiteOptions) -> (Vec<SuiteOutcome>, CliResult<()>) {
    let outcomes = run_all(opts);
    let first = outcomes.iter().find_map(|o| o.failures.first().map(|f| (o.name, f)));
    let verdict = match first {
        None => Ok(()),
        Some((suite, f)) => {
            let r = Reproducer {
                suite,
                index: f.index,
                seed: f.seed,
                base_seed: opts.seed,
                count: opts.count,
                detail: &f.detail,
            };
            Err(CliError::Propcheck(serde_json::to_string(&r).expect("plain struct")))
        }
    };
    (outcomes, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_is_vacuous() {
        let (outcomes, verdict) = propcheck(&SuiteOptions::new(11, 0));
        assert!(verdict.is_ok());
        assert!(format_table(&outcomes).lines().skip(1).all(|l| l.ends_with("PASS")));
    }

    #[test]
    fn corruption_reports_the_seed() {
        let opts = SuiteOptions {
            corrupt_hessian: true,
            ..SuiteOptions::new(5, 2)
        };
        let (_, verdict) = propcheck(&opts);
        let Err(CliError::Propcheck(msg)) = verdict else {
            panic!("expected a failure")
        };
        let v: serde_json::Value = serde_json::from_str(&msg).unwrap();
        assert_eq!(v["seed"], redmap::suites::instance_seed(5, 0));
        assert_eq!(v["suite"], "affine_bound");
    }
}
