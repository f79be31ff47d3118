//! `sweep`: a grid over problem parameters, run concurrently with each entry
//! in its own directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::analyze::{execute, Analysis};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

type EntryResult = CliResult<(PathBuf, Analysis)>;

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub name: String,
    pub config: RunConfig,
}

/// `KEY=v1,v2,...`
pub fn parse_axis(s: &str) -> Result<(String, Vec<f64>), String> {
    let (k, vs) = s.split_once('=').ok_or_else(|| format!("expected KEY=v1,v2,..., got {s:?}"))?;
    let values = vs
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("{k}: not a number: {v:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((k.trim().to_string(), values))
}

/// Cartesian product of the axes applied to `base`, in axis order.
pub fn expand(base: &RunConfig, axes: &[(String, Vec<f64>)]) -> Vec<SweepEntry> {
    let mut entries = vec![SweepEntry {
        name: base.problem.name.clone(),
        config: base.clone(),
    }];
    for (key, values) in axes {
        entries = entries
            .into_iter()
            .flat_map(|e| {
                values.iter().map(move |v| {
                    let mut config = e.config.clone();
                    config.problem.params.insert(key.clone(), *v);
                    SweepEntry {
                        name: format!("{}_{key}={v}", e.name),
                        config,
                    }
                })
            })
            .collect();
    }
    entries
}

/// Runs up to `jobs` entries at once. Every entry runs to completion; the
/// first error in entry order is returned.
pub fn sweep(entries: &[SweepEntry], seed: u64, out: &Path, jobs: usize) -> CliResult<Vec<(PathBuf, Analysis)>> {
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be positive".into()));
    }
    let mut names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Config("sweep entries must have distinct names".into()));
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<EntryResult>>> = Mutex::new((0..entries.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..jobs.min(entries.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = entries.get(i) else { break };
                let dir = out.join(&entry.name);
                let r = execute(&entry.config, seed, &dir, true).map(|a| (dir, a));
                results.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every entry ran"))
        .collect()
}

pub fn format_summary(rows: &[(PathBuf, Analysis)]) -> String {
    let mut s = String::new();
    for (dir, a) in rows {
        let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let kappa = |k: Option<f64>| k.map_or("null".to_string(), |v| format!("{v:.6}"));
        let iters = a.trace.as_ref().map_or(0, |t| t.iterations());
        let conv = a.trace.as_ref().is_some_and(|t| t.converged);
        let _ = writeln!(
            s,
            "{name}: kappa_f={} kappa_F={} iterations={iters} converged={conv}",
            kappa(a.report.kappa_f),
            kappa(a.report.kappa_big_f)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_a_product() {
        let base = RunConfig::new("quad2d", "linear");
        let axes = vec![parse_axis("M=1,10").unwrap(), parse_axis("x=0.5,1,2").unwrap()];
        let e = expand(&base, &axes);
        assert_eq!(e.len(), 6);
        assert_eq!(e[0].name, "quad2d_M=1_x=0.5");
        assert_eq!(e[5].config.problem.params["M"], 10.0);
        assert!(parse_axis("M=1,a").is_err());
    }
}
