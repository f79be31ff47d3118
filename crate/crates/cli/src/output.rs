//! Artifact writers. Layout under an example directory:
//! `<method>.csv`, `spectral.json`, `eigs.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use redmap::optim::SolverTrace;
use redmap::spectral::SpectralReport;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const EIGS_HEADER: &str = "kind,index,value";
pub const SPECTRAL_FILE: &str = "spectral.json";
pub const EIGS_FILE: &str = "eigs.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigKind {
    Full,
    ReducedEucl,
    ReducedPencil,
}

impl EigKind {
    pub const ALL: [EigKind; 3] = [EigKind::Full, EigKind::ReducedEucl, EigKind::ReducedPencil];

    pub fn as_str(self) -> &'static str {
        match self {
            EigKind::Full => "full",
            EigKind::ReducedEucl => "reduced_eucl",
            EigKind::ReducedPencil => "reduced_pencil",
        }
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_trace(dir: &Path, trace: &SolverTrace) -> CliResult<PathBuf> {
    let path = dir.join(format!("{}.csv", trace.method.slug()));
    write_file(&path, &trace.to_csv())?;
    Ok(path)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_report(dir: &Path, report: &SpectralReport) -> CliResult<PathBuf> {
    let path = dir.join(SPECTRAL_FILE);
    write_file(&path, &to_json(report))?;
    Ok(path)
}

/// Rows are sorted ascending within each kind.
pub fn eigs_csv(series: &[(EigKind, Vec<f64>)]) -> String {
    let mut out = String::from(EIGS_HEADER);
    out.push('\n');
    for (kind, values) in series {
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        for (i, x) in v.iter().enumerate() {
            let _ = writeln!(out, "{},{i},{x:?}", kind.as_str());
        }
    }
    out
}

pub fn write_eigs(dir: &Path, series: &[(EigKind, Vec<f64>)]) -> CliResult<PathBuf> {
    let path = dir.join(EIGS_FILE);
    write_file(&path, &eigs_csv(series))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigs_rows_are_sorted_per_kind() {
        let s = eigs_csv(&[(EigKind::Full, vec![3.0, -1.0]), (EigKind::ReducedPencil, vec![0.5])]);
        assert_eq!(s, "kind,index,value\nfull,0,-1.0\nfull,1,3.0\nreduced_pencil,0,0.5\n");
    }

    #[test]
    fn json_ends_with_newline() {
        assert_eq!(to_json(&[1, 2]), "[\n  1,\n  2\n]\n");
    }
}
