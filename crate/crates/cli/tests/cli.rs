use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use redmap::optim::TRACE_HEADER;
use redmap::spectral::SpectralReport;
use tempfile::TempDir;

fn redmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redmap")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &TempDir) -> String {
    dir.path().to_str().unwrap().to_string()
}

fn check_trace(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER), "{}", path.display());
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], i as f64);
        assert!(r[1].is_finite() && r[2] >= 0.0 && r[3] >= 0.0 && r[4] >= 0.0);
    }
    rows
}

fn check_report(path: &Path) -> SpectralReport {
    let text = fs::read_to_string(path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut fields = SpectralReport::FIELDS.to_vec();
    keys.sort_unstable();
    fields.sort_unstable();
    assert_eq!(keys, fields);
    serde_json::from_value(v).unwrap()
}

fn check_eigs(path: &Path, dims: [usize; 3]) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind,index,value"));
    let mut seen = [Vec::new(), Vec::new(), Vec::new()];
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 3);
        let k = ["full", "reduced_eucl", "reduced_pencil"].iter().position(|k| *k == cols[0]).unwrap();
        assert_eq!(cols[1].parse::<usize>().unwrap(), seen[k].len());
        seen[k].push(cols[2].parse::<f64>().unwrap());
    }
    for (k, v) in seen.iter().enumerate() {
        assert_eq!(v.len(), dims[k]);
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn reproduce_quad2d_writes_schema_valid_artifacts() {
    let dir = TempDir::new().unwrap();
    let o = redmap(&["reproduce", "quad2d", "--M", "10", "--out", &out_arg(&dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ex = dir.path().join("quad2d");
    let geo = check_trace(&ex.join("geoprec.csv"));
    assert_eq!(geo.len(), 2);
    let full = check_trace(&ex.join("gd_full.csv"));
    assert!(full.len() > 100);
    check_trace(&ex.join("gd_reduced.csv"));
    let r = check_report(&ex.join("spectral.json"));
    assert!((r.kappa_f.unwrap() - 42.07).abs() < 0.01);
    check_eigs(&ex.join("eigs.csv"), [2, 1, 1]);
}

#[test]
fn reproduce_tanh_logs_gauss_newton_check() {
    let dir = TempDir::new().unwrap();
    let o = redmap(&["reproduce", "tanh-hd", "--n", "12", "--lambda", "10", "--alpha", "1", "--out", &out_arg(&dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("gauss_newton")).unwrap();
    let dev: f64 = line.split('=').nth(1).unwrap().parse().unwrap();
    assert!(dev <= 1e-10);
    check_eigs(&dir.path().join("tanh-hd/eigs.csv"), [24, 12, 12]);
}

#[test]
fn reproduce_is_byte_identical_and_time_is_opt_in() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = |d: &TempDir| vec!["reproduce".to_string(), "quad-hd".into(), "--n".into(), "8".into(), "--seed".into(), "3".into(), "--out".into(), out_arg(d)];
    for d in [&a, &b] {
        let argv = args(d);
        assert!(redmap(&argv.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    }
    for f in ["gd_full.csv", "gd_reduced.csv", "geoprec.csv", "spectral.json", "eigs.csv"] {
        let x = fs::read(a.path().join("quad-hd").join(f)).unwrap();
        let y = fs::read(b.path().join("quad-hd").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
    let rows = check_trace(&a.path().join("quad-hd/gd_full.csv"));
    assert!(rows.iter().all(|r| r[4] == 0.0));

    let mut argv = args(&c);
    argv.push("--record-time".into());
    assert!(redmap(&argv.iter().map(String::as_str).collect::<Vec<_>>()).status.success());
    let timed = check_trace(&c.path().join("quad-hd/gd_full.csv"));
    assert!(timed.windows(2).all(|w| w[1][4] >= w[0][4]));
    assert!(timed.last().unwrap()[4] > 0.0);
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = out_arg(&dir);
    for args in [
        vec!["reproduce", "quad2d", "--n", "4", "--out", &out],
        vec!["reproduce", "quad2d", "--M", "-1", "--out", &out],
        vec!["reproduce", "quad-hd", "--n", "0", "--out", &out],
        vec!["analyze", "--problem", "quad2d", "--mapping", "bogus", "--out", &out],
        vec!["analyze", "--problem", "nope", "--mapping", "linear", "--out", &out],
        vec!["analyze", "--out", &out],
        vec!["reproduce", "quad5d"],
    ] {
        let o = redmap(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_2() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = redmap(&["reproduce", "quad2d", "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    // a fixed step this large diverges to non-finite values
    fs::write(
        &cfg,
        "[problem]\nname = \"quad2d\"\n[mapping]\nname = \"linear\"\n[solver]\nmethod = \"gd_full\"\nstep = \"fixed\"\neta = 10.0\nmax_iter = 2000\n",
    )
    .unwrap();
    let o = redmap(&["sweep", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&dir)]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("redmap: solver failure"), "{err}");
}

#[test]
fn analyze_reads_toml_and_json_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let toml = dir.path().join("a.toml");
    fs::write(
        &toml,
        "[problem]\nname = \"quad2d\"\nparams = { M = 10 }\n[mapping]\nname = \"nonlinear\"\n[region]\nradius = 1.0\nsamples = 16\n",
    )
    .unwrap();
    let out = out_arg(&dir);
    let o = redmap(&["analyze", "--config", toml.to_str().unwrap(), "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = check_report(&dir.path().join("quad2d/spectral.json"));
    assert!(r.hypothesis_failed);
    assert_eq!(r.bound_affine_holds, None);

    let json = dir.path().join("a.json");
    fs::write(&json, r#"{"problem": {"name": "quad2d"}, "mapping": {"name": "nonlinear"}}"#).unwrap();
    let o = redmap(&["analyze", "--config", json.to_str().unwrap(), "--mapping", "linear", "--out", &out]);
    assert!(o.status.success());
    let r = check_report(&dir.path().join("quad2d/spectral.json"));
    assert_eq!(r.bound_affine_holds, Some(true));
    assert!((r.kappa_big_f.unwrap() - 1.0).abs() < 1e-9);
    // stdout carries the same report
    let printed: SpectralReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed, r);
}

#[test]
fn constant_mapping_is_isometric() {
    let dir = TempDir::new().unwrap();
    let o = redmap(&["analyze", "--problem", "quad2d", "--mapping", "fixed", "--out", &out_arg(&dir)]);
    assert!(o.status.success());
    let r = check_report(&dir.path().join("quad2d/spectral.json"));
    assert_eq!((r.big_m_phi, r.m_phi), (1.0, 1.0));
}

#[test]
fn propcheck_exit_codes() {
    let o = redmap(&["propcheck", "--seed", "11", "--count", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 7);

    let o = redmap(&["propcheck", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));

    let o = redmap(&["propcheck", "--seed", "4", "--count", "3", "--corrupt-hessian"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    let json = err.trim().strip_prefix("redmap: property check failed: ").unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["seed"], redmap::suites::instance_seed(4, 0));
    assert_eq!(v["base_seed"], 4);
}

#[test]
fn sweep_writes_one_directory_per_entry() {
    let dir = TempDir::new().unwrap();
    let o = redmap(&[
        "sweep", "--problem", "quad2d", "--method", "gd_reduced", "--vary", "M=1,10,100", "--jobs", "2", "--out", &out_arg(&dir),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for m in ["1", "10", "100"] {
        let entry = dir.path().join(format!("quad2d_M={m}"));
        check_report(&entry.join("spectral.json"));
        check_trace(&entry.join("gd_reduced.csv"));
    }
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 3);

    let o = redmap(&["sweep", "--problem", "quad2d", "--jobs", "0", "--out", &out_arg(&dir)]);
    assert_eq!(o.status.code(), Some(2));
}
