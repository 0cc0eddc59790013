use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn llhmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llhmm")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = llhmm(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn header_and_meta(path: &Path) -> (Vec<String>, String) {
    let text = fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let first_data = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert!(first_data > 0, "metadata lines come first");
    (lines[..first_data].iter().map(|s| s.to_string()).collect(), lines[first_data].to_string())
}

#[test]
fn single_run_writes_trajectory_schema() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let p = out.to_str().unwrap();
    ok(&["single", "run", "--T", "0.6", "--macro-dt", "0.1", "--out", p]);
    let (meta, header) = header_and_meta(&out);
    assert_eq!(header, "time,Mx,My,Mz,flux_x,flux_y,flux_z,iters");
    assert!(meta.contains(&"# eps = 1.0000000000000000e-2".to_string()), "{meta:?}");
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.split(',').count() == 8));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec!["single".to_string(), "run".into(), "--T".into(), "0.4".into(), "--macro-dt".into(), "0.1".into(), "--out".into(), p.display().to_string()]
    };
    let a_args = args(&a);
    let b_args = args(&b);
    ok(&a_args.iter().map(String::as_str).collect::<Vec<_>>());
    ok(&b_args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn window_shorter_than_period_is_a_validation_error() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let r = llhmm(&["single", "run", "--eps", "0.01", "--tau", "0.005", "--out", out.to_str().unwrap()]);
    assert!(!r.status.success());
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("VALIDATION_ERROR") && err.contains("tau must exceed eps"), "{err}");
    assert!(!out.exists());
}

#[test]
fn config_parse_error_reports_line() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# comment\neps = 0.01\nthis line is wrong\n").unwrap();
    let r = llhmm(&["single", "run", "--config", cfg.to_str().unwrap()]);
    assert!(!r.status.success());
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("PARSE_ERROR line 3"), "{err}");

    fs::write(&cfg, "eps = 0.01\ncolour = red\n").unwrap();
    let err = String::from_utf8_lossy(&llhmm(&["single", "run", "--config", cfg.to_str().unwrap()]).stderr).to_string();
    assert!(err.contains("PARSE_ERROR line 2") && err.contains("unknown key `colour`"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("run.csv");
    fs::write(&cfg, "gamma = 1\nT = 0.4\nmacro_dt = 0.1\n").unwrap();
    ok(&["single", "run", "--config", cfg.to_str().unwrap(), "--gamma=0.1", "--out", out.to_str().unwrap()]);
    let (meta, _) = header_and_meta(&out);
    assert!(meta.contains(&"# gamma = 1.0000000000000001e-1".to_string()), "{meta:?}");
    assert!(meta.contains(&"# T = 4.0000000000000002e-1".to_string()), "{meta:?}");
}

#[test]
fn tail_table_has_slope_footer() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("tail.csv");
    ok(&["convergence", "tail", "--eps-list", "1e-1,1e-2", "--out", out.to_str().unwrap()]);
    let (_, header) = header_and_meta(&out);
    assert_eq!(header, "eps,err_m0,err_m1");
    let text = fs::read_to_string(&out).unwrap();
    let last: Vec<&str> = text.lines().rev().take(2).collect();
    assert!(last.iter().any(|l| l.starts_with("# slope err_m0 = ")), "{text}");
    assert!(last.iter().any(|l| l.starts_with("# slope err_m1 = ")), "{text}");
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["convergence", "tail", "--eps-list", "1e-1,3e-2,1e-2", "--threads", "1", "--out", a.to_str().unwrap()]);
    ok(&["convergence", "tail", "--eps-list", "1e-1,3e-2,1e-2", "--threads", "3", "--out", b.to_str().unwrap()]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn chain_run_writes_snapshots_and_companions() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("chain");
    ok(&["chain", "run", "--T", "0.375", "--snapshots", "0,5", "--out", out.to_str().unwrap()]);
    for step in [0, 5] {
        let (meta, header) = header_and_meta(&out.join(format!("hmm_n{step}.csv")));
        assert_eq!(header, "I,X,Mx,My,Mz");
        assert!(meta.iter().any(|l| l == "# N = 100"), "{meta:?}");
        assert_eq!(header_and_meta(&out.join(format!("dns_avg_n{step}.csv"))).1, "I,X,Mx,My,Mz");
        assert_eq!(header_and_meta(&out.join(format!("dns_n{step}.csv"))).1, "i,x,mx,my,mz");
    }
    let rows = fs::read_to_string(out.join("dns_n5.csv")).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 101);
}

#[test]
fn chain_rejects_inconsistent_sizes() {
    let r = llhmm(&["chain", "run", "--N", "99"]);
    assert!(!r.status.success());
    assert!(String::from_utf8_lossy(&r.stderr).contains("VALIDATION_ERROR"));
}

#[test]
fn kernel_check_tabulates_kernel() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("k.csv");
    ok(&["kernel-check", "--kernel-p", "1", "--kernel-q", "-1", "--out", out.to_str().unwrap()]);
    let (meta, header) = header_and_meta(&out);
    assert_eq!(header, "t,K");
    let m0: f64 = meta.iter().find_map(|l| l.strip_prefix("# moment_0 = ")).unwrap().parse().unwrap();
    assert!((m0 - 1.0).abs() < 1e-10, "{m0}");
    let text = fs::read_to_string(&out).unwrap();
    let mid = text.lines().find(|l| l.starts_with("0.0000000000000000e0,")).unwrap();
    assert_eq!(mid, "0.0000000000000000e0,1.0000000000000000e0");
}

#[test]
fn unknown_flag_is_rejected() {
    assert!(!llhmm(&["single", "run", "--colour", "red"]).status.success());
}
