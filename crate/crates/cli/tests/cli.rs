use std::path::Path;
use std::process::{Command, Output};

fn bdmove(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdmove"))
        .args(args)
        .output()
        .expect("spawn bdmove")
}

fn ok(args: &[&str]) -> Output {
    let o = bdmove(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn body(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn simulation_is_reproducible() {
    let d = tempfile::tempdir().unwrap();
    let a = d.path().join("a.jsonl");
    ok(&["simulate", "--T", "10", "--seed", "4", "--out", p(&a)]);
    let first = std::fs::read(&a).unwrap();
    ok(&["simulate", "--T", "10", "--seed", "4", "--out", p(&a)]);
    assert!(first == std::fs::read(&a).unwrap(), "rerun changed the file");
    ok(&["simulate", "--T", "10", "--seed", "5", "--out", p(&a)]);
    assert!(first != std::fs::read(&a).unwrap(), "seed ignored");
}

#[test]
fn simulate_discretize_estimate_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let tr = d.path().join("t.jsonl");
    let fr = d.path().join("f.csv");
    let est = d.path().join("e.csv");
    ok(&["simulate", "--T", "15", "--seed", "2", "--path-dt", "0", "--out", p(&tr)]);
    ok(&["discretize", "--input", p(&tr), "--m", "6", "--out", p(&fr)]);
    let frames = body(&fr);
    assert_eq!(frames[0], "frame,time,track_id,x,y");
    let last: usize = frames.last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(last, 6);

    ok(&["estimate", "--input", p(&tr), "--strategy", "card-smooth", "--bandwidth", "2", "--out", p(&est)]);
    let rows = body(&est);
    assert_eq!(rows[0], "query,time,n_points,estimate,occupation,undefined");
    assert!(rows.len() > 1);
    for r in &rows[1..] {
        let v: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
        assert!(v.is_finite() && v > 0.0, "{r}");
    }

    ok(&["estimate", "--input", p(&fr), "--strategy", "hausdorff", "--bandwidth", "0.1", "--out", p(&est)]);
    assert_eq!(body(&est).len(), 8);
}

#[test]
fn cv_reports_the_selected_bandwidth() {
    let d = tempfile::tempdir().unwrap();
    let tr = d.path().join("t.jsonl");
    ok(&["simulate", "--T", "15", "--seed", "1", "--path-dt", "0", "--out", p(&tr)]);
    let o = ok(&["cv", "--input", p(&tr), "--strategy", "card-smooth", "--grid", "0.5,1,2"]);
    let out = String::from_utf8(o.stdout).unwrap();
    let h: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("selected bandwidth: "))
        .expect("selection line")
        .parse()
        .unwrap();
    assert!([0.5, 1.0, 2.0].contains(&h));
}

#[test]
fn bench_writes_one_column_per_strategy() {
    let d = tempfile::tempdir().unwrap();
    let o = ok(&[
        "bench", "--T", "10", "--seeds", "2", "--m", "5", "--strategy", "card-indicator,hausdorff", "--grid", "auto:4",
        "--out", p(d.path()),
    ]);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("scheme,card-indicator,hausdorff"), "{out}");
    let summary = body(&d.path().join("mse_summary.csv"));
    assert_eq!(summary[0], "scheme,card-indicator,hausdorff");
    assert_eq!(summary.len(), 3);
    assert!(summary[1].starts_with("continuous,"));
    assert!(summary[2].starts_with("m=5,"));
    assert!(d.path().join("mse_reports.csv").exists());
    assert!(d.path().join("summary.json").exists());
}

#[test]
fn untracked_frames_warn_about_the_count_fallback() {
    let d = tempfile::tempdir().unwrap();
    let fr = d.path().join("f.csv");
    std::fs::write(&fr, "frame,x,y\n0,0.2,0.2\n1,0.2,0.2\n1,0.7,0.4\n2,0.7,0.4\n3,,\n").unwrap();
    let o = ok(&["estimate", "--input", p(&fr), "--strategy", "card-indicator"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("frames carry no tracks"), "{err}");
}

#[test]
fn usage_errors_exit_with_code_two() {
    for args in [
        &["simulate", "--T", "x", "--out", "/dev/null"][..],
        &["frobnicate"][..],
        &["discretize", "--input", "a.jsonl"][..],
        &["simulate", "--preset", "sim41", "--config", "c.toml", "--out", "/dev/null"][..],
    ] {
        assert_eq!(bdmove(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn configuration_errors_are_reported() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    let out = d.path().join("t.jsonl");
    std::fs::write(&cfg, "[model]\npreset = \"sim41\"\ncolour = 1\n").unwrap();
    let o = bdmove(&["simulate", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("colour"), "{err}");
    assert!(err.contains("accepted configuration keys"), "{err}");
    assert!(!out.exists());

    let o = bdmove(&["estimate", "--input", p(&d.path().join("missing.jsonl"))]);
    assert_eq!(o.status.code(), Some(1));
    let o = bdmove(&["simulate", "--preset", "sim99", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_checks_the_declared_bounds() {
    let o = ok(&["validate", "--preset", "sim41", "--probes", "50"]);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("50 probes passed"), "{out}");
}

#[test]
fn ccf_of_a_series_with_itself_peaks_at_lag_zero() {
    let d = tempfile::tempdir().unwrap();
    let tr = d.path().join("t.jsonl");
    let fr = d.path().join("f.csv");
    let est = d.path().join("e.csv");
    let cc = d.path().join("c.csv");
    ok(&["simulate", "--T", "20", "--seed", "6", "--out", p(&tr)]);
    ok(&["discretize", "--input", p(&tr), "--m", "30", "--out", p(&fr)]);
    ok(&["estimate", "--input", p(&fr), "--strategy", "card-smooth", "--bandwidth", "3", "--out", p(&est)]);
    ok(&["ccf", "--a", p(&est), "--b", p(&est), "--max-lag", "3", "--out", p(&cc)]);
    let rows = body(&cc);
    assert_eq!(rows[0], "lag,correlation");
    let zero = rows.iter().find(|r| r.starts_with("0,")).unwrap();
    let c: f64 = zero.split(',').nth(1).unwrap().parse().unwrap();
    assert!((c - 1.0).abs() < 1e-12, "{zero}");
}
