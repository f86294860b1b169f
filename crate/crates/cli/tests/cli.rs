use std::fs;
use std::process::{Command, Output};

fn fracheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracheat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn classify_prints_verdict() {
    let o = fracheat(&["classify", "--f", "powerlog:1,3,0", "--q", "2", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: local_existence"));
}

#[test]
fn classify_json_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = fracheat(&["classify", "--f", "powerlog:1,4,0", "--q", "1", "--alpha", "1.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "non_existence");
}

#[test]
fn alpha_outside_range_is_refused() {
    let o = fracheat(&["classify", "--f", "powerlog:1,3,0", "--q", "2", "--alpha", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("outside theorem hypotheses"));
}

#[test]
fn unknown_config_key_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "alpha = 1.5\nbogus = 1\n").unwrap();
    let o = fracheat(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn strict_inconclusive_exits_four() {
    let args = ["classify", "--f", "powerlog:1,2.5,-1", "--q", "1", "--alpha", "1.5"];
    let relaxed = fracheat(&args);
    assert_eq!(relaxed.status.code(), Some(0));
    assert!(stdout(&relaxed).contains("inconclusive"));
    let strict = fracheat(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn kernel_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let o = fracheat(&["kernel", "--alpha", "1.5", "--t-grid", "1", "--r-grid", "0,1,10", "--out", out.to_str().unwrap(), "--plot"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("t,r,p,min_form,sum_form,ratio"));
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("k.gp").exists());
}

#[test]
fn solve_from_config_reports_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    let out = dir.path().join("s.csv");
    fs::write(&cfg, format!("alpha = 1.5\nf = powerlog:1,2,0\nu0 = indicator:50,0.5\nN = 63\nT = 1\ndt = 1e-3\nout = {}\n", out.display()))
        .unwrap();
    let o = fracheat(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("status: blowup_detected"), "{}", stdout(&o));
    let text = fs::read_to_string(out).unwrap();
    assert!(text.lines().last().unwrap().ends_with("blowup_detected"));
}
