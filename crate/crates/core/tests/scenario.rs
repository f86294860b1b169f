use std::fs;

use fracheat::plot::{emit_plot_script, PlotKind};
use fracheat::scenario::{run, ScenarioConfig};
use fracheat::Error;

fn run_to_string(text: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let mut cfg = ScenarioConfig::parse(text).unwrap();
    cfg.out = Some(out.display().to_string());
    let report = run(&cfg).unwrap();
    assert_eq!(report.exit_code, 0);
    fs::read_to_string(out).unwrap()
}

#[test]
fn kernel_runs_are_byte_identical() {
    let text = "experiment = kernel\nalpha = 1.3\nt_grid = 0.1,1,10\n";
    let a = run_to_string(text);
    assert_eq!(a, run_to_string(text));
    assert_eq!(a.lines().count(), 1 + 3 * 18);
}

#[test]
fn solve_runs_are_byte_identical() {
    let text = "experiment = solve\nalpha = 1.7\nf = powerlog:1,3,0\nu0 = bump:2\nN = 47\nT = 0.2\ndt = 1e-3\nq = 3\n";
    let a = run_to_string(text);
    assert_eq!(a, run_to_string(text));
    assert!(a.lines().last().unwrap().ends_with("completed"), "{}", a.lines().last().unwrap());
}

#[test]
fn json_and_flat_configs_agree() {
    let flat = "experiment = semigroup\nalpha = 1.5\nR = 1\nN = 99\nr = 0.25\ndelta = 0.25\nt_grid = 0.01,0.05\n";
    let cfg = ScenarioConfig::parse(flat).unwrap();
    assert_eq!(run_to_string(flat), run_to_string(&cfg.to_json()));
}

#[test]
fn duplicate_keys_are_rejected() {
    assert!(matches!(ScenarioConfig::parse("alpha = 1.5\nalpha = 1.6\n"), Err(Error::Config(_))));
}

#[test]
fn plot_script_rejects_foreign_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    fs::write(&csv, "K,layers_built\n1,1\n").unwrap();
    match emit_plot_script(&csv, PlotKind::Escalation) {
        Err(Error::MissingColumns { columns, .. }) => assert_eq!(columns, vec!["sup_norm_lq", "t_star"]),
        other => panic!("{other:?}"),
    }
}
