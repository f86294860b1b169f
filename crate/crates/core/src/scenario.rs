//! Scenario configs (flat `key = value` text or JSON) and the runner that
//! executes one experiment and writes its tables.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::acceptance::{all_pass, run_suite};
use crate::construct::{
    build_lq_ball_layers, build_l1_ball_layers, build_whole_space_layers, escalation_experiment, EscalationRow, SolverSettings,
    StackedIndicatorSpec,
};
use crate::criteria::{classify, DichotomyParams, Domain, Verdict};
use crate::dirichlet::{semigroup_report, verify_indicator_lower_bound, verify_support_lower_bound, DirichletOperator};
use crate::engine::SpectralEngine;
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::kernel::{sample_table, KernelParams};
use crate::mesh::{Field, Grid1D, TorusGrid};
use crate::mild::{picard_minimal_solution, solve, NonlinearProblem, Status, Trajectory, DEFAULT_BLOWUP_CAP, DEFAULT_PICARD_TOL};
use crate::periodic::PeriodicOperator;
use crate::plot::{emit_plot_script, PlotKind};
use crate::special::log_space;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Kernel,
    Semigroup,
    Solve,
    Classify,
    Counterexample,
    Acceptance,
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| Error::Config(format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<String>,
    #[serde(rename = "K_list", skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    /// `indicator:amplitude,radius` or `bump:amplitude`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u0: Option<String>,
    /// `dirichlet` or `periodic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    /// `euler` or `picard`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<bool>,
    /// `json` or `csv` for the classify report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

enum KeyKind {
    Float,
    Int,
    Bool,
    FloatList,
    IntList,
    Text,
}

fn key_kind(key: &str) -> KeyKind {
    match key {
        "alpha" | "q" | "R" | "T" | "dt" | "r" | "delta" | "t_min" | "t_max" | "blowup_cap" | "nu_hat" | "c_hat" => KeyKind::Float,
        "d" | "N" | "t_count" | "m_max" | "seed" => KeyKind::Int,
        "strict" | "plot" => KeyKind::Bool,
        "t_grid" | "r_grid" => KeyKind::FloatList,
        "K_list" => KeyKind::IntList,
        _ => KeyKind::Text,
    }
}

fn parse_value(key: &str, raw: &str) -> Result<Value> {
    let bad = |what: &str| Error::Config(format!("key `{key}`: `{raw}` is not {what}"));
    let float = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("a number"));
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| bad("a non-negative integer"));
    Ok(match key_kind(key) {
        KeyKind::Float => serde_json::json!(float(raw)?),
        KeyKind::Int => serde_json::json!(int(raw)?),
        KeyKind::Bool => Value::Bool(raw.trim().parse::<bool>().map_err(|_| bad("true or false"))?),
        KeyKind::FloatList => Value::Array(raw.split(',').map(str::trim).filter(|x| !x.is_empty()).map(|x| float(x).map(|v| serde_json::json!(v))).collect::<Result<_>>()?),
        KeyKind::IntList => Value::Array(raw.split(',').map(str::trim).filter(|x| !x.is_empty()).map(|x| int(x).map(|v| serde_json::json!(v))).collect::<Result<_>>()?),
        KeyKind::Text => Value::String(raw.trim().to_string()),
    })
}

impl ScenarioConfig {
    pub fn new(experiment: Experiment) -> Self {
        ScenarioConfig { experiment: Some(experiment), ..Default::default() }
    }

    /// JSON when the text starts with `{`, flat `key = value` lines otherwise
    /// (`#` starts a comment). Unknown keys are rejected either way.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()));
        }
        let mut map = Map::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim();
            if map.insert(key.to_string(), parse_value(key, raw)?).is_some() {
                return Err(Error::Config(format!("key `{key}` given twice")));
            }
        }
        serde_json::from_value(Value::Object(map)).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Sets one key from its flat text form, as on a command line.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let mut value = serde_json::to_value(&*self).map_err(|e| Error::Config(e.to_string()))?;
        if let Value::Object(map) = &mut value {
            map.insert(key.to_string(), parse_value(key, raw)?);
        }
        *self = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    /// Flat `key = value` form; lists are comma separated.
    pub fn to_flat(&self) -> String {
        let mut out = String::new();
        if let Ok(Value::Object(map)) = serde_json::to_value(self) {
            for (key, value) in map {
                let text = match value {
                    Value::Null => continue,
                    Value::String(s) => s,
                    Value::Array(items) => items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "{key} = {text}");
            }
        }
        out
    }
}

/// What a run produced, and the exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub exit_code: i32,
    pub verdict: Option<Verdict>,
    pub artifacts: Vec<PathBuf>,
    /// Human-readable lines for standard output.
    pub summary: Vec<String>,
}

fn need<T: Copy>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
}

fn growth(cfg: &ScenarioConfig) -> Result<GrowthFunction> {
    let f = match (&cfg.f, &cfg.f_table) {
        (Some(spec), None) => GrowthFunction::parse(spec)?,
        (None, Some(path)) => GrowthFunction::table_from_csv(Path::new(path))?,
        (Some(_), Some(_)) => return Err(Error::Config("give either `f` or `f_table`, not both".into())),
        (None, None) => return Err(Error::Config("missing required key `f`".into())),
    };
    f.check_monotone()?;
    Ok(f)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

/// CSV numbers use `{:?}`: shortest round-trip digits, exponent form for
/// very large or small magnitudes.
///
/// Writes `body` to `out` (or returns it for standard output) and optionally a plot script.
fn emit(cfg: &ScenarioConfig, body: String, kind: Option<PlotKind>, report: &mut RunReport) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let path = PathBuf::from(path);
            fs::write(&path, body)?;
            report.artifacts.push(path.clone());
            if let (Some(kind), Some(true)) = (kind, cfg.plot) {
                report.artifacts.push(emit_plot_script(&path, kind)?);
            }
        }
        None => report.summary.extend(body.lines().map(str::to_string)),
    }
    Ok(())
}

fn empty_report() -> RunReport {
    RunReport { exit_code: 0, verdict: None, artifacts: Vec::new(), summary: Vec::new() }
}

/// Runs the configured experiment. Errors carry their own exit code
/// ([`Error::exit_code`]); an inconclusive verdict under `strict` gives 4
/// and a failed acceptance suite gives 3.
pub fn run(cfg: &ScenarioConfig) -> Result<RunReport> {
    match need(cfg.experiment, "experiment")? {
        Experiment::Kernel => run_kernel(cfg),
        Experiment::Semigroup => run_semigroup(cfg),
        Experiment::Solve => run_solve(cfg),
        Experiment::Classify => run_classify(cfg),
        Experiment::Counterexample => run_counterexample(cfg),
        Experiment::Acceptance => run_acceptance(cfg),
    }
}

fn run_kernel(cfg: &ScenarioConfig) -> Result<RunReport> {
    let params = KernelParams::new(need(cfg.alpha, "alpha")?, cfg.d.unwrap_or(1))?;
    let ts = cfg.t_grid.clone().unwrap_or_else(|| log_space(1e-2, 1e2, 5));
    let rs = cfg.r_grid.clone().unwrap_or_else(|| {
        let mut r = vec![0.0];
        r.extend(log_space(1e-2, 1e2, 17));
        r
    });
    let mut body = String::from("t,r,p,min_form,sum_form,ratio\n");
    for s in sample_table(params, &ts, &rs)? {
        let _ = writeln!(body, "{:?},{:?},{:?},{:?},{:?},{:?}", s.t, s.r, s.p, s.envelope.min_form, s.envelope.sum_form, s.envelope.ratio());
    }
    let mut report = empty_report();
    emit(cfg, body, Some(PlotKind::Kernel), &mut report)?;
    Ok(report)
}

fn dirichlet(cfg: &ScenarioConfig, default_n: usize) -> Result<DirichletOperator> {
    DirichletOperator::assemble(Grid1D::new(cfg.big_r.unwrap_or(1.0), cfg.n.unwrap_or(default_n))?, need(cfg.alpha, "alpha")?)
}

fn run_semigroup(cfg: &ScenarioConfig) -> Result<RunReport> {
    let op = dirichlet(cfg, 399)?;
    let r = need(cfg.r, "r")?;
    let delta = need(cfg.delta, "delta")?;
    let ts = match &cfg.t_grid {
        Some(ts) => ts.clone(),
        None => log_space(need(cfg.t_min, "t_min")?, need(cfg.t_max, "t_max")?, need(cfg.t_count, "t_count")?),
    };
    let mut body = String::from("t,c_hat_running,mu_hat_running,M_t,lambda1\n");
    for row in semigroup_report(&op, r, delta, &ts)? {
        let _ = writeln!(body, "{:?},{:?},{:?},{:?},{:?}", row.t, row.c_hat_running, row.mu_hat_running, row.m_t, row.lambda1);
    }
    let mut report = empty_report();
    emit(cfg, body, None, &mut report)?;
    Ok(report)
}

fn initial_field(spec: &str, mesh: crate::mesh::Mesh) -> Result<Field> {
    let bad = || Error::Config(format!("u0 `{spec}`: expected indicator:amplitude,radius or bump:amplitude"));
    let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    match (kind.trim(), nums.as_slice()) {
        ("indicator", [a, r]) => Ok(Field::indicator(mesh, 0.0, *r).scaled(*a)),
        ("bump", [a]) => {
            let half = match mesh {
                crate::mesh::Mesh::Interval(g) => g.half_width(),
                crate::mesh::Mesh::Torus(g) => g.half_period(),
            };
            Ok(Field::from_fn(mesh, |x| a * (1.0 - (x / half).powi(2)).max(0.0)))
        }
        _ => Err(bad()),
    }
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let mut body = String::from("t,norm_l1,norm_lq,max_value,status\n");
    let last = traj.times.len().saturating_sub(1);
    for i in 0..traj.times.len() {
        let status = if i == last { traj.status.to_string() } else { "running".to_string() };
        let _ = writeln!(body, "{:?},{:?},{:?},{:?},{status}", traj.times[i], traj.norm_l1[i], traj.norm_lq[i], traj.max_value[i]);
    }
    body
}

fn run_solve(cfg: &ScenarioConfig) -> Result<RunReport> {
    let f = growth(cfg)?;
    let alpha = need(cfg.alpha, "alpha")?;
    let engine: Box<dyn SpectralEngine> = match cfg.engine.as_deref().unwrap_or("dirichlet") {
        "dirichlet" => Box::new(dirichlet(cfg, 199)?),
        "periodic" => Box::new(PeriodicOperator::assemble(TorusGrid::new(cfg.big_r.unwrap_or(1.0), cfg.n.unwrap_or(256))?, alpha)?),
        other => return Err(Error::Config(format!("unknown engine `{other}` (dirichlet or periodic)"))),
    };
    let u0 = initial_field(cfg.u0.as_deref().unwrap_or("indicator:1,0.2"), engine.mesh())?;
    let problem = NonlinearProblem::new(engine.as_ref(), f, u0, cfg.q.unwrap_or(2.0), need(cfg.horizon, "T")?, need(cfg.dt, "dt")?)?
        .with_blowup_cap(cfg.blowup_cap.unwrap_or(DEFAULT_BLOWUP_CAP));
    let traj = match cfg.method.as_deref().unwrap_or("euler") {
        "euler" => solve(&problem)?,
        "picard" => picard_minimal_solution(&problem, cfg.m_max.unwrap_or(200), DEFAULT_PICARD_TOL)?.trajectory,
        other => return Err(Error::Config(format!("unknown method `{other}` (euler or picard)"))),
    };
    let mut report = empty_report();
    report.summary.push(format!("status: {}", traj.status));
    if let Status::BlowupDetected { t_star } = traj.status {
        report.summary.push(format!("t_star: {t_star}"));
    }
    emit(cfg, trajectory_csv(&traj), Some(PlotKind::Trajectory), &mut report)?;
    Ok(report)
}

/// Flattens a JSON value into `path,value` rows.
fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), "none".to_string())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn run_classify(cfg: &ScenarioConfig) -> Result<RunReport> {
    let alpha = need(cfg.alpha, "alpha")?;
    let params = DichotomyParams::new(need(cfg.q, "q")?, alpha, cfg.d.unwrap_or(1))?;
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::OutsideHypotheses(format!("alpha = {alpha} is outside (1, 2]")));
    }
    let f = growth(cfg)?;
    let verdict = classify(&f, &params, cfg.domain.unwrap_or(Domain::Ball))?;
    let value = serde_json::to_value(&verdict).map_err(|e| Error::Config(e.to_string()))?;
    let body = match cfg.report.as_deref().unwrap_or("json") {
        "json" => serde_json::to_string_pretty(&value).map_err(|e| Error::Config(e.to_string()))? + "\n",
        "csv" => {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let mut body = String::from("field,value\n");
            for (k, v) in rows {
                let _ = writeln!(body, "{k},\"{}\"", v.replace('"', "\"\""));
            }
            body
        }
        other => return Err(Error::Config(format!("unknown report format `{other}` (json or csv)"))),
    };
    let mut report = empty_report();
    report.verdict = Some(verdict.verdict);
    report.summary.push(format!("verdict: {}", verdict.verdict));
    if verdict.verdict == Verdict::Inconclusive && cfg.strict == Some(true) {
        report.exit_code = 4;
    }
    if cfg.out.is_some() {
        emit(cfg, body, None, &mut report)?;
    }
    Ok(report)
}

fn escalation_csv(rows: &[EscalationRow]) -> String {
    let mut body = String::from("K,layers_built,u0_norm_lq,sup_norm_lq,t_star\n");
    for r in rows {
        let _ = writeln!(body, "{},{},{:?},{:?},{}", r.k, r.layers_built, r.u0_norm_lq, r.sup_norm_lq, fmt_opt(r.t_star));
    }
    body
}

fn run_counterexample(cfg: &ScenarioConfig) -> Result<RunReport> {
    let theorem = cfg.theorem.clone().ok_or_else(|| Error::Config("missing required key `theorem`".into()))?;
    let alpha = need(cfg.alpha, "alpha")?;
    let d = cfg.d.unwrap_or(1);
    let default_q = if theorem == "4.1" { 1.0 } else { 2.0 };
    let params = DichotomyParams::new(cfg.q.unwrap_or(default_q), alpha, d)?;
    let f = growth(cfg)?;
    let k_list = cfg.k_list.clone().ok_or_else(|| Error::Config("missing required key `K_list`".into()))?;
    let big_r = cfg.big_r.unwrap_or(1.0);
    if !matches!(theorem.as_str(), "3.3" | "4.1" | "5") {
        return Err(Error::Config(format!("unknown theorem `{theorem}` (3.3, 4.1 or 5)")));
    }

    // ν̂ and ĉ come from the discrete semigroup unless supplied.
    let (nu_hat, c_hat) = match (cfg.nu_hat, cfg.c_hat, d) {
        (Some(nu), Some(c), _) => (nu, c),
        (nu, c, 1) => {
            let op = dirichlet(cfg, 999)?;
            let r = big_r / 4.0;
            let ts = log_space((4.0 * op.grid().spacing()).powf(alpha), r.powf(alpha), 12);
            let nu = match nu {
                Some(v) => v,
                None => verify_support_lower_bound(&op, r, r, &ts)?.value,
            };
            let c = match c {
                Some(v) => v,
                None => verify_indicator_lower_bound(&op, r, r, &ts)?.value,
            };
            (nu, c)
        }
        _ => return Err(Error::Config("d >= 2 needs nu_hat and c_hat (no discrete semigroup in higher dimension)".into())),
    };
    let build = |k: usize| -> Result<StackedIndicatorSpec> {
        match theorem.as_str() {
            "3.3" => build_lq_ball_layers(&f, &params, k, None, nu_hat, big_r),
            "4.1" => build_l1_ball_layers(&f, &params, k, c_hat, big_r),
            _ => build_whole_space_layers(&f, &params, k, nu_hat),
        }
    };

    let mut report = empty_report();
    report.summary.push(format!("nu_hat: {nu_hat}, c_hat: {c_hat}"));
    if d != 1 {
        let specs: Vec<StackedIndicatorSpec> = k_list.iter().map(|&k| build(k)).collect::<Result<_>>()?;
        let body = serde_json::to_string_pretty(&specs).map_err(|e| Error::Config(e.to_string()))? + "\n";
        report.summary.push("d >= 2: layer specification only, not solved".into());
        emit(cfg, body, None, &mut report)?;
        return Ok(report);
    }
    let settings = SolverSettings {
        horizon: need(cfg.horizon, "T")?,
        dt: need(cfg.dt, "dt")?,
        blowup_cap: cfg.blowup_cap.unwrap_or(DEFAULT_BLOWUP_CAP),
    };
    let rows = if theorem == "5" {
        let widest = k_list.iter().map(|&k| build(k)).collect::<Result<Vec<_>>>()?;
        let reach = widest
            .iter()
            .flat_map(|s| s.layers.iter().map(|l| l.center.abs() + l.radius))
            .fold(0.0, f64::max);
        let modes = cfg.n.unwrap_or(1024);
        let op = PeriodicOperator::assemble(TorusGrid::new(1.5 * reach.max(big_r), modes + modes % 2)?, alpha)?;
        escalation_experiment(&op, &f, params.q, &k_list, build, settings)?
    } else {
        let op = dirichlet(cfg, 999)?;
        escalation_experiment(&op, &f, params.q, &k_list, build, settings)?
    };
    emit(cfg, escalation_csv(&rows), Some(PlotKind::Escalation), &mut report)?;
    Ok(report)
}

fn run_acceptance(cfg: &ScenarioConfig) -> Result<RunReport> {
    let outcomes = run_suite(cfg.seed.unwrap_or(0));
    let mut report = empty_report();
    report.summary = outcomes.iter().map(|o| o.line()).collect();
    if !all_pass(&outcomes) {
        report.exit_code = 3;
    }
    if cfg.out.is_some() {
        let body = serde_json::to_string_pretty(&outcomes).map_err(|e| Error::Config(e.to_string()))? + "\n";
        emit(cfg, body, None, &mut report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_and_json_round_trip() {
        let text = "experiment = counterexample\ntheorem = 3.3\nf = powerlog:1,6,0\nalpha = 1.5\nK_list = 1,2,3\nR = 0.75 # ball\nstrict = true\n";
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.k_list, Some(vec![1, 2, 3]));
        assert_eq!(cfg.big_r, Some(0.75));
        assert_eq!(ScenarioConfig::parse(&cfg.to_flat()).unwrap(), cfg);
        assert_eq!(ScenarioConfig::parse(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn unknown_and_malformed_keys_are_rejected() {
        assert!(matches!(ScenarioConfig::parse("experiment = solve\nbogus = 1\n"), Err(Error::Config(_))));
        assert!(matches!(ScenarioConfig::parse("alpha = fast\n"), Err(Error::Config(_))));
        assert!(matches!(ScenarioConfig::parse(r#"{"alpha": 1.5, "zzz": 2}"#), Err(Error::Config(_))));
        assert!(matches!(ScenarioConfig::parse("alpha = 1\nalpha = 2\n"), Err(Error::Config(_))));
    }

    #[test]
    fn classify_verdicts_and_guards() {
        let mut cfg = ScenarioConfig::new(Experiment::Classify);
        for (k, v) in [("f", "powerlog:1,3,0"), ("q", "2"), ("alpha", "1.5"), ("d", "1"), ("domain", "ball")] {
            cfg.set(k, v).unwrap();
        }
        let report = run(&cfg).unwrap();
        assert_eq!((report.exit_code, report.verdict), (0, Some(Verdict::LocalExistence)));
        cfg.set("alpha", "0.5").unwrap();
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("outside theorem hypotheses"));
    }

    #[test]
    fn solve_writes_trajectory_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("solve.csv");
        let text = format!(
            "experiment = solve\nalpha = 1.5\nN = 40\nf = powerlog:1,2,0\nT = 0.01\ndt = 0.005\nplot = true\nout = {}\n",
            out.display()
        );
        let report = run(&ScenarioConfig::parse(&text).unwrap()).unwrap();
        assert_eq!(report.artifacts.len(), 2);
        let csv = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,norm_l1,norm_lq,max_value,status");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(",completed"));
    }
}
