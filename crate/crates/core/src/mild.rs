//! Mild (Duhamel) solutions `u(t) = S(t)u₀ + ∫₀ᵗ S(t−s) f(u(s)) ds`.
//!
//! Time integration is exponential Euler: the linear part is propagated
//! exactly per eigenmode and `f` is frozen at the left end of each step,
//!
//! `u_{n+1} = e^{dt A} u_n + dt φ₁(dt A) f(u_n)`.
//!
//! Both weights are positive operators, so the same recursion with `f`
//! evaluated along a given path is a monotone map. The Picard scheme and the
//! supersolution check use exactly that map.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::SpectralEngine;
use crate::error::{precondition, Error, Result};
use crate::growth::GrowthFunction;
use crate::mesh::Field;
use crate::special::phi1;

pub const DEFAULT_BLOWUP_CAP: f64 = 1e12;
pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
/// Slack allowed in the monotonicity of Picard iterates, relative to
/// `1 + ‖v(t_n)‖_∞`.
pub const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Clone)]
pub struct NonlinearProblem<'a> {
    pub engine: &'a dyn SpectralEngine,
    pub f: GrowthFunction,
    pub u0: Field,
    pub q: f64,
    pub horizon: f64,
    pub dt: f64,
    pub blowup_cap: f64,
}

impl<'a> NonlinearProblem<'a> {
    pub fn new(
        engine: &'a dyn SpectralEngine,
        f: GrowthFunction,
        u0: Field,
        q: f64,
        horizon: f64,
        dt: f64,
    ) -> Result<Self> {
        u0.ensure_same_mesh(&engine.mesh())?;
        if let Some((node, v)) = u0.values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(precondition(format!("initial data must be finite and non-negative (u0[{node}] = {v})")));
        }
        if !(f.eval(0.0) >= 0.0) {
            return Err(precondition("f(0) must be non-negative"));
        }
        if !(q >= 1.0) {
            return Err(precondition(format!("q = {q} must be at least 1")));
        }
        if !(horizon > 0.0) || !(dt > 0.0 && dt <= horizon) {
            return Err(precondition(format!("need 0 < dt <= T (dt = {dt}, T = {horizon})")));
        }
        Ok(NonlinearProblem { engine, f, u0, q, horizon, dt, blowup_cap: DEFAULT_BLOWUP_CAP })
    }

    pub fn with_blowup_cap(mut self, cap: f64) -> Self {
        self.blowup_cap = cap;
        self
    }

    /// `0 = t_0 < t_1 < … < t_n = T` with step `dt`, the last step possibly shorter.
    pub fn time_grid(&self) -> Vec<f64> {
        let steps = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (0..=steps).map(|k| if k == steps { self.horizon } else { k as f64 * self.dt }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Status {
    Completed,
    BlowupDetected { t_star: f64 },
    PicardDiverged,
    /// Picard stopped at `m_max` without meeting the tolerance.
    IterationLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Completed => f.write_str("completed"),
            Status::BlowupDetected { .. } => f.write_str("blowup_detected"),
            Status::PicardDiverged => f.write_str("picard_diverged"),
            Status::IterationLimit => f.write_str("iteration_limit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norm_lq: Vec<f64>,
    pub norm_l1: Vec<f64>,
    pub max_value: Vec<f64>,
    pub status: Status,
    pub final_field: Option<Field>,
}

impl Trajectory {
    fn start(q: f64, u0: &Field) -> Self {
        let mut t = Trajectory {
            times: Vec::new(),
            norm_lq: Vec::new(),
            norm_l1: Vec::new(),
            max_value: Vec::new(),
            status: Status::Completed,
            final_field: None,
        };
        t.record(0.0, q, u0);
        t
    }

    fn record(&mut self, t: f64, q: f64, u: &Field) {
        self.times.push(t);
        self.norm_lq.push(u.norm(q));
        self.norm_l1.push(u.norm(1.0));
        self.max_value.push(u.max_value());
    }

    pub fn sup_norm_lq(&self) -> f64 {
        self.norm_lq.iter().copied().fold(0.0, f64::max)
    }

    pub fn t_star(&self) -> Option<f64> {
        match self.status {
            Status::BlowupDetected { t_star } => Some(t_star),
            _ => None,
        }
    }
}

/// `f(max(u, 0))` nodewise; non-finite values are reported.
fn nonlinearity(f: &GrowthFunction, u: &[f64]) -> Result<Vec<f64>> {
    u.iter()
        .enumerate()
        .map(|(node, v)| {
            let out = f.eval(v.max(0.0));
            if out.is_finite() {
                Ok(out)
            } else {
                Err(Error::NonFinite { value: out, node })
            }
        })
        .collect()
}

/// `e^{dt A} u + dt φ₁(dt A) g`.
fn duhamel_step(engine: &dyn SpectralEngine, u: &Field, g: &[f64], dt: f64) -> Result<Field> {
    let decay = move |l: f64| (dt * l).exp();
    let source = move |l: f64| dt * phi1(dt * l);
    let mut values = engine.combine(&[(&u.values, &decay), (g, &source)]);
    engine.settle_sign(&mut values)?;
    Ok(Field { mesh: u.mesh, values })
}

pub fn step_exponential_euler(engine: &dyn SpectralEngine, f: &GrowthFunction, u: &Field, dt: f64) -> Result<Field> {
    u.ensure_same_mesh(&engine.mesh())?;
    if !(dt > 0.0) {
        return Err(precondition(format!("step dt = {dt} must be positive")));
    }
    let g = nonlinearity(f, &u.values)?;
    duhamel_step(engine, u, &g, dt)
}

fn exceeds(u: &Field, q: f64, cap: f64) -> bool {
    let n = u.norm(q);
    !n.is_finite() || n > cap || u.values.iter().any(|v| !v.is_finite())
}

/// Marches exponential Euler to `T`, stopping at the first step whose `L^q`
/// norm exceeds the cap or whose values are non-finite.
pub fn solve(problem: &NonlinearProblem<'_>) -> Result<Trajectory> {
    let times = problem.time_grid();
    let mut traj = Trajectory::start(problem.q, &problem.u0);
    let mut u = problem.u0.clone();
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let next = match step_exponential_euler(problem.engine, &problem.f, &u, t1 - t0) {
            Ok(v) => v,
            Err(Error::NonFinite { .. }) => {
                traj.status = Status::BlowupDetected { t_star: t0 };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        };
        if exceeds(&next, problem.q, problem.blowup_cap) {
            if next.norm(problem.q).is_finite() {
                traj.record(t1, problem.q, &next);
            }
            traj.status = Status::BlowupDetected { t_star: t1 };
            return Ok(traj);
        }
        traj.record(t1, problem.q, &next);
        u = next;
    }
    traj.final_field = Some(u);
    Ok(traj)
}

/// `𝓕[v](t_n) = S(t_n)u₀ + Σ_{j<n} e^{(t_n−t_{j+1})A} dt_j φ₁(dt_j A) f(v(t_j))`.
///
/// `path` holds `v(t_j)` for every `t_j` of `times`.
pub fn duhamel_map(
    engine: &dyn SpectralEngine,
    f: &GrowthFunction,
    u0: &Field,
    times: &[f64],
    path: &[Field],
) -> Result<Vec<Field>> {
    if path.len() != times.len() {
        return Err(Error::GridMismatch(format!("{} path fields for {} times", path.len(), times.len())));
    }
    for v in path {
        v.ensure_same_mesh(&engine.mesh())?;
    }
    let mut out = Vec::with_capacity(times.len());
    let mut w = u0.clone();
    out.push(w.clone());
    for (j, pair) in times.windows(2).enumerate() {
        let g = nonlinearity(f, &path[j].values)?;
        w = duhamel_step(engine, &w, &g, pair[1] - pair[0])?;
        out.push(w.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// `sup_n ‖v^{(m)}(t_n)‖_{L^q}` for every iterate computed.
    pub iterate_norms: Vec<f64>,
    /// The last iterate on the time grid.
    pub path: Vec<Field>,
}

/// Monotone iteration from `v⁽⁰⁾(t_n) = S(t_n)u₀` with `v⁽ᵐ⁺¹⁾ = 𝓕[v⁽ᵐ⁾]`.
///
/// Stops when the sup-norm change falls below `tol` (completed), when an
/// iterate exceeds the blowup cap (`PicardDiverged`), or after `m_max`
/// iterations. A decrease beyond the slack is a structural error.
pub fn picard_minimal_solution(problem: &NonlinearProblem<'_>, m_max: usize, tol: f64) -> Result<PicardOutcome> {
    let times = problem.time_grid();
    let engine = problem.engine;
    let mut path = Vec::with_capacity(times.len());
    for &t in &times {
        path.push(engine.propagate(t, &problem.u0)?);
    }
    let sup_norm = |p: &[Field]| p.iter().map(|v| v.norm(problem.q)).fold(0.0, f64::max);
    let mut iterate_norms = vec![sup_norm(&path)];
    let mut status = Status::IterationLimit;
    let mut iterations = 0;
    for m in 1..=m_max {
        iterations = m;
        let next = match duhamel_map(engine, &problem.f, &problem.u0, &times, &path) {
            Ok(n) => n,
            Err(Error::NonFinite { .. }) => {
                status = Status::PicardDiverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut change = 0.0f64;
        for (n, (new, old)) in next.iter().zip(&path).enumerate() {
            let slack = MONOTONE_SLACK * (1.0 + old.norm(f64::INFINITY));
            for (node, (a, b)) in new.values.iter().zip(&old.values).enumerate() {
                if *a < b - slack {
                    return Err(Error::Monotonicity { step: n, node, decrease: b - a });
                }
                change = change.max((a - b).abs());
            }
        }
        let norm = sup_norm(&next);
        iterate_norms.push(norm);
        path = next;
        if next_diverged(&path, problem) {
            status = Status::PicardDiverged;
            break;
        }
        if change < tol {
            status = Status::Completed;
            break;
        }
    }
    let mut trajectory = Trajectory::start(problem.q, &path[0]);
    for (t, v) in times.iter().zip(&path).skip(1) {
        if v.norm(problem.q).is_finite() {
            trajectory.record(*t, problem.q, v);
        }
    }
    trajectory.status = status;
    if status == Status::Completed {
        trajectory.final_field = path.last().cloned();
    }
    Ok(PicardOutcome { trajectory, iterations, iterate_norms, path })
}

fn next_diverged(path: &[Field], problem: &NonlinearProblem<'_>) -> bool {
    path.iter().any(|v| exceeds(v, problem.q, problem.blowup_cap))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    pub is_supersolution: bool,
    /// `max_{n,i} (𝓕[v](t_n) − v(t_n))_i`; negative when `v` has room to spare.
    pub max_violation: f64,
    pub at_step: usize,
    pub at_node: usize,
}

/// Checks `𝓕[v](t_n) ≤ v(t_n) + slack` nodewise with the solver's own
/// discrete Duhamel map; the slack is `1e-10 (1 + ‖v(t_n)‖_∞)`.
pub fn verify_supersolution(
    engine: &dyn SpectralEngine,
    f: &GrowthFunction,
    times: &[f64],
    v: &[Field],
    u0: &Field,
) -> Result<SupersolutionReport> {
    u0.ensure_same_mesh(&engine.mesh())?;
    let image = duhamel_map(engine, f, u0, times, v)?;
    let mut report = SupersolutionReport { is_supersolution: true, max_violation: f64::NEG_INFINITY, at_step: 0, at_node: 0 };
    for (n, (fv, vv)) in image.iter().zip(v).enumerate() {
        let slack = MONOTONE_SLACK * (1.0 + vv.norm(f64::INFINITY));
        for (i, (a, b)) in fv.values.iter().zip(&vv.values).enumerate() {
            let excess = a - b;
            if excess > report.max_violation {
                report.max_violation = excess;
                report.at_step = n;
                report.at_node = i;
            }
            if excess > slack {
                report.is_supersolution = false;
            }
        }
    }
    Ok(report)
}

/// `v(t) = B S(t)u₀ + 1` on the solver time grid (on the interval the
/// constant is the indicator of the whole domain).
pub fn linear_plus_constant_candidate(
    engine: &dyn SpectralEngine,
    u0: &Field,
    b: f64,
    times: &[f64],
) -> Result<Vec<Field>> {
    times
        .iter()
        .map(|&t| {
            let s = engine.propagate(t, u0)?;
            Ok(Field { mesh: s.mesh, values: s.values.iter().map(|x| b * x + 1.0).collect() })
        })
        .collect()
}

/// `v(t) = e^{2Ct} u(t)` where `u` is the discrete solution with `f(s) = 2C s^p`.
///
/// For `C ≥ 1` and `t ≤ ln 2/(2C(p−1))` this is a supersolution for
/// `f(s) = C(s + s^p)`. Returns the time grid, the candidate and the target `f`.
pub fn exponential_rescaling_candidate(
    engine: &dyn SpectralEngine,
    u0: &Field,
    c: f64,
    p: f64,
    horizon: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<Field>, GrowthFunction)> {
    if !(p > 1.0) || !(c > 0.0) {
        return Err(precondition(format!("need p > 1 and C > 0 (p = {p}, C = {c})")));
    }
    let limit = 2f64.ln() / (2.0 * c * (p - 1.0));
    if horizon > limit * (1.0 + 1e-12) {
        return Err(precondition(format!("horizon {horizon} exceeds ln 2/(2C(p-1)) = {limit}")));
    }
    let driver = GrowthFunction::PowerLog { a: 2.0 * c, p, gamma: 0.0 };
    let problem = NonlinearProblem::new(engine, driver, u0.clone(), 1.0, horizon, dt)?;
    let times = problem.time_grid();
    let mut u = u0.clone();
    let mut path = vec![u.clone()];
    for w in times.windows(2) {
        u = step_exponential_euler(engine, &problem.f, &u, w[1] - w[0])?;
        path.push(u.clone());
    }
    let candidate = times.iter().zip(&path).map(|(t, u)| u.scaled((2.0 * c * t).exp())).collect();
    let target = GrowthFunction::Sum(vec![
        GrowthFunction::PowerLog { a: c, p: 1.0, gamma: 0.0 },
        GrowthFunction::PowerLog { a: c, p, gamma: 0.0 },
    ]);
    Ok((times, candidate, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletOperator;
    use crate::mesh::Grid1D;

    fn op(alpha: f64, n: usize) -> DirichletOperator {
        DirichletOperator::assemble(Grid1D::new(1.0, n).unwrap(), alpha).unwrap()
    }

    fn rel_l2(a: &Field, b: &Field) -> f64 {
        let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
        crate::mesh::lq_norm(&diff, a.mesh.cell(), 2.0) / b.norm(2.0)
    }

    #[test]
    fn zero_nonlinearity_is_linear_flow() {
        let a = op(1.5, 80);
        let u = Field::indicator(a.grid(), 0.0, 0.3);
        let step = step_exponential_euler(&a, &GrowthFunction::Zero, &u, 0.01).unwrap();
        let lin = a.propagate(0.01, &u).unwrap();
        for (x, y) in step.values.iter().zip(&lin.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_growth_matches_closed_form() {
        let a = op(2.0, 100);
        let u0 = Field::from_fn(a.grid(), |x| (1.0 - x * x).max(0.0));
        let f = GrowthFunction::power(1.0);
        let exact = a.propagate(0.5, &u0).unwrap().scaled(0.5f64.exp());
        let mut errs = Vec::new();
        for dt in [1e-3, 5e-4] {
            let traj = solve(&NonlinearProblem::new(&a, f.clone(), u0.clone(), 2.0, 0.5, dt).unwrap()).unwrap();
            errs.push(rel_l2(traj.final_field.as_ref().unwrap(), &exact));
        }
        assert!(errs[0] <= 1e-2, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!((ratio - 2.0).abs() <= 0.4, "{errs:?}");
    }

    #[test]
    fn constant_source_matches_resolvent_formula() {
        let a = op(1.5, 60);
        let zero = Field::zeros(a.grid());
        let ones: Vec<f64> = vec![1.0; 60];
        let t = 0.2;
        let exact = a.combine(&[(&ones, &move |l: f64| t * phi1(t * l))]);
        let traj = solve(&NonlinearProblem::new(&a, GrowthFunction::power(0.0), zero, 2.0, t, 1e-2).unwrap()).unwrap();
        let got = traj.final_field.unwrap();
        // f is constant, so the exponential Euler sum is exact.
        for (x, y) in got.values.iter().zip(&exact) {
            assert!((x - y).abs() < 1e-12 * y.max(1.0));
        }
    }

    #[test]
    fn quadratic_blows_up_for_large_data_only() {
        let a = op(2.0, 60);
        let f = GrowthFunction::power(2.0);
        let big = Field::indicator(a.grid(), 0.0, 0.2).scaled(1e3);
        let traj = solve(&NonlinearProblem::new(&a, f.clone(), big, 2.0, 0.1, 1e-4).unwrap()).unwrap();
        let t_star = traj.t_star().expect("blowup expected");
        assert!(t_star <= 1e-2, "{t_star}");
        let small = Field::indicator(a.grid(), 0.0, 0.2).scaled(1e-3);
        let traj = solve(&NonlinearProblem::new(&a, f, small, 2.0, 0.1, 1e-3).unwrap()).unwrap();
        assert_eq!(traj.status, Status::Completed);
    }

    #[test]
    fn linear_flow_norm_is_non_increasing() {
        let a = op(1.5, 80);
        let u0 = Field::indicator(a.grid(), 0.0, 0.2);
        let traj = solve(&NonlinearProblem::new(&a, GrowthFunction::Zero, u0, 2.0, 0.2, 1e-2).unwrap()).unwrap();
        assert!(traj.norm_lq.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn picard_zero_converges_at_once() {
        let a = op(1.5, 40);
        let u0 = Field::indicator(a.grid(), 0.0, 0.3);
        let pr = NonlinearProblem::new(&a, GrowthFunction::Zero, u0, 2.0, 0.05, 1e-2).unwrap();
        let out = picard_minimal_solution(&pr, 20, DEFAULT_PICARD_TOL).unwrap();
        assert_eq!(out.trajectory.status, Status::Completed);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn picard_linear_matches_closed_form() {
        let a = op(2.0, 60);
        let u0 = Field::from_fn(a.grid(), |x| (1.0 - x * x).max(0.0));
        let pr = NonlinearProblem::new(&a, GrowthFunction::power(1.0), u0.clone(), 2.0, 0.2, 1e-3).unwrap();
        let out = picard_minimal_solution(&pr, 100, DEFAULT_PICARD_TOL).unwrap();
        assert_eq!(out.trajectory.status, Status::Completed);
        let exact = a.propagate(0.2, &u0).unwrap().scaled(0.2f64.exp());
        assert!(rel_l2(out.path.last().unwrap(), &exact) < 5e-3);
    }

    #[test]
    fn picard_diverges_for_huge_data() {
        let a = op(2.0, 40);
        let u0 = Field::indicator(a.grid(), 0.0, 0.3).scaled(1e4);
        let pr = NonlinearProblem::new(&a, GrowthFunction::power(2.0), u0, 2.0, 0.05, 1e-3).unwrap();
        let out = picard_minimal_solution(&pr, 200, DEFAULT_PICARD_TOL).unwrap();
        assert_eq!(out.trajectory.status, Status::PicardDiverged);
        assert!(out.iterate_norms.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn zero_is_not_a_supersolution() {
        let a = op(1.5, 40);
        let u0 = Field::indicator(a.grid(), 0.0, 0.3);
        let times = [0.0, 0.01, 0.02];
        let v = vec![Field::zeros(a.grid()); 3];
        let r = verify_supersolution(&a, &GrowthFunction::power(2.0), &times, &v, &u0).unwrap();
        assert!(!r.is_supersolution && r.max_violation > 0.5);
    }

    #[test]
    fn problem_guards() {
        let a = op(1.5, 20);
        let neg = Field::from_fn(a.grid(), |_| -1.0);
        assert!(NonlinearProblem::new(&a, GrowthFunction::Zero, neg, 2.0, 1.0, 0.1).is_err());
        let u = Field::zeros(a.grid());
        assert!(NonlinearProblem::new(&a, GrowthFunction::Zero, u.clone(), 2.0, 1.0, 2.0).is_err());
        assert!(NonlinearProblem::new(&a, GrowthFunction::Zero, u, 0.5, 1.0, 0.1).is_err());
    }
}
