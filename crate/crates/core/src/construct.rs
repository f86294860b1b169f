//! Stacked-indicator initial data for the non-existence constructions and
//! the escalation experiment that feeds them to the solver.
//!
//! Three families are built:
//!
//! * `LqBall`: concentric layers `(φ_k/ν̂) χ_{r_k}` with
//!   `r_k = ε φ_k^{−q/d} k^{−αq/d}`, where `φ_k` is the least dyadic value with
//!   `φ_k ≥ k` and `f(φ_k) ≥ φ_k^{p} e^{k/q}`, `p = 1 + αq/d`.
//! * `L1Ball`: layers `n^{−α} β_n^d χ_{1/β_n}` with `β_n = (n^α φ_{ξ_n})^{1/d}`,
//!   `φ_k = s_k/ĉ` from a divergent geometric sequence `s_k`.
//! * `LqWholeSpace`: disjoint balls `(s_n/ν̂) χ_{r_n}(x_n)` with
//!   `r_n = n^{−αq/d} s_n^{−q/d}`, `s_n ≤ n^{−α}`, `f(s_n) ≥ n^{2α} s_n`.

use serde::{Deserialize, Serialize};

use crate::criteria::{geometric_sequence_witness, DichotomyParams};
use crate::engine::SpectralEngine;
use crate::error::{precondition, Error, Result};
use crate::growth::GrowthFunction;
use crate::mesh::{Field, Mesh};
use crate::mild::{solve, NonlinearProblem};
use crate::special::unit_ball_volume;

/// Largest value the dyadic searches may reach.
pub const OVERFLOW_GUARD: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    LqBall,
    L1Ball,
    LqWholeSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub k: usize,
    /// `φ_k` for the ball constructions, `s_n` for the whole-space one.
    pub level: f64,
    pub amplitude: f64,
    pub radius: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedIndicatorSpec {
    pub kind: LayerKind,
    pub params: DichotomyParams,
    pub eps: Option<f64>,
    pub layers: Vec<Layer>,
    /// Analytic bound on `‖Σ u_k‖_{L^q}` from the triangle inequality.
    pub norm_bound: f64,
    /// For `L1Ball`: `(n, ξ_n, k_n, n^{−αp} Σ_{k≤k_n} f(s_k) s_k^{−p})` per layer.
    pub schedule: Vec<(usize, usize, usize, f64)>,
}

/// Least `φ = 2^j ≥ max(k, floor)` with `ln f(φ) ≥ p ln φ + k/q`.
fn dyadic_level(f: &GrowthFunction, p: f64, q: f64, k: usize, floor: f64) -> Option<f64> {
    let lo = (k as f64).max(floor).max(1.0).log2().ceil() as i32;
    let hi = OVERFLOW_GUARD.log2().floor() as i32;
    (lo..=hi)
        .map(|j| 2f64.powi(j))
        .find(|&phi| f.ln_value(phi) >= p * phi.ln() + k as f64 / q)
}

/// Concentric layers for `q > 1` on the ball `B_R`.
///
/// `eps = None` picks the largest dyadic `ε` with `3 r_k ≤ R` for all layers.
pub fn build_lq_ball_layers(
    f: &GrowthFunction,
    params: &DichotomyParams,
    k_max: usize,
    eps: Option<f64>,
    nu_hat: f64,
    big_r: f64,
) -> Result<StackedIndicatorSpec> {
    if !(nu_hat > 0.0) || !(big_r > 0.0) {
        return Err(precondition(format!("need nu_hat > 0 and R > 0 (nu_hat = {nu_hat}, R = {big_r})")));
    }
    let (p, q, d, alpha) = (params.p_crit(), params.q, params.d as f64, params.alpha);
    let mut levels = Vec::with_capacity(k_max);
    let mut floor = 1.0;
    for k in 1..=k_max {
        let phi = dyadic_level(f, p, q, k, floor).ok_or_else(|| Error::Layer {
            k,
            reason: format!("no dyadic phi <= {OVERFLOW_GUARD:e} with f(phi) >= phi^{p} e^({k}/{q})"),
        })?;
        levels.push(phi);
        floor = phi;
    }
    let shape: Vec<f64> =
        levels.iter().enumerate().map(|(i, phi)| phi.powf(-q / d) * ((i + 1) as f64).powf(-alpha * q / d)).collect();
    let widest = shape.iter().copied().fold(0.0, f64::max);
    let eps = match eps {
        Some(e) if e > 0.0 => e,
        Some(e) => return Err(precondition(format!("eps = {e} must be positive"))),
        None if k_max == 0 => 1.0,
        None => 2f64.powf((big_r / (3.0 * widest)).log2().floor()),
    };
    let mut layers = Vec::with_capacity(k_max);
    for (i, (phi, s)) in levels.iter().zip(&shape).enumerate() {
        let radius = eps * s;
        if 3.0 * radius > big_r * (1.0 + 1e-12) {
            return Err(Error::Layer { k: i + 1, reason: format!("3 r_k = {} exceeds R = {big_r}", 3.0 * radius) });
        }
        layers.push(Layer { k: i + 1, level: *phi, amplitude: phi / nu_hat, radius, center: 0.0 });
    }
    let omega = unit_ball_volume(params.d);
    let norm_bound = (1..=k_max).map(|k| (k as f64).powf(-alpha)).sum::<f64>() * omega.powf(1.0 / q) / nu_hat
        * eps.powf(d / q);
    Ok(StackedIndicatorSpec { kind: LayerKind::LqBall, params: *params, eps: Some(eps), layers, norm_bound, schedule: vec![] })
}

/// Concentric `L¹` layers for `n = n₀, …, n₀ + count − 1` on the ball `B_R`.
///
/// The divergent sequence is the greedy geometric witness, extended up to the
/// overflow guard; `ξ_n` is the least index whose partial sum
/// `n^{−αp} Σ_{k₀ ≤ k ≤ k_n} f(s_k) s_k^{−p}` exceeds `n`, where `k_n` is the
/// largest `k` with `φ_{k+1} ≤ φ_{ξ_n}/α`.
pub fn build_l1_ball_layers(
    f: &GrowthFunction,
    params: &DichotomyParams,
    count: usize,
    c_hat: f64,
    big_r: f64,
) -> Result<StackedIndicatorSpec> {
    if !(c_hat > 0.0) || !(big_r > 0.0) {
        return Err(precondition(format!("need c_hat > 0 and R > 0 (c_hat = {c_hat}, R = {big_r})")));
    }
    if !geometric_sequence_witness(f, params).found {
        return Err(Error::OutsideHypotheses("no divergent geometric sequence on the numeric horizon".into()));
    }
    let wide = params.with_horizon(OVERFLOW_GUARD)?;
    let witness = geometric_sequence_witness(f, &wide);
    let (alpha, d, p) = (params.alpha, params.d as f64, params.p_integral());
    let phi: Vec<f64> = witness.sequence.iter().map(|s| s / c_hat).collect();
    let k0 = phi.iter().position(|x| *x >= 1.0).ok_or_else(|| Error::Layer { k: 1, reason: "no phi_k >= 1".into() })?;
    // cumulative[k] = Σ_{k0 ≤ j ≤ k} f(s_j) s_j^{-p}
    let mut cumulative = vec![0.0; phi.len()];
    let mut acc = 0.0;
    for k in k0..phi.len() {
        acc += witness.terms[k];
        cumulative[k] = acc;
    }
    let k_for = |xi: usize| -> Option<usize> {
        let cap = phi[xi] / alpha;
        (k0..xi).rev().find(|&k| k + 1 < phi.len() && phi[k + 1] <= cap)
    };
    let mut layers = Vec::with_capacity(count);
    let mut schedule = Vec::with_capacity(count);
    let mut n = 1usize;
    while layers.len() < count {
        let need = n as f64;
        let scale = (n as f64).powf(-alpha * p);
        let found = (k0 + 1..phi.len()).find_map(|xi| {
            let kn = k_for(xi)?;
            let sum = scale * cumulative[kn];
            (sum > need).then_some((xi, kn, sum))
        });
        let (xi, kn, sum) = found.ok_or_else(|| Error::Layer {
            k: n,
            reason: format!("partial sums stay below the schedule before {OVERFLOW_GUARD:e}"),
        })?;
        let beta = ((n as f64).powf(alpha) * phi[xi]).powf(1.0 / d);
        if layers.is_empty() && 1.0 / beta >= big_r / 3.0 {
            n += 1;
            continue;
        }
        layers.push(Layer {
            k: n,
            level: phi[xi],
            amplitude: (n as f64).powf(-alpha) * beta.powf(d),
            radius: 1.0 / beta,
            center: 0.0,
        });
        schedule.push((n, xi + 1, kn + 1, sum));
        n += 1;
    }
    let omega = unit_ball_volume(params.d);
    let norm_bound = omega * layers.iter().map(|l| (l.k as f64).powf(-alpha)).sum::<f64>();
    Ok(StackedIndicatorSpec { kind: LayerKind::L1Ball, params: *params, eps: None, layers, norm_bound, schedule })
}

/// Disjoint whole-space layers, `s_n` the largest dyadic value below `n^{−α}`
/// with `f(s_n) ≥ n^{2α} s_n`.
pub fn build_whole_space_layers(f: &GrowthFunction, params: &DichotomyParams, count: usize, nu_hat: f64) -> Result<StackedIndicatorSpec> {
    if !(nu_hat > 0.0) {
        return Err(precondition(format!("nu_hat = {nu_hat} must be positive")));
    }
    let (alpha, q, d) = (params.alpha, params.q, params.d as f64);
    let mut raw = Vec::with_capacity(count);
    for n in 1..=count {
        let nf = n as f64;
        let top = (nf.powf(-alpha)).log2().floor() as i32;
        let bottom = (1.0 / OVERFLOW_GUARD).log2().ceil() as i32;
        let s = (bottom..=top)
            .rev()
            .map(|j| 2f64.powi(j))
            .find(|&s| f.ln_value(s) >= 2.0 * alpha * nf.ln() + s.ln())
            .ok_or_else(|| Error::Layer { k: n, reason: format!("no dyadic s <= n^-alpha with f(s) >= n^(2 alpha) s") })?;
        let radius = nf.powf(-alpha * q / d) * s.powf(-q / d);
        raw.push((n, s, radius));
    }
    let widest = raw.iter().map(|r| r.2).fold(0.0, f64::max);
    let spacing = 2.0 * widest * 1.25;
    let mid = (count as f64 - 1.0) / 2.0;
    let layers = raw
        .iter()
        .enumerate()
        .map(|(i, &(n, s, radius))| Layer {
            k: n,
            level: s,
            amplitude: s / nu_hat,
            radius,
            center: (i as f64 - mid) * spacing,
        })
        .collect();
    let omega = unit_ball_volume(params.d);
    let norm_bound = omega.powf(1.0 / q) / nu_hat * (1..=count).map(|n| (n as f64).powf(-alpha)).sum::<f64>();
    Ok(StackedIndicatorSpec { kind: LayerKind::LqWholeSpace, params: *params, eps: None, layers, norm_bound, schedule: vec![] })
}

/// Nodewise sum of the layers; every radius must be at least two cells.
pub fn realize(spec: &StackedIndicatorSpec, mesh: impl Into<Mesh>) -> Result<Field> {
    let mesh = mesh.into();
    let h = mesh.cell();
    let unresolved: Vec<usize> = spec.layers.iter().filter(|l| l.radius < 2.0 * h).map(|l| l.k).collect();
    if !unresolved.is_empty() {
        return Err(Error::Unresolvable(unresolved));
    }
    let mut field = Field::zeros(mesh);
    let nodes = mesh.nodes();
    for layer in &spec.layers {
        for (v, x) in field.values.iter_mut().zip(&nodes) {
            if (x - layer.center).abs() <= layer.radius {
                *v += layer.amplitude;
            }
        }
    }
    Ok(field)
}

/// Independent re-check of every layer's defining inequalities.
pub fn check_layers(f: &GrowthFunction, spec: &StackedIndicatorSpec) -> Result<()> {
    let fail = |k: usize, reason: String| Err(Error::Layer { k, reason });
    let p = spec.params;
    for (i, l) in spec.layers.iter().enumerate() {
        match spec.kind {
            LayerKind::LqBall => {
                if l.level < l.k as f64 {
                    return fail(l.k, format!("phi_k = {} < k", l.level));
                }
                if f.ln_value(l.level) < p.p_crit() * l.level.ln() + l.k as f64 / p.q {
                    return fail(l.k, "f(phi_k) < phi_k^p e^(k/q)".into());
                }
                if i > 0 && l.level < spec.layers[i - 1].level {
                    return fail(l.k, "phi_k decreased".into());
                }
            }
            LayerKind::L1Ball => {
                if i > 0 && l.level < p.tau * spec.layers[i - 1].level * (1.0 - 1e-12) {
                    return fail(l.k, "levels not tau-geometric".into());
                }
            }
            LayerKind::LqWholeSpace => {
                let n = l.k as f64;
                if l.level > n.powf(-p.alpha) || f.ln_value(l.level) < 2.0 * p.alpha * n.ln() + l.level.ln() {
                    return fail(l.k, "s_n violates s_n <= n^-alpha or f(s_n) >= n^(2 alpha) s_n".into());
                }
                if let Some(prev) = i.checked_sub(1).map(|j| spec.layers[j]) {
                    if (l.center - prev.center).abs() <= l.radius + prev.radius {
                        return fail(l.k, "balls overlap".into());
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub horizon: f64,
    pub dt: f64,
    pub blowup_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscalationRow {
    pub k: usize,
    pub layers_built: usize,
    pub u0_norm_lq: f64,
    pub sup_norm_lq: f64,
    pub t_star: Option<f64>,
}

/// For each truncation level `K`, realises `u₀ = Σ_{k≤K} u_k`, solves, and
/// records the initial and the largest `L^q` norm plus any blowup time.
/// `build(K)` supplies the layers, so any of the constructions can be driven.
pub fn escalation_experiment(
    engine: &dyn SpectralEngine,
    f: &GrowthFunction,
    q: f64,
    k_list: &[usize],
    build: impl Fn(usize) -> Result<StackedIndicatorSpec>,
    solver: SolverSettings,
) -> Result<Vec<EscalationRow>> {
    let specs: Vec<StackedIndicatorSpec> = k_list.iter().map(|&k| build(k)).collect::<Result<_>>()?;
    let mesh = engine.mesh();
    let fields: Vec<Field> = specs.iter().map(|s| realize(s, mesh)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(k_list.len());
    for ((&k, spec), u0) in k_list.iter().zip(&specs).zip(fields) {
        let norm0 = u0.norm(q);
        let problem =
            NonlinearProblem::new(engine, f.clone(), u0, q, solver.horizon, solver.dt)?.with_blowup_cap(solver.blowup_cap);
        let traj = solve(&problem)?;
        rows.push(EscalationRow {
            k,
            layers_built: spec.layers.len(),
            u0_norm_lq: norm0,
            sup_norm_lq: traj.sup_norm_lq(),
            t_star: traj.t_star(),
        });
    }
    Ok(rows)
}
