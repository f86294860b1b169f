//! Empirical lower bounds for `S(t)χ_r` and the `L¹ → L^∞` smoothing rate.

use serde::{Deserialize, Serialize};

use super::DirichletOperator;
use crate::engine::SpectralEngine;
use crate::error::{precondition, Error, Result};
use crate::mesh::Field;
use crate::special::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundWitness {
    pub value: f64,
    /// Time and node at which the minimum was attained.
    pub t: f64,
    pub x: f64,
}

fn check_geometry(op: &DirichletOperator, r: f64, delta: f64, t_grid: &[f64]) -> Result<()> {
    if !(r > 0.0) || !(delta > 0.0) {
        return Err(precondition(format!("need r > 0 and delta > 0 (r = {r}, delta = {delta})")));
    }
    let big_r = op.grid().half_width();
    if r + 2.0 * delta > big_r {
        return Err(precondition(format!("geometry: r + 2 delta = {} exceeds R = {big_r}", r + 2.0 * delta)));
    }
    if t_grid.is_empty() {
        return Err(precondition("empty time grid"));
    }
    let t_max = delta.powf(op.alpha());
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= t_max * (1.0 + 1e-12))) {
        return Err(precondition(format!("time {t} outside (0, delta^alpha = {t_max}]")));
    }
    Ok(())
}

/// `c_hat = min_t min_{|x| ≤ r + t^{1/α}} [S(t)χ_r](x) · (r + t^{1/α})/r`.
pub fn verify_indicator_lower_bound(
    op: &DirichletOperator,
    r: f64,
    delta: f64,
    t_grid: &[f64],
) -> Result<LowerBoundWitness> {
    check_geometry(op, r, delta, t_grid)?;
    let chi = Field::indicator(op.grid(), 0.0, r);
    let nodes = op.grid().nodes();
    let mut best = LowerBoundWitness { value: f64::INFINITY, t: f64::NAN, x: f64::NAN };
    for &t in t_grid {
        let reach = r + t.powf(1.0 / op.alpha());
        let s = op.propagate(t, &chi)?;
        for (x, v) in nodes.iter().zip(&s.values) {
            if x.abs() <= reach {
                let ratio = v * reach / r;
                if ratio < best.value {
                    best = LowerBoundWitness { value: ratio, t, x: *x };
                }
            }
        }
    }
    Ok(best)
}

/// `mu_hat = min_t (h Σ_i [S(t)χ_r](x_i)) / r`.
pub fn verify_mass_lower_bound(
    op: &DirichletOperator,
    r: f64,
    delta: f64,
    t_grid: &[f64],
) -> Result<LowerBoundWitness> {
    check_geometry(op, r, delta, t_grid)?;
    let chi = Field::indicator(op.grid(), 0.0, r);
    let mut best = LowerBoundWitness { value: f64::INFINITY, t: f64::NAN, x: f64::NAN };
    for &t in t_grid {
        let mass = op.propagate(t, &chi)?.norm(1.0) / r;
        if mass < best.value {
            best = LowerBoundWitness { value: mass, t, x: f64::NAN };
        }
    }
    Ok(best)
}

/// `nu_hat = min_{t ≤ min(δ^α, r^α)} min_{|x| ≤ r + t^{1/α}} [S(t)χ_r](x)`.
pub fn verify_support_lower_bound(
    op: &DirichletOperator,
    r: f64,
    delta: f64,
    t_grid: &[f64],
) -> Result<LowerBoundWitness> {
    check_geometry(op, r, delta, t_grid)?;
    let cap = r.powf(op.alpha());
    let times: Vec<f64> = t_grid.iter().copied().filter(|t| *t <= cap).collect();
    if times.is_empty() {
        return Err(precondition(format!("no sample time below r^alpha = {cap}")));
    }
    let chi = Field::indicator(op.grid(), 0.0, r);
    let nodes = op.grid().nodes();
    let mut best = LowerBoundWitness { value: f64::INFINITY, t: f64::NAN, x: f64::NAN };
    for t in times {
        let reach = r + t.powf(1.0 / op.alpha());
        let s = op.propagate(t, &chi)?;
        for (x, v) in nodes.iter().zip(&s.values) {
            if x.abs() <= reach && *v < best.value {
                best = LowerBoundWitness { value: *v, t, x: *x };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingFit {
    /// Slope of `log M(t)` against `log t` on the small-time half.
    pub slope: f64,
    pub intercept: f64,
    /// `max M(t) t^{1/α}` over the fitted window.
    pub c_sup: f64,
    /// `(t, M(t))` for every grid time.
    pub samples: Vec<(f64, f64)>,
}

/// Fits `M(t) = ‖S(t)‖_{L¹→L^∞} ≈ C t^{slope}` on the first half of `t_grid`.
pub fn verify_smoothing(op: &DirichletOperator, t_grid: &[f64]) -> Result<SmoothingFit> {
    let t_cap = op.grid().half_width().powf(op.alpha());
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= t_cap * (1.0 + 1e-12))) {
        return Err(precondition(format!("time {t} outside (0, R^alpha = {t_cap}]")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(precondition("time grid must be increasing"));
    }
    let half = t_grid.len() / 2;
    if half < 4 {
        return Err(precondition(format!("smoothing fit needs at least 4 points, got {half}")));
    }
    let samples: Vec<(f64, f64)> = t_grid.iter().map(|&t| (t, op.max_kernel_value(t))).collect();
    let window = &samples[..half];
    let lx: Vec<f64> = window.iter().map(|(t, _)| t.ln()).collect();
    let ly: Vec<f64> = window.iter().map(|(_, m)| m.ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);
    let c_sup = window.iter().map(|(t, m)| m * t.powf(1.0 / op.alpha())).fold(0.0, f64::max);
    Ok(SmoothingFit { slope, intercept, c_sup, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    pub c_hat: f64,
    pub mu_hat: f64,
    pub nu_hat: f64,
    pub lambda0_hat: f64,
    pub c_smooth: f64,
    pub smoothing_exponent: f64,
}

pub fn empirical_constants(
    op: &DirichletOperator,
    r: f64,
    delta: f64,
    t_grid: &[f64],
    smoothing_grid: &[f64],
) -> Result<EmpiricalConstants> {
    let c = verify_indicator_lower_bound(op, r, delta, t_grid)?;
    let mu = verify_mass_lower_bound(op, r, delta, t_grid)?;
    let nu = verify_support_lower_bound(op, r, delta, t_grid)?;
    let fit = verify_smoothing(op, smoothing_grid)?;
    let constants = EmpiricalConstants {
        c_hat: c.value,
        mu_hat: mu.value,
        nu_hat: nu.value,
        lambda0_hat: op.lambda1(),
        c_smooth: fit.c_sup,
        smoothing_exponent: fit.slope,
    };
    if ![constants.c_hat, constants.mu_hat, constants.nu_hat, constants.lambda0_hat, constants.c_smooth]
        .iter()
        .all(|v| *v > 0.0)
    {
        return Err(Error::Precondition(format!("non-positive empirical constant: {constants:?}")));
    }
    Ok(constants)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupRow {
    pub t: f64,
    pub c_hat_running: f64,
    pub mu_hat_running: f64,
    pub m_t: f64,
    pub lambda1: f64,
}

/// Running minima of the indicator and mass ratios along `t_grid`, with the
/// smoothing norm at each time. Times beyond `δ^α` carry the last running
/// minima forward.
pub fn semigroup_report(op: &DirichletOperator, r: f64, delta: f64, t_grid: &[f64]) -> Result<Vec<SemigroupRow>> {
    let t_lim = delta.powf(op.alpha());
    let inside: Vec<f64> = t_grid.iter().copied().filter(|t| *t <= t_lim).collect();
    if !inside.is_empty() {
        check_geometry(op, r, delta, &inside)?;
    } else {
        check_geometry(op, r, delta, &[t_lim])?;
    }
    let lambda1 = op.lambda1();
    let mut c_run = f64::INFINITY;
    let mut mu_run = f64::INFINITY;
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(precondition(format!("time {t} must be positive")));
        }
        if t <= t_lim {
            c_run = c_run.min(verify_indicator_lower_bound(op, r, delta, &[t])?.value);
            mu_run = mu_run.min(verify_mass_lower_bound(op, r, delta, &[t])?.value);
        }
        rows.push(SemigroupRow { t, c_hat_running: c_run, mu_hat_running: mu_run, m_t: op.max_kernel_value(t), lambda1 });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid1D;
    use crate::special::log_space;

    fn op(alpha: f64, n: usize) -> DirichletOperator {
        DirichletOperator::assemble(Grid1D::new(1.0, n).unwrap(), alpha).unwrap()
    }

    #[test]
    fn geometry_guard() {
        let a = op(1.5, 50);
        let err = verify_indicator_lower_bound(&a, 0.5, 0.3, &[1e-3]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(verify_mass_lower_bound(&a, 0.1, 0.3, &[1.0]).is_err());
    }

    #[test]
    fn small_time_ratio_tends_to_one_at_centre() {
        let a = op(2.0, 199);
        // Below the grid scale nothing moves, so include a resolved time.
        let c = verify_indicator_lower_bound(&a, 0.2, 0.2, &[1e-7, 1e-3]).unwrap();
        assert!(c.value <= 1.0 + 1e-12, "{c:?}");
        let chi = Field::indicator(a.grid(), 0.0, 0.2);
        let s = a.propagate(1e-7, &chi).unwrap();
        assert!((s.values[99] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mass_ratio_starts_near_two() {
        let a = op(1.5, 199);
        let mu = verify_mass_lower_bound(&a, 0.2, 0.3, &[1e-8]).unwrap();
        assert!(mu.value <= 2.0 + 0.05 && mu.value > 1.8, "{mu:?}");
    }

    #[test]
    fn mass_bound_dominates_integrated_pointwise_bound() {
        let a = op(1.5, 199);
        let ts = log_space(1e-4, 0.3f64.powf(1.5), 8);
        let c = verify_indicator_lower_bound(&a, 0.1, 0.3, &ts).unwrap();
        let mu = verify_mass_lower_bound(&a, 0.1, 0.3, &ts).unwrap();
        // Integrating c (r/(r+t^{1/α})) over |x| ≤ r + t^{1/α} gives at least 2 c r.
        assert!(mu.value >= c.value * 2.0 * (1.0 - 0.05), "{mu:?} {c:?}");
    }

    #[test]
    fn smoothing_fit_requires_four_points() {
        let a = op(1.5, 60);
        assert!(verify_smoothing(&a, &[1e-3, 1e-2, 1e-1, 0.5]).is_err());
        assert!(verify_smoothing(&a, &log_space(1e-3, 2.0, 10)).is_err());
    }

    #[test]
    fn long_time_decay_rate_is_first_eigenvalue() {
        let a = op(1.5, 120);
        let (t1, t2) = (0.6, 0.9);
        let rate = (a.max_kernel_value(t1) / a.max_kernel_value(t2)).ln() / (t2 - t1);
        assert!((rate / a.lambda1() - 1.0).abs() < 0.02, "{rate} vs {}", a.lambda1());
    }
}
