//! Free-space α-stable heat kernels `p(t, x, y)` of `Δ^{α/2}` and the two
//! envelope forms that bound them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{precondition, Error, Result};
use crate::quad::{integrate_partitioned, Tolerance};
use crate::special::{gamma, ln_gamma, log_space};

/// `e^{-x} < 1e-16` beyond this exponent.
const DECAY_CUTOFF: f64 = 36.85;

/// Scaled distance `r t^{−1/α}` beyond which the tail expansion is tried.
const TAIL_SWITCH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub alpha: f64,
    pub d: u32,
}

impl KernelParams {
    pub fn new(alpha: f64, d: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(precondition(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if d == 0 {
            return Err(precondition("dimension d must be at least 1"));
        }
        Ok(KernelParams { alpha, d })
    }
}

fn check_time(t: f64, r: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(precondition(format!("time t = {t} must be positive")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(precondition(format!("distance r = {r} must be non-negative")));
    }
    Ok(())
}

/// Gaussian (α = 2) and Cauchy (α = 1) kernels in any dimension.
pub fn closed_form_kernel(t: f64, r: f64, params: KernelParams) -> Result<f64> {
    check_time(t, r)?;
    let d = params.d as f64;
    if params.alpha == 2.0 {
        Ok((4.0 * PI * t).powf(-d / 2.0) * (-r * r / (4.0 * t)).exp())
    } else if params.alpha == 1.0 {
        let e = (d + 1.0) / 2.0;
        Ok(gamma(e) * PI.powf(-e) * t * (t * t + r * r).powf(-e))
    } else {
        Err(Error::NoClosedForm(params.alpha))
    }
}

/// One-dimensional kernel by Fourier inversion,
/// `p(t, r) = (1/π) ∫₀^∞ e^{−tρ^α} cos(ρ r) dρ`.
///
/// The range is cut where the damping factor drops below `1e-16` and split into
/// panels no wider than a quarter period of the cosine.
pub fn fourier_inversion(t: f64, r: f64, alpha: f64) -> Result<f64> {
    check_time(t, r)?;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(precondition(format!("alpha = {alpha} must lie in (0, 2]")));
    }
    let rho_max = (DECAY_CUTOFF / t).powf(1.0 / alpha);
    let mut panels = 16usize;
    if r > 0.0 {
        let width = PI / (2.0 * r);
        panels = panels.max((rho_max / width).ceil() as usize);
    }
    // A few geometric breakpoints resolve the ρ^α cusp at the origin.
    let first = rho_max / panels as f64;
    let mut breaks: Vec<f64> = vec![0.0];
    for j in (1..=6).rev() {
        breaks.push(first * 0.25f64.powi(j));
    }
    breaks.extend((1..=panels).map(|i| if i == panels { rho_max } else { first * i as f64 }));
    let tol = Tolerance { abs: 1e-18, rel: 1e-13, max_intervals: 4_000_000 };
    let res = integrate_partitioned(|rho: f64| (-t * rho.powf(alpha)).exp() * (rho * r).cos(), &breaks, tol)?;
    Ok(res.value / PI)
}

/// Large-distance expansion
/// `p(t, r) = (1/π) Σ_{k≥1} (−1)^{k+1} Γ(αk+1)/k! sin(παk/2) t^k r^{−αk−1}`,
/// convergent for α < 1 and asymptotic for α > 1. Returns `None` unless the
/// terms fall below `1e-16` of the partial sum before they start to grow.
pub fn tail_series(t: f64, r: f64, alpha: f64) -> Option<f64> {
    if !(r > 0.0) || !(t > 0.0) || alpha >= 2.0 {
        return None;
    }
    let ln_z = t.ln() - alpha * r.ln();
    let mut sum = 0.0;
    let mut last_size = f64::INFINITY;
    for k in 1..=400u32 {
        let kf = k as f64;
        let ln_size = ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) + kf * ln_z;
        let size = ln_size.exp();
        if size > last_size {
            return None;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * size * (PI * alpha * kf / 2.0).sin();
        if size <= 1e-16 * sum.abs() {
            return Some(sum / (PI * r));
        }
        last_size = size;
    }
    None
}

/// Heat kernel of `Δ^{α/2}` on ℝ^d as a function of `t` and `r = |x − y|`.
///
/// α ∈ {1, 2} use the closed forms in every dimension. Other α are one
/// dimensional only: the large-distance expansion where it has converged,
/// [`fourier_inversion`] otherwise.
pub fn stable_kernel(t: f64, r: f64, params: KernelParams) -> Result<f64> {
    if params.alpha == 1.0 || params.alpha == 2.0 {
        return closed_form_kernel(t, r, params);
    }
    if params.d != 1 {
        return Err(precondition(format!(
            "generic alpha = {} is only supported for d = 1 (got d = {})",
            params.alpha, params.d
        )));
    }
    check_time(t, r)?;
    if r > TAIL_SWITCH * t.powf(1.0 / params.alpha) {
        if let Some(v) = tail_series(t, r, params.alpha) {
            return Ok(v);
        }
    }
    fourier_inversion(t, r, params.alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePair {
    /// `t^{-d/α} ∧ t r^{-(d+α)}`
    pub min_form: f64,
    /// `t / (t^{1/α} + r)^{d+α}`
    pub sum_form: f64,
}

impl EnvelopePair {
    pub fn ratio(&self) -> f64 {
        self.min_form / self.sum_form
    }
}

pub fn envelope(t: f64, r: f64, params: KernelParams) -> EnvelopePair {
    let d = params.d as f64;
    let a = params.alpha;
    let near = t.powf(-d / a);
    let min_form = if r > 0.0 { near.min(t * r.powf(-(d + a))) } else { near };
    let sum_form = t / (t.powf(1.0 / a) + r).powf(d + a);
    EnvelopePair { min_form, sum_form }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub c1_hat: f64,
    pub c1_at: (f64, f64),
    pub c2_hat: f64,
    pub c2_at: (f64, f64),
    pub samples: usize,
}

/// Empirical `c1 = inf p/min_form` and `c2 = sup p/min_form` over a sample grid.
///
/// Only meaningful for α < 2; the Gaussian tail is not bounded below by any
/// multiple of the polynomial envelope.
pub fn estimate_envelope_constants(params: KernelParams, grid: &[(f64, f64)]) -> Result<EnvelopeConstants> {
    if grid.is_empty() {
        return Err(precondition("sample grid is empty"));
    }
    if params.alpha >= 2.0 {
        return Err(precondition("two-sided envelope bounds require alpha < 2"));
    }
    if let Some(&(t, _)) = grid.iter().find(|(t, _)| !(*t > 0.0)) {
        return Err(precondition(format!("sample time t = {t} must be positive")));
    }
    let ratios: Vec<f64> = grid
        .par_iter()
        .map(|&(t, r)| Ok(stable_kernel(t, r, params)? / envelope(t, r, params).min_form))
        .collect::<Result<_>>()?;
    let (mut lo, mut hi) = (0usize, 0usize);
    for (i, v) in ratios.iter().enumerate() {
        if *v < ratios[lo] {
            lo = i;
        }
        if *v > ratios[hi] {
            hi = i;
        }
    }
    Ok(EnvelopeConstants {
        c1_hat: ratios[lo],
        c1_at: grid[lo],
        c2_hat: ratios[hi],
        c2_at: grid[hi],
        samples: grid.len(),
    })
}

/// Tensor grid with `t` log-spaced on `[t_lo, t_hi]` and `r ∈ {0} ∪` log-spaced
/// `[r_lo, r_hi]`.
pub fn envelope_grid(t_range: (f64, f64), t_count: usize, r_range: (f64, f64), r_count: usize) -> Vec<(f64, f64)> {
    let ts = log_space(t_range.0, t_range.1, t_count);
    let mut rs = vec![0.0];
    rs.extend(log_space(r_range.0, r_range.1, r_count));
    ts.iter().flat_map(|&t| rs.iter().map(move |&r| (t, r))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub envelope: EnvelopePair,
}

/// Kernel values and envelopes on a tensor grid, in `t`-major order.
pub fn sample_table(params: KernelParams, t_grid: &[f64], r_grid: &[f64]) -> Result<Vec<KernelSample>> {
    let pairs: Vec<(f64, f64)> = t_grid.iter().flat_map(|&t| r_grid.iter().map(move |&r| (t, r))).collect();
    pairs
        .par_iter()
        .map(|&(t, r)| {
            Ok(KernelSample { t, r, p: stable_kernel(t, r, params)?, envelope: envelope(t, r, params) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p1(alpha: f64) -> KernelParams {
        KernelParams::new(alpha, 1).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_relative_eq!(closed_form_kernel(1.0, 0.0, p1(2.0)).unwrap(), 0.282_094_791_773_878_1, max_relative = 1e-14);
        assert_relative_eq!(closed_form_kernel(1.0, 0.0, p1(1.0)).unwrap(), 1.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(closed_form_kernel(2.0, 2.0, p1(1.0)).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-14);
        assert!(matches!(closed_form_kernel(1.0, 0.0, p1(1.5)), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn quadrature_at_origin_matches_gamma_identity() {
        // ∫₀^∞ e^{-ρ^a} dρ = Γ(1 + 1/a)
        let expected = gamma(1.0 + 1.0 / 1.5) / PI;
        assert_relative_eq!(expected, 0.287_353, max_relative = 2e-6);
        assert_relative_eq!(stable_kernel(1.0, 0.0, p1(1.5)).unwrap(), expected, max_relative = 1e-11);
    }

    #[test]
    fn quadrature_matches_gaussian() {
        let q = fourier_inversion(1.0, 3.0, 2.0).unwrap();
        let c = closed_form_kernel(1.0, 3.0, p1(2.0)).unwrap();
        assert_relative_eq!(q, c, max_relative = 1e-8);
    }

    #[test]
    fn self_similarity_example() {
        let a = 1.2;
        let s = 4f64.powf(-1.0 / a);
        let lhs = stable_kernel(4.0, 1.0, p1(a)).unwrap();
        let rhs = s * stable_kernel(1.0, s, p1(a)).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-8);
    }

    #[test]
    fn tail_series_reproduces_cauchy() {
        for (t, r) in [(1.0, 5.0), (0.01, 1.0), (2.0, 30.0)] {
            let v = tail_series(t, r, 1.0).unwrap();
            assert_relative_eq!(v, closed_form_kernel(t, r, p1(1.0)).unwrap(), max_relative = 1e-14);
        }
        assert!(tail_series(1.0, 0.5, 1.5).is_none());
    }

    #[test]
    fn tail_series_agrees_with_quadrature_where_both_work() {
        for alpha in [0.7, 1.2, 1.5, 1.8] {
            for x in [8.0, 12.0] {
                let Some(series) = tail_series(1.0, x, alpha) else { continue };
                let quad = fourier_inversion(1.0, x, alpha).unwrap();
                assert_relative_eq!(series, quad, max_relative = 1e-8);
            }
        }
        assert!(tail_series(1.0, 12.0, 1.5).is_some());
    }

    #[test]
    fn higher_dimension_needs_closed_form() {
        let p = KernelParams::new(1.5, 3).unwrap();
        assert!(stable_kernel(1.0, 1.0, p).is_err());
        let g = KernelParams::new(2.0, 3).unwrap();
        assert_relative_eq!(stable_kernel(1.0, 0.0, g).unwrap(), (4.0 * PI).powf(-1.5), max_relative = 1e-14);
    }

    #[test]
    fn envelope_examples() {
        let e = envelope(1.0, 0.0, p1(1.5));
        assert_eq!((e.min_form, e.sum_form), (1.0, 1.0));
        let e = envelope(1.0, 2.0, p1(1.5));
        assert_relative_eq!(e.min_form, 2f64.powf(-2.5), max_relative = 1e-14);
        assert_relative_eq!(e.min_form, 0.176_777, max_relative = 1e-5);
        let e = envelope(1.0, 1.0, p1(1.0));
        assert_relative_eq!(e.sum_form, 0.25, max_relative = 1e-15);
        assert_eq!(e.min_form, 1.0);
        assert_relative_eq!(e.ratio(), 4.0, max_relative = 1e-15);
    }

    #[test]
    fn envelope_constants_single_point_and_guards() {
        let c = estimate_envelope_constants(p1(1.5), &[(1.0, 0.0)]).unwrap();
        let p = stable_kernel(1.0, 0.0, p1(1.5)).unwrap();
        assert_eq!(c.c1_hat, p);
        assert_eq!(c.c2_hat, p);
        assert!(estimate_envelope_constants(p1(1.5), &[(0.0, 1.0)]).is_err());
        assert!(estimate_envelope_constants(p1(2.0), &[(1.0, 1.0)]).is_err());
        assert!(estimate_envelope_constants(p1(1.5), &[]).is_err());
    }

    #[test]
    fn cauchy_constants_within_analytic_bounds() {
        // For α = 1 the ratio p/min_form lies in [1/(2π), 1/π] exactly.
        let grid = envelope_grid((1e-2, 1e2), 9, (1e-2, 1e2), 9);
        let c = estimate_envelope_constants(p1(1.0), &grid).unwrap();
        assert!(c.c1_hat >= 1.0 / (4.0 * PI), "{c:?}");
        assert!(c.c2_hat <= 2.0 / PI, "{c:?}");
        assert!(c.c1_hat >= 1.0 / (2.0 * PI) * (1.0 - 1e-9));
        assert!(c.c2_hat <= 1.0 / PI * (1.0 + 1e-9));
    }

    #[test]
    fn heavy_tail_constants_are_finite_and_positive() {
        let grid = envelope_grid((1e-2, 1e2), 7, (1e-2, 1e2), 7);
        let c = estimate_envelope_constants(p1(1.5), &grid).unwrap();
        assert!(c.c1_hat > 0.0 && c.c1_hat <= c.c2_hat && c.c2_hat.is_finite(), "{c:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(KernelParams::new(0.0, 1).is_err());
        assert!(KernelParams::new(2.5, 1).is_err());
        assert!(KernelParams::new(1.0, 0).is_err());
        assert!(stable_kernel(-1.0, 0.0, p1(1.5)).is_err());
        assert!(stable_kernel(1.0, -1.0, p1(1.5)).is_err());
    }
}
