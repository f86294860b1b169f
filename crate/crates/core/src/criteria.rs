//! Finite-horizon tests for the existence / non-existence dichotomy.
//!
//! Every "limit" below is a trend read off a finite sample. The horizon
//! (`s_max`, default `1e12`) and the growth thresholds are part of the
//! verdict, and `Inconclusive` is a legitimate answer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::growth::GrowthFunction;
use crate::quad::{integrate, Tolerance};
use crate::special::linear_fit;

/// Per-decade growth factor that counts as unbounded growth.
pub const GROWTH_PER_DECADE: f64 = 1.05;
/// Lattice points per decade used by [`envelope_F`].
const ENVELOPE_POINTS_PER_DECADE: f64 = 64.0;
/// Lattice points per doubling in the limsup and small-s scans.
const SUBSTEPS: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DichotomyParams {
    pub q: f64,
    pub alpha: f64,
    pub d: u32,
    pub tau: f64,
    pub s_max: f64,
    pub k_max: usize,
}

impl DichotomyParams {
    pub fn new(q: f64, alpha: f64, d: u32) -> Result<Self> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(precondition(format!("q = {q} must be at least 1")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(precondition(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if d == 0 {
            return Err(precondition("dimension d must be at least 1"));
        }
        Ok(DichotomyParams { q, alpha, d, tau: 2.0, s_max: 1e12, k_max: 10_000 })
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !(tau > 1.0) {
            return Err(precondition(format!("tau = {tau} must exceed 1")));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn with_horizon(mut self, s_max: f64) -> Result<Self> {
        if !(s_max >= 1e4) || !s_max.is_finite() {
            return Err(precondition(format!("horizon s_max = {s_max} must be at least 1e4")));
        }
        self.s_max = s_max;
        Ok(self)
    }

    /// `1 + αq/d`.
    pub fn p_crit(&self) -> f64 {
        1.0 + self.alpha * self.q / self.d as f64
    }

    /// `1 + α/d`, the exponent of the `L¹` integral test.
    pub fn p_integral(&self) -> f64 {
        1.0 + self.alpha / self.d as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Ball,
    WholeSpace,
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(Domain::Ball),
            "whole_space" | "whole-space" | "wholespace" => Ok(Domain::WholeSpace),
            other => Err(Error::Config(format!("unknown domain `{other}` (expected ball or whole_space)"))),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Ball => "ball",
            Domain::WholeSpace => "whole_space",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    LocalExistence,
    NonExistence,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::LocalExistence => "local_existence",
            Verdict::NonExistence => "non_existence",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Trend {
    Finite { bound: f64 },
    Infinite,
    Inconclusive,
}

fn ratio_of(f: &GrowthFunction, s: f64, power: f64) -> f64 {
    (f.ln_value(s) - power * s.ln()).exp()
}

/// Golden-section maximisation of a unimodal-looking function on `[a, b]`.
fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if (b - a) <= 1e-13 * b {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// `F(s) = sup_{1 ≤ t ≤ s} f(t)/t`: running maximum over a log lattice from 1
/// to `s`, refined by golden section around the best lattice point.
#[allow(non_snake_case)]
pub fn envelope_F(f: &GrowthFunction, s: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(precondition(format!("envelope F needs s ≥ 1, got {s}")));
    }
    let g = |t: f64| ratio_of(f, t, 1.0);
    let steps = (ENVELOPE_POINTS_PER_DECADE * s.log10()).floor() as i64;
    let mut lattice: Vec<f64> = (0..=steps).map(|j| 10f64.powf(j as f64 / ENVELOPE_POINTS_PER_DECADE)).collect();
    if *lattice.last().unwrap() < s {
        lattice.push(s);
    }
    let values: Vec<f64> = lattice.iter().map(|&t| g(t)).collect();
    let (best, &top) = values.iter().enumerate().fold((0, &values[0]), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if lattice.len() == 1 {
        return Ok(top);
    }
    let lo = lattice[best.saturating_sub(1)];
    let hi = lattice[(best + 1).min(lattice.len() - 1)];
    Ok(top.max(golden_max(g, lo, hi)))
}

/// Lattice running maximum of `f(t)/t`, used as a fast `F` inside quadrature.
struct RunningEnvelope<'a> {
    f: &'a GrowthFunction,
    best: Vec<f64>,
}

impl<'a> RunningEnvelope<'a> {
    fn new(f: &'a GrowthFunction, s_max: f64) -> Self {
        let steps = (ENVELOPE_POINTS_PER_DECADE * s_max.log10()).ceil() as usize + 1;
        let mut best = Vec::with_capacity(steps + 1);
        let mut run = 0.0f64;
        for j in 0..=steps {
            run = run.max(ratio_of(f, 10f64.powf(j as f64 / ENVELOPE_POINTS_PER_DECADE), 1.0));
            best.push(run);
        }
        RunningEnvelope { f, best }
    }

    fn eval(&self, s: f64) -> f64 {
        let j = ((ENVELOPE_POINTS_PER_DECADE * s.log10()).floor().max(0.0) as usize).min(self.best.len() - 1);
        self.best[j].max(ratio_of(self.f, s, 1.0))
    }
}

fn decade_growth(running: impl Fn(f64) -> f64, anchor: f64, toward_zero: bool) -> Vec<f64> {
    (0..3)
        .map(|m| {
            let step = |k: i32| if toward_zero { anchor * 10f64.powi(k) } else { anchor / 10f64.powi(k) };
            let (near, far) = (running(step(m + 1)), running(step(m)));
            if near == 0.0 {
                if far == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                far / near
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimsupReport {
    pub trend: Trend,
    /// `(s*, g(s*))` maximising `g(s) = s^{−p_crit} f(s)` on the scan.
    pub witness: (f64, f64),
    /// Running-sup growth over the last three decades, latest first.
    pub decade_growth: Vec<f64>,
}

/// Trend of `g(s) = s^{−p_crit} f(s)` on the lattice `2^{j/8}` over `[1, s_max]`.
pub fn limsup_power_test(f: &GrowthFunction, params: &DichotomyParams) -> LimsupReport {
    let p = params.p_crit();
    let top = (SUBSTEPS as f64 * params.s_max.log2()).floor() as i32;
    let s: Vec<f64> = (0..=top).map(|j| 2f64.powf(j as f64 / SUBSTEPS as f64)).collect();
    let g: Vec<f64> = s.iter().map(|&x| ratio_of(f, x, p)).collect();
    let mut running = Vec::with_capacity(g.len());
    let mut witness = (s[0], g[0]);
    for (x, v) in s.iter().zip(&g) {
        if *v > witness.1 {
            witness = (*x, *v);
        }
        running.push(witness.1);
    }
    let sup_below = |x: f64| {
        let k = s.partition_point(|y| *y <= x * (1.0 + 1e-12));
        running[k.max(1) - 1]
    };
    let growth = decade_growth(sup_below, params.s_max, false);
    let trend = if growth.iter().all(|r| *r >= GROWTH_PER_DECADE) {
        Trend::Infinite
    } else {
        let from = s.partition_point(|y| *y < params.s_max / 1e3);
        let tail = &g[from..];
        let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] * 1.01);
        let non_decreasing = tail.windows(2).all(|w| w[1] >= w[0] * 0.99);
        if non_increasing || non_decreasing {
            Trend::Finite { bound: witness.1 }
        } else {
            Trend::Inconclusive
        }
    };
    LimsupReport { trend, witness, decade_growth: growth }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IntegralTrend {
    Convergent { value: f64, tail: f64 },
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OsgoodReport {
    pub trend: IntegralTrend,
    /// `∫_{2^j}^{2^{j+1}} s^{−p} F(s) ds` for each dyadic block below `s_max`.
    pub block_sums: Vec<f64>,
    /// Sum of all block integrals (the integral up to the last block edge).
    pub partial: f64,
}

/// `∫_1^∞ s^{−(1+α/d)} F(s) ds` by dyadic blocks up to `s_max`.
///
/// Convergent when the last five blocks shrink geometrically (ratio ≤ 0.95)
/// or, failing that, when the block sums decay at least like `j^{−3/2}` in the
/// block index (the signature of logarithmic damping); divergent when they
/// are non-decreasing; inconclusive otherwise.
pub fn osgood_integral_test(f: &GrowthFunction, params: &DichotomyParams) -> OsgoodReport {
    let p = params.p_integral();
    let env = RunningEnvelope::new(f, params.s_max);
    let blocks = params.s_max.log2().floor() as i32;
    let tol = Tolerance { abs: 0.0, rel: 1e-11, max_intervals: 200_000 };
    let block_sums: Vec<f64> = (0..blocks)
        .map(|j| {
            let (a, b) = (2f64.powi(j), 2f64.powi(j + 1));
            integrate(|s: f64| s.powf(-p) * env.eval(s), a, b, 4, tol).map(|r| r.value).unwrap_or(f64::NAN)
        })
        .collect();
    let partial: f64 = block_sums.iter().sum();
    let trend = integral_trend(&block_sums);
    OsgoodReport { trend, block_sums, partial }
}

fn integral_trend(b: &[f64]) -> IntegralTrend {
    let n = b.len();
    let total: f64 = b.iter().sum();
    if b.iter().any(|v| !v.is_finite()) || n < 10 {
        return IntegralTrend::Inconclusive;
    }
    if b.iter().all(|v| *v == 0.0) {
        return IntegralTrend::Convergent { value: 0.0, tail: 0.0 };
    }
    let last = &b[n - 5..];
    let ratios: Vec<f64> = last.windows(2).map(|w| w[1] / w[0]).collect();
    if ratios.iter().all(|r| *r <= 0.95) {
        let rho = ratios.iter().copied().fold(0.0, f64::max);
        let tail = b[n - 1] * rho / (1.0 - rho);
        return IntegralTrend::Convergent { value: total + tail, tail };
    }
    if last.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)) {
        return IntegralTrend::Divergent;
    }
    let window = &b[n - 10..];
    if window.iter().all(|v| *v > 0.0) {
        let x: Vec<f64> = (n - 10..n).map(|j| ((j + 1) as f64).ln()).collect();
        let y: Vec<f64> = window.iter().map(|v| v.ln()).collect();
        let (kappa, c) = linear_fit(&x, &y);
        let residual = x.iter().zip(&y).map(|(xi, yi)| (yi - (c + kappa * xi)).abs()).fold(0.0, f64::max);
        if kappa <= -1.5 && residual <= 0.05 {
            let tail = b[n - 1] * n as f64 / (-kappa - 1.0);
            return IntegralTrend::Convergent { value: total + tail, tail };
        }
    }
    IntegralTrend::Inconclusive
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceWitness {
    pub sequence: Vec<f64>,
    /// `s_k^{−p} f(s_k)`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Partial-sum growth over the last three decades of `s`, latest first.
    pub decade_growth: Vec<f64>,
    pub found: bool,
}

/// Greedy `τ`-geometric sequence: `s_1` maximises `s^{−p} f(s)` on `[1, τ]`,
/// then each `s_{k+1}` maximises it on `[τ s_k, τ² s_k]`, over the lattice
/// `τ^{j/8}`. A witness of divergence is declared when the partial sums grow
/// by at least 5% per decade over the last three decades below `s_max`.
pub fn geometric_sequence_witness(f: &GrowthFunction, params: &DichotomyParams) -> SequenceWitness {
    let p = params.p_integral();
    let sub = SUBSTEPS as i64;
    let lattice = |j: i64| params.tau.powf(j as f64 / sub as f64);
    let term = |j: i64| ratio_of(f, lattice(j), p);
    let pick = |lo: i64, hi: i64| -> i64 {
        let mut best = lo;
        let mut best_val = term(lo);
        for j in lo + 1..=hi {
            let v = term(j);
            if v > best_val {
                best = j;
                best_val = v;
            }
        }
        best
    };
    let mut sequence = Vec::new();
    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut j = pick(0, sub);
    let mut acc = 0.0;
    while lattice(j) <= params.s_max && sequence.len() < params.k_max {
        let t = term(j);
        acc += t;
        sequence.push(lattice(j));
        terms.push(t);
        partial_sums.push(acc);
        j = pick(j + sub, j + 2 * sub);
    }
    let horizon = sequence.last().copied().unwrap_or(1.0).min(params.s_max);
    let sum_below = |x: f64| {
        let k = sequence.partition_point(|s| *s <= x * (1.0 + 1e-12));
        if k == 0 {
            0.0
        } else {
            partial_sums[k - 1]
        }
    };
    let growth = decade_growth(sum_below, horizon, false);
    let found = growth.iter().all(|r| *r >= GROWTH_PER_DECADE);
    SequenceWitness { sequence, terms, partial_sums, decade_growth: growth, found }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub integral: OsgoodReport,
    pub sequence: SequenceWitness,
    /// Divergent integral ⇔ sequence witness, on the numeric horizon.
    pub pass: bool,
}

pub fn equivalence_check(f: &GrowthFunction, params: &DichotomyParams) -> EquivalenceReport {
    let integral = osgood_integral_test(f, params);
    let sequence = geometric_sequence_witness(f, params);
    let divergent = matches!(integral.trend, IntegralTrend::Divergent);
    let pass = divergent == sequence.found;
    EquivalenceReport { integral, sequence, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSReport {
    pub trend: Trend,
    /// `(s*, f(s*)/s*)` where the running sup of `f(s)/s` was attained.
    pub witness: (f64, f64),
    pub decade_growth: Vec<f64>,
}

/// Trend of `f(s)/s` on the lattice `2^{−j/8}` from 1 down to `1e-12`.
pub fn small_s_test(f: &GrowthFunction) -> SmallSReport {
    let floor: f64 = 1e-12;
    let bottom = (SUBSTEPS as f64 * (1.0 / floor).log2()).ceil() as i32;
    let s: Vec<f64> = (0..=bottom).map(|j| 2f64.powf(-j as f64 / SUBSTEPS as f64)).collect();
    let mut witness = (s[0], f.eval(s[0]) / s[0]);
    let mut running = Vec::with_capacity(s.len());
    for &x in &s {
        let v = f.eval(x) / x;
        if v > witness.1 {
            witness = (x, v);
        }
        running.push(witness.1);
    }
    let sup_above = |x: f64| {
        let k = s.partition_point(|y| *y >= x * (1.0 - 1e-12));
        running[k.max(1) - 1]
    };
    let growth = decade_growth(sup_above, floor, true);
    let trend = if growth.iter().all(|r| *r >= GROWTH_PER_DECADE) {
        Trend::Infinite
    } else {
        Trend::Finite { bound: witness.1 }
    };
    SmallSReport { trend, witness, decade_growth: growth }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyVerdict {
    pub verdict: Verdict,
    pub domain: Domain,
    pub params: DichotomyParams,
    pub limsup: Option<LimsupReport>,
    pub integral: Option<OsgoodReport>,
    pub sequence: Option<SequenceWitness>,
    pub small_s: Option<SmallSReport>,
    pub notes: Vec<String>,
}

/// Applies the decision table: on the ball the large-`s` test is the limsup
/// test for `q > 1` and the integral test for `q = 1`; on the whole space the
/// small-`s` test is added. Any sub-test showing non-existence decides the
/// verdict; otherwise any inconclusive sub-test makes it inconclusive.
pub fn classify(f: &GrowthFunction, params: &DichotomyParams, domain: Domain) -> Result<DichotomyVerdict> {
    if !(params.alpha > 1.0 && params.alpha <= 2.0) {
        return Err(Error::OutsideHypotheses(format!("alpha = {} is outside (1, 2]", params.alpha)));
    }
    let mut notes = Vec::new();
    let mut outcomes = Vec::new();
    let (mut limsup, mut integral, mut sequence) = (None, None, None);
    if params.q > 1.0 {
        let report = limsup_power_test(f, params);
        outcomes.push(match report.trend {
            Trend::Finite { .. } => Verdict::LocalExistence,
            Trend::Infinite => Verdict::NonExistence,
            Trend::Inconclusive => Verdict::Inconclusive,
        });
        notes.push(format!("limsup test with p_crit = {}", params.p_crit()));
        limsup = Some(report);
    } else {
        let report = osgood_integral_test(f, params);
        outcomes.push(match report.trend {
            IntegralTrend::Convergent { .. } => Verdict::LocalExistence,
            IntegralTrend::Divergent => Verdict::NonExistence,
            IntegralTrend::Inconclusive => Verdict::Inconclusive,
        });
        notes.push(format!("integral test with exponent {}", params.p_integral()));
        integral = Some(report);
        sequence = Some(geometric_sequence_witness(f, params));
    }
    let mut small_s = None;
    if domain == Domain::WholeSpace {
        let report = small_s_test(f);
        outcomes.push(match report.trend {
            Trend::Infinite => Verdict::NonExistence,
            _ => Verdict::LocalExistence,
        });
        notes.push("small-s test f(s)/s as s -> 0".to_string());
        small_s = Some(report);
    }
    let verdict = if outcomes.contains(&Verdict::NonExistence) {
        Verdict::NonExistence
    } else if outcomes.contains(&Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::LocalExistence
    };
    Ok(DichotomyVerdict { verdict, domain, params: *params, limsup, integral, sequence, small_s, notes })
}

/// Closed-form ball verdict for `f(s) = s^p`: `q > 1` exists iff
/// `p ≤ 1 + αq/d`; `q = 1` exists iff `p < 1 + α/d`.
pub fn power_rule(p: f64, params: &DichotomyParams) -> Verdict {
    let exists = if params.q > 1.0 { p <= params.p_crit() } else { p < params.p_integral() };
    if exists {
        Verdict::LocalExistence
    } else {
        Verdict::NonExistence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
    pub expected: Verdict,
    pub observed: Verdict,
}

pub const SWEEP_POWERS: [f64; 5] = [1.5, 2.0, 3.0, 4.0, 6.0];
pub const SWEEP_ALPHAS: [f64; 5] = [1.1, 1.3, 1.5, 1.7, 2.0];
pub const SWEEP_QS: [f64; 3] = [1.0, 2.0, 3.0];

/// Classifies `s^p` on the ball over the 5×5×3 grid of `(p, α, q)` with `d = 1`.
pub fn power_sweep() -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &q in &SWEEP_QS {
        for &alpha in &SWEEP_ALPHAS {
            let params = DichotomyParams::new(q, alpha, 1)?;
            for &p in &SWEEP_POWERS {
                let observed = classify(&GrowthFunction::power(p), &params, Domain::Ball)?.verdict;
                rows.push(SweepRow { p, alpha, q, expected: power_rule(p, &params), observed });
            }
        }
    }
    Ok(rows)
}

/// Twelve power-log nonlinearities around the `L¹` threshold `p = 2.5`
/// (`α = 1.5`, `d = 1`), on both sides of it.
pub fn builtin_corpus() -> Vec<GrowthFunction> {
    [
        (2.5, 0.0),
        (2.5, -2.0),
        (0.0, 0.0),
        (1.0, 0.0),
        (2.0, 0.0),
        (3.0, 0.0),
        (2.5, 1.0),
        (2.5, -3.0),
        (2.2, 0.0),
        (4.0, 0.0),
        (1.5, 2.0),
        (2.5, 2.0),
    ]
    .iter()
    .map(|&(p, gamma)| GrowthFunction::PowerLog { a: 1.0, p, gamma })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(q: f64) -> DichotomyParams {
        DichotomyParams::new(q, 1.5, 1).unwrap()
    }

    #[test]
    fn envelope_examples() {
        let sq = GrowthFunction::power(2.0);
        assert_relative_eq!(envelope_F(&sq, 37.5).unwrap(), 37.5, max_relative = 1e-12);
        let one = GrowthFunction::power(0.0);
        assert_relative_eq!(envelope_F(&one, 1e6).unwrap(), 1.0, max_relative = 1e-14);
        let damped = GrowthFunction::PowerLog { a: 1.0, p: 1.0, gamma: -1.0 };
        assert_relative_eq!(envelope_F(&damped, 500.0).unwrap(), 1.0 / (1.0 + 2f64.ln()), max_relative = 1e-12);
        assert!(envelope_F(&sq, 0.5).is_err());
    }

    #[test]
    fn envelope_finds_interior_maximum() {
        // f(t)/t = t^{0.5}(1+ln(1+t))^{-3} peaks inside (1, ∞).
        let f = GrowthFunction::PowerLog { a: 1.0, p: 1.5, gamma: -3.0 };
        let g = |t: f64| f.eval(t) / t;
        let brute = (0..200_000).map(|i| g(1.0 + i as f64 * 1e-3)).fold(0.0, f64::max);
        assert_relative_eq!(envelope_F(&f, 200.0).unwrap(), brute, max_relative = 1e-8);
    }

    #[test]
    fn limsup_examples() {
        let p = DichotomyParams::new(2.0, 1.5, 1).unwrap();
        let r = limsup_power_test(&GrowthFunction::power(3.0), &p);
        assert!(matches!(r.trend, Trend::Finite { .. }));
        assert_relative_eq!(r.witness.0, 1.0);
        assert!(matches!(limsup_power_test(&GrowthFunction::power(5.0), &p).trend, Trend::Infinite));
        match limsup_power_test(&GrowthFunction::power(4.0), &p).trend {
            Trend::Finite { bound } => assert_relative_eq!(bound, 1.0, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn osgood_examples() {
        let p = params(1.0);
        assert_eq!(osgood_integral_test(&GrowthFunction::power(2.5), &p).trend, IntegralTrend::Divergent);
        let damped = GrowthFunction::PowerLog { a: 1.0, p: 2.5, gamma: -2.0 };
        assert!(matches!(osgood_integral_test(&damped, &p).trend, IntegralTrend::Convergent { .. }));
        match osgood_integral_test(&GrowthFunction::power(0.0), &p).trend {
            IntegralTrend::Convergent { value, .. } => assert!((value - 2.0 / 3.0).abs() < 1e-6, "{value}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sequence_examples() {
        let p = params(1.0);
        let w = geometric_sequence_witness(&GrowthFunction::power(2.5), &p);
        assert!(w.found);
        assert!(w.terms.iter().all(|t| (t - 1.0).abs() < 1e-12));
        assert_relative_eq!(*w.partial_sums.last().unwrap(), w.terms.len() as f64, max_relative = 1e-12);
        assert!(w.sequence.windows(2).all(|s| s[1] >= 2.0 * s[0] * (1.0 - 1e-12)));
        assert!(!geometric_sequence_witness(&GrowthFunction::power(1.0), &p).found);
        assert!(!geometric_sequence_witness(&GrowthFunction::power(0.0), &p).found);
    }

    #[test]
    fn small_s_examples() {
        assert!(matches!(small_s_test(&GrowthFunction::power(2.0)).trend, Trend::Finite { .. }));
        assert_eq!(small_s_test(&GrowthFunction::power(0.5)).trend, Trend::Infinite);
        match small_s_test(&GrowthFunction::power(1.0)).trend {
            Trend::Finite { bound } => assert_relative_eq!(bound, 1.0, max_relative = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_examples() {
        let v = classify(&GrowthFunction::power(3.0), &params(2.0), Domain::Ball).unwrap();
        assert_eq!(v.verdict, Verdict::LocalExistence);
        let v = classify(&GrowthFunction::power(2.5), &params(1.0), Domain::Ball).unwrap();
        assert_eq!(v.verdict, Verdict::NonExistence);
        let f = GrowthFunction::parse("powerlog:1,0.5,0+powerlog:1,2,0").unwrap();
        let v = classify(&f, &params(2.0), Domain::WholeSpace).unwrap();
        assert_eq!(v.verdict, Verdict::NonExistence);
        assert_eq!(v.small_s.unwrap().trend, Trend::Infinite);
        let low = DichotomyParams::new(2.0, 0.5, 1).unwrap();
        assert!(matches!(classify(&f, &low, Domain::Ball), Err(Error::OutsideHypotheses(_))));
    }

    #[test]
    fn equivalence_on_corpus() {
        let p = params(1.0);
        for f in builtin_corpus() {
            let r = equivalence_check(&f, &p);
            assert!(r.pass, "{}: {:?} vs found = {}", f.spec_string(), r.integral.trend, r.sequence.found);
            assert!(!matches!(r.integral.trend, IntegralTrend::Inconclusive), "{}", f.spec_string());
        }
    }

    #[test]
    fn sweep_matches_power_rule() {
        let rows = power_sweep().unwrap();
        assert_eq!(rows.len(), 75);
        let bad: Vec<&SweepRow> = rows.iter().filter(|r| r.expected != r.observed).collect();
        assert!(bad.is_empty(), "{bad:?}");
    }
}
