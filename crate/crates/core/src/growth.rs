//! Nonlinearities `f: [0, ∞) → [0, ∞)`, continuous and non-decreasing.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::special::{linear_fit, log_space};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GrowthFunction {
    /// `a s^p (1 + ln(1+s))^γ`.
    PowerLog { a: f64, p: f64, gamma: f64 },
    /// Monotone samples, linearly interpolated; power laws fitted to the
    /// first two knots below and to the last two decades above.
    Table { knots: Vec<(f64, f64)>, low_exponent: f64, high_exponent: f64 },
    Sum(Vec<GrowthFunction>),
    Zero,
}

impl GrowthFunction {
    pub fn power_log(a: f64, p: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0) || !(p >= 0.0) || !gamma.is_finite() || !a.is_finite() || !p.is_finite() {
            return Err(precondition(format!("powerlog needs a > 0, p ≥ 0 (got a = {a}, p = {p}, gamma = {gamma})")));
        }
        let f = GrowthFunction::PowerLog { a, p, gamma };
        f.check_monotone()?;
        Ok(f)
    }

    /// `s^p`.
    pub fn power(p: f64) -> Self {
        GrowthFunction::PowerLog { a: 1.0, p, gamma: 0.0 }
    }

    pub fn sum(parts: Vec<GrowthFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Ok(GrowthFunction::Zero);
        }
        let f = GrowthFunction::Sum(parts);
        f.check_monotone()?;
        Ok(f)
    }

    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(precondition("a growth table needs at least two knots"));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(precondition(format!("table knots must be strictly increasing (repeated s = {})", w[0].0)));
            }
            if w[1].1 < w[0].1 {
                return Err(precondition(format!("table values decrease between s = {} and s = {}", w[0].0, w[1].0)));
            }
        }
        if let Some((s, v)) = knots.iter().find(|(s, v)| !(*s >= 0.0) || !(*v >= 0.0) || !s.is_finite() || !v.is_finite()) {
            return Err(precondition(format!("table entry ({s}, {v}) must be finite and non-negative")));
        }
        let (s0, v0) = knots[0];
        let (s1, v1) = knots[1];
        let low_exponent = if s0 > 0.0 && v0 > 0.0 { ((v1 / v0).ln() / (s1 / s0).ln()).max(0.0) } else { 0.0 };
        let s_last = knots[knots.len() - 1].0;
        let tail: Vec<&(f64, f64)> = knots.iter().filter(|(s, v)| *s >= s_last / 100.0 && *s > 0.0 && *v > 0.0).collect();
        let high_exponent = if tail.len() >= 2 {
            let x: Vec<f64> = tail.iter().map(|(s, _)| s.ln()).collect();
            let y: Vec<f64> = tail.iter().map(|(_, v)| v.ln()).collect();
            linear_fit(&x, &y).0.max(0.0)
        } else {
            0.0
        };
        let f = GrowthFunction::Table { knots, low_exponent, high_exponent };
        f.check_monotone()?;
        Ok(f)
    }

    /// Reads a two-column `s,f` CSV (header optional).
    pub fn table_from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut knots = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cols.as_slice() {
                [s, v] => s.parse::<f64>().ok().zip(v.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(k) => knots.push(k),
                None if lineno == 0 => continue,
                None => {
                    return Err(Error::Config(format!("{}: line {} is not an `s,f` pair", path.display(), lineno + 1)))
                }
            }
        }
        Self::table(knots)
    }

    /// Parses `powerlog:a,p,gamma`, `zero`, `table:<csv path>`, or a
    /// `+`-separated sum of those.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            return Self::sum(parts.iter().map(|p| Self::parse_term(p)).collect::<Result<Vec<_>>>()?);
        }
        Self::parse_term(parts[0])
    }

    fn parse_term(term: &str) -> Result<Self> {
        if term == "zero" {
            return Ok(GrowthFunction::Zero);
        }
        if let Some(path) = term.strip_prefix("table:") {
            return Self::table_from_csv(Path::new(path));
        }
        if let Some(body) = term.strip_prefix("knots:") {
            let knots = body
                .split(';')
                .map(|pair| {
                    let (s, v) = pair.split_once(':')?;
                    Some((s.trim().parse::<f64>().ok()?, v.trim().parse::<f64>().ok()?))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Config(format!("bad knot list in `{term}`")))?;
            return Self::table(knots);
        }
        let body = term
            .strip_prefix("powerlog:")
            .ok_or_else(|| Error::Config(format!("unrecognised nonlinearity `{term}`")))?;
        let nums: Vec<f64> = body
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("bad number in `{term}`: {e}")))?;
        match nums.as_slice() {
            [a, p, gamma] => Self::power_log(*a, *p, *gamma),
            _ => Err(Error::Config(format!("`{term}` needs exactly three numbers a,p,gamma"))),
        }
    }

    /// Inverse of [`GrowthFunction::parse`] for the expression forms; tables
    /// render their knots inline as `knots:s1:f1;s2:f2;…`.
    pub fn spec_string(&self) -> String {
        match self {
            GrowthFunction::PowerLog { a, p, gamma } => format!("powerlog:{a},{p},{gamma}"),
            GrowthFunction::Table { knots, .. } => {
                let body: Vec<String> = knots.iter().map(|(s, v)| format!("{s}:{v}")).collect();
                format!("knots:{}", body.join(";"))
            }
            GrowthFunction::Sum(parts) => parts.iter().map(|p| p.spec_string()).collect::<Vec<_>>().join("+"),
            GrowthFunction::Zero => "zero".to_string(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            GrowthFunction::PowerLog { a, p, gamma } => {
                let power = if *p == 0.0 { 1.0 } else { s.powf(*p) };
                let log = if *gamma == 0.0 { 1.0 } else { (1.0 + s.ln_1p()).powf(*gamma) };
                a * power * log
            }
            GrowthFunction::Table { knots, low_exponent, high_exponent } => {
                let (s0, v0) = knots[0];
                let (sl, vl) = knots[knots.len() - 1];
                if s <= s0 {
                    if s0 > 0.0 && s > 0.0 {
                        v0 * (s / s0).powf(*low_exponent)
                    } else {
                        v0 * if *low_exponent > 0.0 && s <= 0.0 { 0.0 } else { 1.0 }
                    }
                } else if s >= sl {
                    vl * (s / sl).powf(*high_exponent)
                } else {
                    let j = knots.partition_point(|(x, _)| *x <= s);
                    let (xa, ya) = knots[j - 1];
                    let (xb, yb) = knots[j];
                    ya + (yb - ya) * (s - xa) / (xb - xa)
                }
            }
            GrowthFunction::Sum(parts) => parts.iter().map(|p| p.eval(s)).sum(),
            GrowthFunction::Zero => 0.0,
        }
    }

    /// `ln f(s)`, accurate where `f(s)` itself would overflow.
    pub fn ln_value(&self, s: f64) -> f64 {
        match self {
            GrowthFunction::PowerLog { a, p, gamma } => {
                let power = if *p == 0.0 { 0.0 } else { p * s.ln() };
                let log = if *gamma == 0.0 { 0.0 } else { gamma * s.ln_1p().ln_1p() };
                a.ln() + power + log
            }
            GrowthFunction::Table { knots, high_exponent, .. } => {
                let (sl, vl) = knots[knots.len() - 1];
                if s > sl {
                    vl.ln() + high_exponent * (s / sl).ln()
                } else {
                    self.eval(s).ln()
                }
            }
            GrowthFunction::Sum(parts) => {
                let logs: Vec<f64> = parts.iter().map(|p| p.ln_value(s)).collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top == f64::NEG_INFINITY {
                    return top;
                }
                top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
            }
            GrowthFunction::Zero => f64::NEG_INFINITY,
        }
    }

    /// `c·f`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            GrowthFunction::PowerLog { a, p, gamma } => GrowthFunction::PowerLog { a: a * c, p: *p, gamma: *gamma },
            GrowthFunction::Table { knots, low_exponent, high_exponent } => GrowthFunction::Table {
                knots: knots.iter().map(|(s, v)| (*s, v * c)).collect(),
                low_exponent: *low_exponent,
                high_exponent: *high_exponent,
            },
            GrowthFunction::Sum(parts) => GrowthFunction::Sum(parts.iter().map(|p| p.scaled(c)).collect()),
            GrowthFunction::Zero => GrowthFunction::Zero,
        }
    }

    /// Checks `f ≥ 0` and non-decreasing on a 1000-point log grid over
    /// `[1e-12, 1e12]` plus `s = 0`.
    pub fn check_monotone(&self) -> Result<()> {
        let mut prev = (0.0, self.eval(0.0));
        if !(prev.1 >= 0.0) {
            return Err(precondition(format!("f(0) = {} is negative", prev.1)));
        }
        for s in log_space(1e-12, 1e12, 1000) {
            let v = self.eval(s);
            if !(v >= 0.0) || v < prev.1 * (1.0 - 1e-12) {
                return Err(precondition(format!(
                    "f is not non-decreasing: f({}) = {} > f({s}) = {v}",
                    prev.0, prev.1
                )));
            }
            prev = (s, v);
        }
        Ok(())
    }
}
