//! Fourier-spectral semigroup on the torus `[−L, L)`, used as a stand-in for
//! the whole line.
//!
//! Mode `k` carries the symbol `−|πk/L|^α`. The mean is split off before the
//! transform and propagated separately, so constant fields are invariant
//! bit for bit.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::engine::{Multiplier, SpectralEngine};
use crate::error::{precondition, Result};
use crate::mesh::{Mesh, TorusGrid};

#[derive(Clone)]
pub struct PeriodicOperator {
    grid: TorusGrid,
    alpha: f64,
    /// Generator eigenvalue of each FFT bin, in FFT order.
    symbol: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicOperator").field("grid", &self.grid).field("alpha", &self.alpha).finish()
    }
}

impl PeriodicOperator {
    pub fn assemble(grid: TorusGrid, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(precondition(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        let m = grid.len();
        let base = std::f64::consts::PI / grid.half_period();
        let symbol = (0..m)
            .map(|j| {
                let k = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                -(base * k.abs()).powf(alpha)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        Ok(PeriodicOperator { grid, alpha, symbol, forward, inverse })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn assemble_periodic(modes: usize, half_period: f64, alpha: f64) -> Result<PeriodicOperator> {
    PeriodicOperator::assemble(TorusGrid::new(half_period, modes)?, alpha)
}

impl SpectralEngine for PeriodicOperator {
    fn mesh(&self) -> Mesh {
        Mesh::Torus(self.grid)
    }

    fn spectrum(&self) -> &[f64] {
        &self.symbol
    }

    fn combine(&self, terms: &[(&[f64], Multiplier<'_>)]) -> Vec<f64> {
        let m = self.grid.len();
        let mut mean_part = 0.0;
        let mut acc = vec![Complex::new(0.0, 0.0); m];
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        for (values, g) in terms {
            let mean = values.iter().sum::<f64>() / m as f64;
            mean_part += g(0.0) * mean;
            for (b, v) in buf.iter_mut().zip(values.iter()) {
                *b = Complex::new(v - mean, 0.0);
            }
            if buf.iter().all(|c| c.re == 0.0) {
                continue;
            }
            self.forward.process(&mut buf);
            for ((a, b), lambda) in acc.iter_mut().zip(&buf).zip(&self.symbol) {
                *a += b * g(*lambda);
            }
        }
        if acc.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            return vec![mean_part; m];
        }
        // The fluctuation has zero mean; drop the roundoff left in bin 0.
        acc[0] = Complex::new(0.0, 0.0);
        self.inverse.process(&mut acc);
        let scale = 1.0 / m as f64;
        acc.iter().map(|c| mean_part + c.re * scale).collect()
    }

    /// Spectral truncation is not positivity preserving at the node level;
    /// small negative excursions are left in place so the mean is untouched.
    fn settle_sign(&self, _values: &mut [f64]) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Field;

    #[test]
    fn constants_are_invariant() {
        let op = assemble_periodic(64, 10.0, 1.5).unwrap();
        let ones = Field::from_fn(op.grid(), |_| 1.0);
        for t in [1e-3, 1.0, 100.0] {
            assert_eq!(op.propagate(t, &ones).unwrap(), ones);
        }
    }

    #[test]
    fn mean_is_preserved() {
        let op = assemble_periodic(128, 5.0, 1.3).unwrap();
        let u = Field::from_fn(op.grid(), |x| (-(x - 1.0).powi(2)).exp() + 0.3 * (x.sin()).abs());
        let mean = |f: &Field| f.values.iter().sum::<f64>() / f.len() as f64;
        let out = op.propagate(0.7, &u).unwrap();
        assert!((mean(&out) - mean(&u)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_bump_spreads_like_heat_kernel() {
        let op = assemble_periodic(512, 20.0, 2.0).unwrap();
        let s2 = 0.5;
        let u = Field::from_fn(op.grid(), |x| (-x * x / (2.0 * s2)).exp());
        let t = 0.3;
        let out = op.propagate(t, &u).unwrap();
        let var = s2 + 2.0 * t;
        for (x, v) in op.grid().nodes().iter().zip(&out.values) {
            let exact = (s2 / var).sqrt() * (-x * x / (2.0 * var)).exp();
            assert!((v - exact).abs() < 1e-6, "x = {x}: {v} vs {exact}");
        }
    }

    #[test]
    fn odd_mode_count_rejected() {
        assert!(assemble_periodic(63, 1.0, 1.5).is_err());
        assert!(assemble_periodic(64, 1.0, 2.5).is_err());
    }
}
