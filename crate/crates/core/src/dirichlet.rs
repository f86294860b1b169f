//! Restricted (exterior-zero) fractional Laplacian on `(−R, R)` and its
//! semigroup via a dense symmetric eigendecomposition.
//!
//! The generator approximates
//! `Δ^{α/2}u(x) = C(1,α) ∫₀^∞ (u(x+z) + u(x−z) − 2u(x)) z^{−1−α} dz`
//! with `u ≡ 0` outside the interval. On `[0, h]` the integrand is replaced by
//! its Taylor expansion with a second difference for `u''`; on `[h, ∞)` the
//! symmetric difference is interpolated linearly between nodes, giving
//! hat-function weights `W_k`. The result is a symmetric Toeplitz matrix with
//! positive off-diagonals and a constant diagonal `−2C h^{−α}/α − 2s`.

mod verify;

pub use verify::{
    empirical_constants, semigroup_report, verify_indicator_lower_bound, verify_mass_lower_bound, verify_smoothing,
    verify_support_lower_bound, EmpiricalConstants, LowerBoundWitness, SemigroupRow, SmoothingFit,
};

use faer::{ColRef, Mat, MatRef, Side};

use crate::engine::{Multiplier, SpectralEngine};
use crate::error::{precondition, Error, Result};
use crate::mesh::{Field, Grid1D, Mesh};
use crate::special::{fractional_laplacian_constant, gauss_legendre};

/// Values above this (but below zero) are treated as roundoff and clamped.
/// Fields larger than one scale it by their sup norm.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-12;

#[derive(Debug, Clone)]
pub struct DirichletOperator {
    grid: Grid1D,
    alpha: f64,
    matrix: Mat<f64>,
    /// Ascending, so the last entry is `−λ₁`.
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

/// Hat-function weights `W_k = ∫ hat_k(z) z^{−1−α} dz` for `k = 1..=count`,
/// where `hat_1` keeps only its falling half on `[h, 2h]`.
fn hat_weights(alpha: f64, h: f64, count: usize) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(16);
    let piece = |lo: f64, hi: f64, rising: bool| -> f64 {
        let (c, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| {
                let z = c + half * x;
                let hat = if rising { (z - lo) / h } else { (hi - z) / h };
                w * hat * z.powf(-1.0 - alpha)
            })
            .sum::<f64>()
            * half
    };
    (1..=count)
        .map(|k| {
            let z = k as f64 * h;
            let falling = piece(z, z + h, false);
            if k == 1 {
                falling
            } else {
                piece(z - h, z, true) + falling
            }
        })
        .collect()
}

impl DirichletOperator {
    pub fn assemble(grid: Grid1D, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(precondition(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        let n = grid.len();
        let h = grid.spacing();
        let (diag, off): (f64, Vec<f64>) = if alpha == 2.0 {
            let mut off = vec![0.0; n];
            off[1] = 1.0 / (h * h);
            (-2.0 / (h * h), off)
        } else {
            let c = fractional_laplacian_constant(alpha);
            let s = c * h.powf(-alpha) / (2.0 - alpha);
            let w = hat_weights(alpha, h, n.saturating_sub(1));
            let mut off = vec![0.0; n];
            for k in 1..n {
                off[k] = c * w[k - 1];
            }
            off[1] += s;
            (-2.0 * c * h.powf(-alpha) / alpha - 2.0 * s, off)
        };
        let matrix = Mat::from_fn(n, n, |i, j| if i == j { diag } else { off[i.abs_diff(j)] });
        let evd = matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}; {}", condition_report(diag, &off))))?;
        let eigenvalues: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
        if eigenvalues.iter().any(|l| !(*l < 0.0)) {
            return Err(Error::Eigen(format!(
                "non-negative eigenvalue {:e}; {}",
                eigenvalues[n - 1],
                condition_report(diag, &off)
            )));
        }
        let eigenvectors = evd.U().to_owned();
        Ok(DirichletOperator { grid, alpha, matrix, eigenvalues, eigenvectors })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    /// Eigenvalues of the generator, ascending (`−λ_N ≤ … ≤ −λ₁ < 0`).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Smallest Dirichlet eigenvalue `λ₁` of `−A`.
    pub fn lambda1(&self) -> f64 {
        -self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Orthonormal eigenvector for `eigenvalues()[k]`.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        self.eigenvectors.col_as_slice(k)
    }

    /// `A u` with the assembled matrix.
    pub fn apply_generator(&self, u: &Field) -> Result<Field> {
        u.ensure_same_mesh(&self.mesh())?;
        let out = &self.matrix * ColRef::from_slice(&u.values);
        Ok(Field { mesh: u.mesh, values: out.iter().copied().collect() })
    }

    /// `max_i (e^{tA})_{ii} / h`, the `L¹ → L^∞` norm of `S(t)`.
    ///
    /// `e^{tA}` is symmetric positive definite, so its largest entry sits on
    /// the diagonal.
    pub fn max_kernel_value(&self, t: f64) -> f64 {
        let n = self.grid.len();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|l| (t * l).exp()).collect();
        let mut best = 0.0f64;
        for i in 0..n {
            let mut acc = 0.0;
            for (k, w) in weights.iter().enumerate() {
                let v = self.eigenvectors[(i, k)];
                acc += w * v * v;
            }
            best = best.max(acc);
        }
        best / self.grid.spacing()
    }
}

fn condition_report(diag: f64, off: &[f64]) -> String {
    let row: f64 = off.iter().skip(1).sum::<f64>() * 2.0;
    format!("diagonal {diag:e}, max off-diagonal row sum {row:e}, dominance margin {:e}", -diag - row)
}

pub fn assemble(grid: Grid1D, alpha: f64) -> Result<DirichletOperator> {
    DirichletOperator::assemble(grid, alpha)
}

pub fn semigroup_apply(op: &DirichletOperator, t: f64, u: &Field) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(precondition(format!("time t = {t} must be non-negative")));
    }
    op.propagate(t, u)
}

impl SpectralEngine for DirichletOperator {
    fn mesh(&self) -> Mesh {
        Mesh::Interval(self.grid)
    }

    fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn combine(&self, terms: &[(&[f64], Multiplier<'_>)]) -> Vec<f64> {
        let n = self.grid.len();
        let inputs = Mat::from_fn(n, terms.len(), |i, j| terms[j].0[i]);
        let coeffs = self.eigenvectors.transpose() * &inputs;
        let mut modal = Mat::<f64>::zeros(n, 1);
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let mut acc = 0.0;
            for (j, (_, g)) in terms.iter().enumerate() {
                acc += g(*lambda) * coeffs[(k, j)];
            }
            modal[(k, 0)] = acc;
        }
        let out = &self.eigenvectors * &modal;
        out.col_as_slice(0).to_vec()
    }

    fn settle_sign(&self, values: &mut [f64]) -> Result<()> {
        let threshold = NEGATIVITY_THRESHOLD * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (node, v) in values.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < threshold {
                    return Err(Error::Positivity { value: *v, node });
                }
                *v = 0.0;
            }
        }
        Ok(())
    }
}
