//! Common interface of the semigroup engines.
//!
//! Both engines diagonalise the generator `A` of `e^{tA}` (a real orthonormal
//! eigenbasis on the interval, Fourier modes on the torus), so every linear
//! operation the solvers need is a spectral multiplier `g(A)`.

use crate::error::Result;
use crate::mesh::{Field, Mesh};

/// Spectral multiplier: maps an eigenvalue `λ ≤ 0` of the generator to `g(λ)`.
pub type Multiplier<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

pub trait SpectralEngine: Sync {
    fn mesh(&self) -> Mesh;

    /// Eigenvalues of the generator; all `≤ 0`.
    fn spectrum(&self) -> &[f64];

    /// `Σ_k g_k(A) v_k` for the given (values, multiplier) pairs.
    fn combine(&self, terms: &[(&[f64], Multiplier<'_>)]) -> Vec<f64>;

    /// Removes roundoff-level negative values; reports structural sign failures.
    fn settle_sign(&self, values: &mut [f64]) -> Result<()>;

    fn cell(&self) -> f64 {
        self.mesh().cell()
    }

    /// `S(t)u = e^{tA}u`; the identity is returned exactly at `t = 0`.
    fn propagate(&self, t: f64, u: &Field) -> Result<Field> {
        u.ensure_same_mesh(&self.mesh())?;
        if t == 0.0 {
            return Ok(u.clone());
        }
        let decay = move |lambda: f64| (t * lambda).exp();
        let mut values = self.combine(&[(&u.values, &decay)]);
        self.settle_sign(&mut values)?;
        Ok(Field { mesh: u.mesh, values })
    }
}
