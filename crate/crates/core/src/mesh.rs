//! One-dimensional meshes and nodal fields.

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

/// Uniform interior nodes of the interval `(−R, R)`:
/// `x_i = −R + (i+1)h`, `h = 2R/(N+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    nodes: usize,
}

impl Grid1D {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(precondition(format!("half-width R = {half_width} must be positive")));
        }
        if nodes < 3 {
            return Err(precondition(format!("need at least 3 interior nodes, got {nodes}")));
        }
        Ok(Grid1D { half_width, nodes })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes as f64 + 1.0)
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.node(i)).collect()
    }
}

/// Periodic nodes `x_j = −L + j·2L/M` on the torus `[−L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    half_period: f64,
    modes: usize,
}

impl TorusGrid {
    pub fn new(half_period: f64, modes: usize) -> Result<Self> {
        if !(half_period > 0.0) || !half_period.is_finite() {
            return Err(precondition(format!("half-period L = {half_period} must be positive")));
        }
        if modes < 2 || modes % 2 != 0 {
            return Err(precondition(format!("mode count M = {modes} must be even and at least 2")));
        }
        Ok(TorusGrid { half_period, modes })
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn len(&self) -> usize {
        self.modes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.modes as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_period + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.modes).map(|j| self.node(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mesh {
    Interval(Grid1D),
    Torus(TorusGrid),
}

impl Mesh {
    pub fn len(&self) -> usize {
        match self {
            Mesh::Interval(g) => g.len(),
            Mesh::Torus(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one node.
    pub fn cell(&self) -> f64 {
        match self {
            Mesh::Interval(g) => g.spacing(),
            Mesh::Torus(g) => g.spacing(),
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        match self {
            Mesh::Interval(g) => g.node(i),
            Mesh::Torus(g) => g.node(i),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

impl From<Grid1D> for Mesh {
    fn from(g: Grid1D) -> Self {
        Mesh::Interval(g)
    }
}

impl From<TorusGrid> for Mesh {
    fn from(g: TorusGrid) -> Self {
        Mesh::Torus(g)
    }
}

/// Samples of a function at the nodes of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: impl Into<Mesh>, values: Vec<f64>) -> Result<Self> {
        let mesh = mesh.into();
        if values.len() != mesh.len() {
            return Err(Error::GridMismatch(format!("{} values for a mesh of {} nodes", values.len(), mesh.len())));
        }
        Ok(Field { mesh, values })
    }

    pub fn zeros(mesh: impl Into<Mesh>) -> Self {
        let mesh = mesh.into();
        Field { values: vec![0.0; mesh.len()], mesh }
    }

    pub fn from_fn(mesh: impl Into<Mesh>, f: impl Fn(f64) -> f64) -> Self {
        let mesh = mesh.into();
        Field { values: (0..mesh.len()).map(|i| f(mesh.node(i))).collect(), mesh }
    }

    /// `χ_r` centred at `center`: 1 at nodes with `|x − center| ≤ r`.
    pub fn indicator(mesh: impl Into<Mesh>, center: f64, r: f64) -> Self {
        Self::from_fn(mesh, |x| if (x - center).abs() <= r { 1.0 } else { 0.0 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete `L^q` norm `(h Σ |u_i|^q)^{1/q}`; `q = ∞` gives the max norm.
    pub fn norm(&self, q: f64) -> f64 {
        lq_norm(&self.values, self.mesh.cell(), q)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn ensure_same_mesh(&self, mesh: &Mesh) -> Result<()> {
        if &self.mesh != mesh {
            return Err(Error::GridMismatch(format!("field on {:?}, operator on {:?}", self.mesh, mesh)));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field { mesh: self.mesh, values: self.values.iter().map(|v| c * v).collect() }
    }
}

pub fn lq_norm(values: &[f64], cell: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if q == 1.0 {
        return cell * values.iter().map(|v| v.abs()).sum::<f64>();
    }
    if q == 2.0 {
        return (cell * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    (cell * values.iter().map(|v| v.abs().powf(q)).sum::<f64>()).powf(1.0 / q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_nodes_are_interior() {
        let g = Grid1D::new(1.0, 99).unwrap();
        assert_relative_eq!(g.spacing(), 0.02, max_relative = 1e-15);
        assert!(g.node(0) > -1.0 && g.node(98) < 1.0);
        assert_relative_eq!(g.node(49), 0.0, epsilon = 1e-15);
        assert!(Grid1D::new(1.0, 2).is_err());
        assert!(Grid1D::new(0.0, 10).is_err());
    }

    #[test]
    fn torus_requires_even_modes() {
        assert!(TorusGrid::new(1.0, 7).is_err());
        let t = TorusGrid::new(2.0, 8).unwrap();
        assert_eq!(t.node(0), -2.0);
        assert_relative_eq!(t.spacing(), 0.5);
    }

    #[test]
    fn indicator_norm() {
        let g = Grid1D::new(1.0, 999).unwrap();
        let chi = Field::indicator(g, 0.0, 0.1);
        assert_relative_eq!(chi.norm(2.0), 0.2f64.sqrt(), max_relative = 0.02);
        assert_relative_eq!(chi.norm(f64::INFINITY), 1.0);
    }

    #[test]
    fn field_length_checked() {
        let g = Grid1D::new(1.0, 5).unwrap();
        assert!(Field::new(g, vec![0.0; 4]).is_err());
    }
}
