//! Numerical laboratory for the semilinear fractional heat equation
//! `u_t = Δ^{α/2} u + f(u)` posed on an interval with exterior-zero data or on a
//! large torus standing in for the whole line.
//!
//! The crate is organised bottom-up:
//!
//! * [`quad`]: adaptive Gauss–Kronrod quadrature shared by the kernel and the
//!   integral criteria.
//! * [`kernel`]: free-space α-stable heat kernels and their two-sided envelopes.
//! * [`mesh`]: interval and torus meshes plus nodal [`mesh::Field`]s.
//! * [`dirichlet`], [`periodic`]: spectral semigroup engines implementing
//!   [`engine::SpectralEngine`].
//! * [`growth`], [`criteria`]: nonlinearities and the existence/non-existence
//!   classifiers.
//! * [`mild`]: exponential-Euler and monotone Picard solvers for the Duhamel
//!   equation.
//! * [`construct`]: stacked-indicator initial data and escalation experiments.
//! * [`scenario`], [`plot`], [`acceptance`]: configuration, CSV/plot output and
//!   the acceptance suite driven by the `fracheat` binary.

pub mod acceptance;
pub mod construct;
pub mod criteria;
pub mod dirichlet;
pub mod engine;
pub mod error;
pub mod growth;
pub mod kernel;
pub mod mesh;
pub mod mild;
pub mod periodic;
pub mod plot;
pub mod quad;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};
