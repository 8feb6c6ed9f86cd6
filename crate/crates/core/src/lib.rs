//! Numerical differentiation of noisy samples by iterative regularization.
//!
//! The data `g` are integrated twice into a smooth working pair `(u, u')`, and the
//! derivative is recovered as the minimizer of `G(psi) = ||u' - u'_psi||^2`, where
//! `u_psi` solves `-u'' = T psi` with zero boundary values and
//! `T = T_D - T_D*` is the symmetric Volterra operator. Minimization runs Sobolev
//! (Neuberger) gradient descent, optionally with Polak-Ribiere conjugate
//! directions, and is stopped early by the discrepancy principle or by a
//! noise-level-free fluctuation heuristic.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! experiment layer works in `f64`.
//!
//! ```
//! use regdiff::{descent, transform, Grid64, SampledFunction64};
//!
//! let grid = Grid64::uniform(0.0, 1.0, 101).unwrap();
//! let g = SampledFunction64::from_fn(grid, |x| x * x);
//! let data = transform::transform_data(&g);
//! let config = descent::DescentConfig::default();
//! let report = descent::run_descent(&data, &config).unwrap();
//! assert_eq!(report.phi_hat.len(), 101);
//! ```

// `!(x > 0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descent;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod line_search;
pub mod noise;
pub mod objective;
pub mod scalar;
pub mod sobolev;
pub mod transform;
pub mod volterra;

pub use error::{Error, Result};
pub use grid::{Grid, SampledFunction};
pub use scalar::Scalar;

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type SampledFunction64 = SampledFunction<f64>;
pub type SampledFunction32 = SampledFunction<f32>;
pub type TransformedData64 = transform::TransformedData<f64>;
pub type DescentConfig64 = descent::DescentConfig<f64>;
pub type DescentReport64 = descent::DescentReport<f64>;
