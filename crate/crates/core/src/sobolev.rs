//! Sobolev (Neuberger) gradients and Polak-Ribiere conjugate directions.
//!
//! The Sobolev gradient `g` solves `-g'' + g = l2grad`. It is discretized as
//! `(K + W) g = W l2grad`, with `K` the linear finite-element stiffness matrix and
//! `W` the trapezoid weights. Divided by the weights, the interior rows are the
//! usual central differences, and a free end row is the ghost-point elimination
//! of `g' = 0`. [`h1_inner`] uses the same `K`, so `<g, l2grad> = (g, g)_{H1}`
//! holds to rounding.

use crate::error::Result;
use crate::grid::{l2_inner, weighted_dot, SampledFunction};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `g(a) = g(b) = 0`.
    Dirichlet,
    /// `g'(a) = g'(b) = 0`.
    #[default]
    Neumann,
    /// `g(a) = 0`, `g'(b) = 0`.
    RobinLeft,
    /// `g'(a) = 0`, `g(b) = 0`.
    RobinRight,
}

impl BoundaryKind {
    fn pins_left(self) -> bool {
        matches!(self, Self::Dirichlet | Self::RobinLeft)
    }

    fn pins_right(self) -> bool {
        matches!(self, Self::Dirichlet | Self::RobinRight)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CgVariant {
    /// Plain Sobolev descent.
    #[default]
    None,
    /// Polak-Ribiere ratio pairing Sobolev gradients with L2 gradients.
    L2H1,
    /// Polak-Ribiere ratio built from the Sobolev gradients alone.
    H1H1,
}

/// Solves `-g'' + g = rhs` with the given boundary conditions (Thomas algorithm).
pub fn helmholtz_solve<T: Scalar>(rhs: &SampledFunction<T>, bc: BoundaryKind) -> SampledFunction<T> {
    let grid = *rhs.grid();
    let n = grid.n();
    let inv_h = T::one() / grid.h();
    let mut diag: Vec<T> = (0..n).map(|i| grid.weight(i)).collect();
    let mut off = vec![-inv_h; n - 1];
    let mut b: Vec<T> = (0..n).map(|i| grid.weight(i) * rhs[i]).collect();
    for i in 0..n - 1 {
        diag[i] = diag[i] + inv_h;
        diag[i + 1] = diag[i + 1] + inv_h;
    }
    if bc.pins_left() {
        diag[0] = T::one();
        off[0] = T::zero();
        b[0] = T::zero();
    }
    if bc.pins_right() {
        diag[n - 1] = T::one();
        off[n - 2] = T::zero();
        b[n - 1] = T::zero();
    }
    SampledFunction::from_raw(grid, thomas_symmetric(&diag, &off, b))
}

/// Solves a symmetric tridiagonal system in place of `rhs`.
fn thomas_symmetric<T: Scalar>(diag: &[T], off: &[T], mut rhs: Vec<T>) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut beta = diag[0];
    rhs[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = off[i - 1] / beta;
        beta = diag[i] - off[i - 1] * c[i];
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - c[i + 1] * rhs[i + 1];
    }
    rhs
}

pub fn sobolev_gradient<T: Scalar>(l2grad: &SampledFunction<T>, bc: BoundaryKind) -> SampledFunction<T> {
    helmholtz_solve(l2grad, bc)
}

/// `<f, g> + sum (f_{i+1} - f_i)(g_{i+1} - g_i) / h`.
pub fn h1_inner<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<T> {
    let l2 = l2_inner(f, g)?;
    let (fv, gv) = (f.values(), g.values());
    let stiff: T = fv.windows(2).zip(gv.windows(2)).map(|(a, b)| (a[1] - a[0]) * (b[1] - b[0])).sum();
    Ok(l2 + stiff / f.grid().h())
}

/// Polak-Ribiere coefficient, clamped at zero.
///
/// * `L2H1`: `<g_new - g_old, l2_new> / <g_old, l2_old>`, which equals the
///   Polak-Ribiere ratio in the `H1` metric.
/// * `H1H1`: `<g_new - g_old, g_new> / <g_old, g_old>`, both in `L2`, so only
///   the Sobolev gradients enter.
///
/// A vanishing or non-finite denominator yields `0` (restart).
pub fn pr_coefficient<T: Scalar>(
    g_new: &SampledFunction<T>,
    g_old: &SampledFunction<T>,
    l2_new: &SampledFunction<T>,
    l2_old: &SampledFunction<T>,
    variant: CgVariant,
) -> Result<T> {
    g_new.check_same_grid(g_old)?;
    g_new.check_same_grid(l2_new)?;
    g_new.check_same_grid(l2_old)?;
    let grid = *g_new.grid();
    let diff = g_new - g_old;
    let (num, den) = match variant {
        CgVariant::None => return Ok(T::zero()),
        CgVariant::L2H1 => {
            (weighted_dot(&grid, diff.values(), l2_new.values()), weighted_dot(&grid, g_old.values(), l2_old.values()))
        }
        CgVariant::H1H1 => {
            (weighted_dot(&grid, diff.values(), g_new.values()), weighted_dot(&grid, g_old.values(), g_old.values()))
        }
    };
    if den <= T::zero() || !den.is_finite() {
        return Ok(T::zero());
    }
    let gamma = num / den;
    Ok(if gamma.is_finite() && gamma > T::zero() { gamma } else { T::zero() })
}

/// `h_new = g_new + gamma * h_old`.
pub fn next_direction<T: Scalar>(
    h_old: &SampledFunction<T>,
    g_new: &SampledFunction<T>,
    gamma: T,
) -> SampledFunction<T> {
    g_new.axpy(gamma, h_old)
}
