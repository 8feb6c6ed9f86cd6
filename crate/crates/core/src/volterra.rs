//! The Volterra operator `T_D`, its adjoint, and the symmetric operator `T`.
//!
//! All adjoints are exact with respect to the trapezoid-weighted inner product
//! of [`crate::grid::l2_inner`], so that `<T_D h, f> = <h, T_D* f>` holds to
//! rounding on every grid.

use crate::grid::{cumulative_integral, SampledFunction};
use crate::scalar::Scalar;

/// `(T_D psi)(x) = int_a^x psi`.
pub fn apply_td<T: Scalar>(psi: &SampledFunction<T>) -> SampledFunction<T> {
    cumulative_integral(psi)
}

/// Adjoint of [`apply_td`]: `(T_D* f)(x) = int_x^b f`.
///
/// Interior nodes carry the trapezoid value of the tail integral. The two end
/// nodes carry the half-cell correction that makes the weighted adjoint exact:
/// `int_a^b f - h f(a)/2` at `a` and `h f(b)/2` at `b`.
pub fn apply_td_star<T: Scalar>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let grid = *f.grid();
    let v = f.values();
    let n = v.len();
    let h = grid.h();
    let half_h = h * T::lit(0.5);
    let mut out = vec![T::zero(); n];
    // tail = sum_{i > j} w_i f_i
    let mut tail = T::zero();
    for j in (0..n).rev() {
        let wj = grid.weight(j);
        out[j] = if j == 0 { tail } else { (h * tail + half_h * wj * v[j]) / wj };
        tail = tail + wj * v[j];
    }
    SampledFunction::from_raw(grid, out)
}

/// `T = T_D - T_D*`.
pub fn apply_t<T: Scalar>(psi: &SampledFunction<T>) -> SampledFunction<T> {
    &apply_td(psi) - &apply_td_star(psi)
}

/// `T* = T_D* - T_D = -T`.
pub fn apply_t_star<T: Scalar>(f: &SampledFunction<T>) -> SampledFunction<T> {
    -&apply_t(f)
}

/// Which forward operator the descent inverts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ForwardOperator {
    /// `T = T_D - T_D*`, recovering both endpoints symmetrically.
    #[default]
    Symmetric,
    /// Plain `T_D`; its gradient is pinned at `b`. Kept for comparison.
    Volterra,
}

impl ForwardOperator {
    pub fn apply<T: Scalar>(self, psi: &SampledFunction<T>) -> SampledFunction<T> {
        match self {
            Self::Symmetric => apply_t(psi),
            Self::Volterra => apply_td(psi),
        }
    }

    pub fn apply_adjoint<T: Scalar>(self, f: &SampledFunction<T>) -> SampledFunction<T> {
        match self {
            Self::Symmetric => apply_t_star(f),
            Self::Volterra => apply_td_star(f),
        }
    }
}
