//! The functional `G(psi) = ||u' - u'_psi||^2` and its derivatives.
//!
//! `G` is exactly quadratic: `u'_psi = L psi` with the linear map
//! `L = -P C Op`, where `C` is the trapezoid antiderivative and `P` removes the
//! mean. The gradient below is the exact discrete Riesz representer
//! `-2 L* (u' - L psi)` in the trapezoid inner product.

use crate::error::Result;
use crate::grid::{l2_inner, weighted_dot, SampledFunction};
use crate::scalar::Scalar;
use crate::transform::{u_prime_of_psi, TransformedData};
use crate::volterra::apply_td_star;

/// `u' - u'_psi`.
pub fn residual<T: Scalar>(psi: &SampledFunction<T>, data: &TransformedData<T>) -> Result<SampledFunction<T>> {
    Ok(&data.u_prime - &u_prime_of_psi(psi, data)?)
}

pub fn evaluate_g<T: Scalar>(psi: &SampledFunction<T>, data: &TransformedData<T>) -> Result<T> {
    let r = residual(psi, data)?;
    Ok(weighted_dot(&data.grid, r.values(), r.values()))
}

/// `Op*(-2 (u - u_psi))`, with `u - u_psi` taken as `-T_D*(u' - u'_psi)`.
///
/// For a mean-free residual the tail integral `-int_x^b` and the head integral
/// `int_a^x` coincide; the tail form is the one whose discrete adjoint is exact.
pub fn l2_gradient<T: Scalar>(psi: &SampledFunction<T>, data: &TransformedData<T>) -> Result<SampledFunction<T>> {
    Ok(gradient_from_residual(&residual(psi, data)?, data))
}

pub(crate) fn gradient_from_residual<T: Scalar>(
    r: &SampledFunction<T>,
    data: &TransformedData<T>,
) -> SampledFunction<T> {
    let mean = weighted_dot(&data.grid, r.values(), &vec![T::one(); r.len()]) / data.grid.length();
    let r = r.map(|v| v - mean);
    let u_minus_upsi = -&apply_td_star(&r);
    data.operator.apply_adjoint(&u_minus_upsi.scale(T::lit(-2.0)))
}

/// `G'(psi)[h] = -2 <u'_h, u' - u'_psi>`.
pub fn directional_derivative<T: Scalar>(
    psi: &SampledFunction<T>,
    h: &SampledFunction<T>,
    data: &TransformedData<T>,
) -> Result<T> {
    let r = residual(psi, data)?;
    let lh = u_prime_of_psi(h, data)?;
    Ok(T::lit(-2.0) * l2_inner(&lh, &r)?)
}

/// `G''[h, k] = 2 <u'_h, u'_k>`; independent of `psi` since `G` is quadratic.
pub fn second_derivative<T: Scalar>(
    h: &SampledFunction<T>,
    k: &SampledFunction<T>,
    data: &TransformedData<T>,
) -> Result<T> {
    let lh = u_prime_of_psi(h, data)?;
    let lk = u_prime_of_psi(k, data)?;
    Ok(T::lit(2.0) * l2_inner(&lh, &lk)?)
}
