//! Double-integration transform of the data and the map `psi -> u'_psi`.

use crate::error::Result;
use crate::grid::{cumulative_integral, Grid, SampledFunction};
use crate::scalar::Scalar;
use crate::volterra::ForwardOperator;

/// Smoothed working data built from raw samples.
///
/// `u` solves `-u'' = g3` with `u(a) = u(b) = 0`, where for the symmetric
/// operator `g3 = 2 g - (g_a + g_b)`. Both `u` and `u_prime` are built from
/// single and double trapezoid integrals of the data; nothing is differenced.
#[derive(Clone, Debug)]
pub struct TransformedData<T> {
    pub grid: Grid<T>,
    pub u: SampledFunction<T>,
    pub u_prime: SampledFunction<T>,
    pub g_tilde: SampledFunction<T>,
    pub g_a: T,
    pub g_b: T,
    pub g3: SampledFunction<T>,
    pub lambda1: T,
    pub operator: ForwardOperator,
}

impl<T: Scalar> TransformedData<T> {
    /// Maps `Op psi` back to the scale of the data: `g ~ (Op psi + shift) / factor`.
    pub fn to_data_scale(&self, op_psi: &SampledFunction<T>) -> SampledFunction<T> {
        let (factor, shift) = self.scaling();
        op_psi.map(|v| (v + shift) / factor)
    }

    /// `(factor, shift)` with `g3 = factor * g - shift`.
    pub fn scaling(&self) -> (T, T) {
        match self.operator {
            ForwardOperator::Symmetric => (T::lit(2.0), self.g_a + self.g_b),
            ForwardOperator::Volterra => (T::one(), self.g_a),
        }
    }
}

/// Transform using the boundary samples found in the data.
pub fn transform_data<T: Scalar>(g_tilde: &SampledFunction<T>) -> TransformedData<T> {
    build(g_tilde, g_tilde.first(), g_tilde.last(), ForwardOperator::Symmetric)
}

/// Transform using trusted values of `g(a)` and `g(b)` instead of the end samples.
pub fn transform_data_with_boundary<T: Scalar>(g_tilde: &SampledFunction<T>, g_a: T, g_b: T) -> TransformedData<T> {
    build(g_tilde, g_a, g_b, ForwardOperator::Symmetric)
}

/// Transform for the one-sided operator `T_D`, using `g1 = g - g(a)`.
pub fn transform_data_volterra<T: Scalar>(g_tilde: &SampledFunction<T>, g_a: T) -> TransformedData<T> {
    build(g_tilde, g_a, g_tilde.last(), ForwardOperator::Volterra)
}

fn build<T: Scalar>(g_tilde: &SampledFunction<T>, g_a: T, g_b: T, operator: ForwardOperator) -> TransformedData<T> {
    let grid = *g_tilde.grid();
    let (a, b) = (grid.a(), grid.b());
    let len = grid.length();
    let half = T::lit(0.5);
    let (factor, shift) = match operator {
        ForwardOperator::Symmetric => (T::lit(2.0), g_a + g_b),
        ForwardOperator::Volterra => (T::one(), g_a),
    };

    let i1 = cumulative_integral(g_tilde);
    let i2 = cumulative_integral(&i1);
    let i2b = i2.last();
    let k = factor * i2b - shift * len * len * half;

    let u_prime = SampledFunction::from_raw(
        grid,
        (0..grid.n()).map(|i| -factor * i1[i] + shift * (grid.x(i) - a) + k / len).collect(),
    );
    let u = SampledFunction::from_raw(
        grid,
        (0..grid.n())
            .map(|i| {
                let x = grid.x(i);
                let xa = x - a;
                factor * (i2b - i2[i]) - shift * (len * len - xa * xa) * half - (b - x) / len * k
            })
            .collect(),
    );
    let g3 = g_tilde.map(|v| factor * v - shift);
    let pi = T::lit(std::f64::consts::PI);

    TransformedData {
        grid,
        u,
        u_prime,
        g_tilde: g_tilde.clone(),
        g_a,
        g_b,
        g3,
        lambda1: pi * pi / (len * len),
        operator,
    }
}

/// `u'_psi`: the derivative of the solution of `-w'' = Op psi`, `w(a) = w(b) = 0`.
pub fn u_prime_of_psi<T: Scalar>(psi: &SampledFunction<T>, data: &TransformedData<T>) -> Result<SampledFunction<T>> {
    psi.check_same_grid(&data.u)?;
    Ok(solve_from_source(&data.operator.apply(psi)))
}

/// `u_psi = int_a^x u'_psi`.
pub fn u_of_psi<T: Scalar>(psi: &SampledFunction<T>, data: &TransformedData<T>) -> Result<SampledFunction<T>> {
    Ok(cumulative_integral(&u_prime_of_psi(psi, data)?))
}

/// For a source `f`, the derivative `w'` of the solution of `-w'' = f` with zero
/// boundary values: `w' = -J1 + J2(b)/(b-a)`, i.e. `-J1` with its mean removed.
pub(crate) fn solve_from_source<T: Scalar>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let j1 = cumulative_integral(f);
    let mean = cumulative_integral(&j1).last() / f.grid().length();
    j1.map(|v| mean - v)
}
