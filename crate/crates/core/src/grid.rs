//! Uniform grids, trapezoid quadrature and discrete norms.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform partition of `[a, b]` into `n - 1` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    a: T,
    b: T,
    n: usize,
    h: T,
}

impl<T: Scalar> Grid<T> {
    pub fn uniform(a: T, b: T, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {n}")));
        }
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if a >= b {
            return Err(Error::InvalidGrid(format!("left endpoint {a} must be below right endpoint {b}")));
        }
        let h = (b - a) / T::from_usize_lossy(n - 1);
        Ok(Self { a, b, n, h })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    pub fn x(&self, i: usize) -> T {
        self.a + T::from_usize_lossy(i) * self.h
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> T {
        if i == 0 || i + 1 == self.n {
            self.h * T::lit(0.5)
        } else {
            self.h
        }
    }

    pub fn weights(&self) -> Vec<T> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }
}

pub fn make_uniform_grid<T: Scalar>(a: T, b: T, n: usize) -> Result<Grid<T>> {
    Grid::uniform(a, b, n)
}

/// Real samples on the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    /// Validating constructor: length must match and every sample must be finite.
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn(T) -> T) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.n()] }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> T {
        self.values[0]
    }

    pub fn last(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| c * v)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: T, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid, "axpy on mismatched grids");
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x + alpha * y).collect();
        Self::from_raw(self.grid, values)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl<T: Scalar> std::ops::Index<usize> for SampledFunction<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

impl<T: Scalar> Add for &SampledFunction<T> {
    type Output = SampledFunction<T>;

    fn add(self, rhs: Self) -> SampledFunction<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Scalar> Sub for &SampledFunction<T> {
    type Output = SampledFunction<T>;

    fn sub(self, rhs: Self) -> SampledFunction<T> {
        self.axpy(-T::one(), rhs)
    }
}

impl<T: Scalar> Neg for &SampledFunction<T> {
    type Output = SampledFunction<T>;

    fn neg(self) -> SampledFunction<T> {
        self.map(|v| -v)
    }
}

impl<T: Scalar> Mul<T> for &SampledFunction<T> {
    type Output = SampledFunction<T>;

    fn mul(self, c: T) -> SampledFunction<T> {
        self.scale(c)
    }
}

/// Composite trapezoid antiderivative with `F(a) = 0`.
pub fn cumulative_integral<T: Scalar>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let half_h = f.grid.h() * T::lit(0.5);
    let v = f.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = T::zero();
    out.push(acc);
    for w in v.windows(2) {
        acc = acc + half_h * (w[0] + w[1]);
        out.push(acc);
    }
    SampledFunction::from_raw(f.grid, out)
}

/// Trapezoid approximation of the integral over the whole interval.
pub fn integral<T: Scalar>(f: &SampledFunction<T>) -> T {
    let g = f.grid;
    f.values.iter().enumerate().map(|(i, &v)| g.weight(i) * v).sum()
}

/// Trapezoid-weighted inner product.
pub fn l2_inner<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<T> {
    f.check_same_grid(g)?;
    Ok(weighted_dot(&f.grid, f.values(), g.values()))
}

pub(crate) fn weighted_dot<T: Scalar>(grid: &Grid<T>, f: &[T], g: &[T]) -> T {
    let n = f.len();
    let interior: T = f[1..n - 1].iter().zip(&g[1..n - 1]).map(|(&x, &y)| x * y).sum();
    grid.h() * (interior + T::lit(0.5) * (f[0] * g[0] + f[n - 1] * g[n - 1]))
}

pub fn l2_norm<T: Scalar>(f: &SampledFunction<T>) -> T {
    weighted_dot(&f.grid, f.values(), f.values()).sqrt()
}

/// Second-order derivative samples: central differences inside, one-sided
/// three-point stencils at the ends.
pub fn derivative<T: Scalar>(f: &SampledFunction<T>) -> SampledFunction<T> {
    let v = f.values();
    let n = v.len();
    let inv2h = T::one() / (T::lit(2.0) * f.grid.h());
    let (three, four) = (T::lit(3.0), T::lit(4.0));
    let mut d = vec![T::zero(); n];
    d[0] = (-three * v[0] + four * v[1] - v[2]) * inv2h;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) * inv2h;
    }
    d[n - 1] = (three * v[n - 1] - four * v[n - 2] + v[n - 3]) * inv2h;
    SampledFunction::from_raw(f.grid, d)
}

/// `sqrt(||f||^2 + ||f'||^2)` with `f'` from [`derivative`].
pub fn h1_norm<T: Scalar>(f: &SampledFunction<T>) -> T {
    let d = derivative(f);
    (weighted_dot(&f.grid, f.values(), f.values()) + weighted_dot(&f.grid, d.values(), d.values())).sqrt()
}

pub fn relative_l2_error<T: Scalar>(estimate: &SampledFunction<T>, truth: &SampledFunction<T>) -> Result<T> {
    estimate.check_same_grid(truth)?;
    let denom = l2_norm(truth);
    if denom == T::zero() {
        return Err(Error::ZeroNorm);
    }
    Ok(l2_norm(&(estimate - truth)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid<f64> {
        Grid::<f64>::uniform(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn grid_spacing() {
        assert!((unit(101).h() - 0.01).abs() < 1e-15);
        let g = Grid::<f64>::uniform(-0.5, 0.5, 11).unwrap();
        assert!((g.h() - 0.1).abs() < 1e-15);
        assert!((g.x(10) - 0.5).abs() <= 8.0 * f64::EPSILON);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(Grid::<f64>::uniform(0.0, 1.0, 2), Err(Error::InvalidGrid(_))));
        assert!(Grid::<f64>::uniform(1.0, 1.0, 10).is_err());
        assert!(Grid::<f64>::uniform(2.0, 1.0, 10).is_err());
        assert!(Grid::<f64>::uniform(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn constructor_validates() {
        let g = unit(5);
        assert!(matches!(SampledFunction::new(g, vec![0.0; 4]), Err(Error::LengthMismatch { expected: 5, got: 4 })));
        assert!(matches!(
            SampledFunction::new(g, vec![0.0, 1.0, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite { index: 2 })
        ));
    }

    #[test]
    fn cumulative_integral_examples() {
        let g = unit(101);
        let zero = cumulative_integral(&SampledFunction::zeros(g));
        assert!(zero.values().iter().all(|&v| v == 0.0));

        let one = cumulative_integral(&SampledFunction::constant(g, 1.0));
        for i in 0..g.n() {
            assert!((one[i] - g.x(i)).abs() < 1e-14);
        }

        let lin = cumulative_integral(&SampledFunction::from_fn(g, |x| 2.0 * x));
        for i in 0..g.n() {
            assert!((lin[i] - g.x(i).powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_examples() {
        let g = unit(101);
        assert!((integral(&SampledFunction::constant(g, 1.0)) - 1.0).abs() < 1e-14);
        assert!((integral(&SampledFunction::from_fn(g, |x| x)) - 0.5).abs() < 1e-14);
        let c = Grid::<f64>::uniform(-0.5, 0.5, 101).unwrap();
        let v = integral(&SampledFunction::from_fn(c, f64::cos));
        assert!((v - 2.0 * 0.5f64.sin()).abs() < 1e-5);
    }

    #[test]
    fn trapezoid_is_second_order() {
        let exact = 2.0 * 0.5f64.sin();
        let err = |n| {
            let g = Grid::<f64>::uniform(-0.5, 0.5, n).unwrap();
            (integral(&SampledFunction::from_fn(g, f64::cos)) - exact).abs()
        };
        let (e1, e2, e3) = (err(21), err(41), err(81));
        for r in [e1 / e2, e2 / e3] {
            assert!((3.2..=4.8).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn inner_product_examples() {
        let g = unit(101);
        let z = SampledFunction::zeros(g);
        assert_eq!(l2_inner(&z, &z).unwrap(), 0.0);
        let one = SampledFunction::constant(g, 1.0);
        assert!((l2_inner(&one, &one).unwrap() - 1.0).abs() < 1e-14);

        let n = (3.0 * std::f64::consts::PI / 0.01).ceil() as usize + 1;
        let s = Grid::<f64>::uniform(0.0, 3.0 * std::f64::consts::PI, n).unwrap();
        let f = SampledFunction::from_fn(s, |x| (x / 3.0).sin());
        assert!((l2_norm(&f) - (1.5 * std::f64::consts::PI).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn inner_product_rejects_grid_mismatch() {
        let f = SampledFunction::zeros(unit(11));
        let g = SampledFunction::zeros(unit(12));
        assert!(matches!(l2_inner(&f, &g), Err(Error::GridMismatch)));
    }

    #[test]
    fn h1_norm_examples() {
        let g = unit(101);
        assert_eq!(h1_norm(&SampledFunction::zeros(g)), 0.0);
        let c = Grid::<f64>::uniform(-1.0, 3.0, 51).unwrap();
        assert!((h1_norm(&SampledFunction::constant(c, -3.0)) - 3.0 * 2.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let s = SampledFunction::from_fn(g, |x| (pi * x).sin());
        assert!((h1_norm(&s) - (0.5 + pi * pi / 2.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn relative_error_examples() {
        let g = unit(101);
        let t = SampledFunction::from_fn(g, |x| x.exp());
        assert_eq!(relative_l2_error(&t, &t).unwrap(), 0.0);
        assert!((relative_l2_error(&t.scale(2.0), &t).unwrap() - 1.0).abs() < 1e-14);

        let e = SampledFunction::from_fn(g, |x| (3.0 * x).cos());
        let e = e.scale(1.0 / l2_norm(&e));
        let est = t.axpy(0.1 * l2_norm(&t), &e);
        assert!((relative_l2_error(&est, &t).unwrap() - 0.1).abs() < 1e-12);

        assert!(matches!(relative_l2_error(&t, &SampledFunction::zeros(g)), Err(Error::ZeroNorm)));
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::<f32>::uniform(0.0, 1.0, 101).unwrap();
        let f = SampledFunction::from_fn(g, |x| 2.0 * x);
        let v = integral(&f);
        assert!((v - 1.0).abs() < 1e-5);
    }
}
