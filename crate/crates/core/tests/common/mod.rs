#![allow(dead_code)]

use proptest::prelude::*;
use regdiff::{Grid64, SampledFunction64};

/// Interval `[a, b]` with moderate length.
pub fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-2.0..2.0f64, 0.5..4.0f64).prop_map(|(a, len)| (a, a + len))
}

/// Low-frequency trigonometric sum plus an optional node-level perturbation.
#[derive(Clone, Debug)]
pub struct Shape {
    pub coeffs: Vec<(f64, f64)>,
    pub jitter: Vec<f64>,
}

impl Shape {
    pub fn smooth(&self) -> Shape {
        Shape { coeffs: self.coeffs.clone(), jitter: vec![0.0] }
    }

    pub fn sample(&self, grid: Grid64) -> SampledFunction64 {
        let (a, len) = (grid.a(), grid.length());
        let n = grid.n();
        let values = (0..n)
            .map(|i| {
                let t = (grid.x(i) - a) / len;
                let smooth: f64 = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (c, s))| {
                        let w = std::f64::consts::PI * k as f64;
                        c * (w * t).cos() + s * (w * t).sin()
                    })
                    .sum();
                smooth + self.jitter[i % self.jitter.len()]
            })
            .collect();
        SampledFunction64::new(grid, values).unwrap()
    }
}

pub fn shape() -> impl Strategy<Value = Shape> {
    (prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6), prop::collection::vec(-0.05..0.05f64, 1..17))
        .prop_map(|(coeffs, jitter)| Shape { coeffs, jitter })
}

pub fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

pub fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(a.abs()).max(b.abs())
}

/// Dense matrix whose column `j` is `op(e_j)`.
pub fn dense(grid: Grid64, op: impl Fn(&SampledFunction64) -> SampledFunction64) -> nalgebra::DMatrix<f64> {
    let n = grid.n();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = op(&SampledFunction64::new(grid, e).unwrap());
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

pub fn weight_matrix(grid: Grid64) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(grid.weights()))
}
