//! Step-length selection: quadratic initial step, arithmetic bracketing and
//! Brent minimization.

use crate::error::{Error, Result};
use crate::grid::{l2_inner, SampledFunction};
use crate::objective::{directional_derivative, second_derivative};
use crate::scalar::Scalar;
use crate::transform::TransformedData;

const MAX_EVALS: usize = 100;
const REL_TOL: f64 = 1e-6;
const ABS_TOL_FACTOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchResult<T> {
    pub alpha: T,
    pub f_alpha: T,
    pub evals: usize,
}

/// Minimizer of the quadratic model along `-h`: `G'(psi)[h] / G''[h, h]`.
pub fn initial_step<T: Scalar>(
    psi: &SampledFunction<T>,
    h: &SampledFunction<T>,
    data: &TransformedData<T>,
) -> Result<T> {
    let slope = directional_derivative(psi, h, data)?;
    let curvature = second_derivative(h, h, data)?;
    step_from(slope, curvature, l2_inner(h, h)?)
}

pub(crate) fn step_from<T: Scalar>(slope: T, curvature: T, h_norm2: T) -> Result<T> {
    if slope == T::zero() {
        return Ok(T::zero());
    }
    if !(curvature > T::epsilon() * T::epsilon() * h_norm2) || !curvature.is_finite() {
        return Err(Error::DegenerateDirection { curvature: curvature.to_f64_lossy(), slope: slope.to_f64_lossy() });
    }
    Ok(slope / curvature)
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F> Counted<F> {
    fn eval<T: Scalar>(&mut self, alpha: T) -> Result<T>
    where
        F: FnMut(T) -> T,
    {
        self.evals += 1;
        let v = (self.f)(alpha);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteObjective { alpha: alpha.to_f64_lossy() })
        }
    }
}

/// Minimizes `f` over `alpha >= 0` starting from the trial step `alpha0`.
///
/// If `f(alpha0) > f(0)` the minimum is sought in `[0, alpha0]`. Otherwise the
/// steps `k alpha0` are tried while `f` keeps decreasing, and the minimum is sought
/// in `[(k-1) alpha0, (k+1) alpha0]`. When the parabola through the three
/// bracket points peaks within tolerance of the middle point, that point is
/// accepted as is.
pub fn search<T: Scalar, F: FnMut(T) -> T>(f: F, alpha0: T) -> Result<LineSearchResult<T>> {
    if !(alpha0 > T::zero()) || !alpha0.is_finite() {
        return Err(Error::Config(format!("initial step must be positive and finite, got {alpha0}")));
    }
    let mut f = Counted { f, evals: 0 };
    let f0 = f.eval(T::zero())?;
    let f1 = f.eval(alpha0)?;
    let abs_tol = T::lit(ABS_TOL_FACTOR) * alpha0;

    let (x, fx) = if f1 > f0 {
        brent(&mut f, T::zero(), alpha0, None, abs_tol)?
    } else {
        let mut k = 1usize;
        let (mut f_prev, mut f_cur) = (f0, f1);
        let f_next = loop {
            let next = T::from_usize_lossy(k + 1) * alpha0;
            let fn_ = f.eval(next)?;
            if fn_ < f_cur && f.evals < MAX_EVALS {
                k += 1;
                f_prev = f_cur;
                f_cur = fn_;
            } else {
                break fn_;
            }
        };
        let mid = T::from_usize_lossy(k) * alpha0;
        let (lo, hi) = (mid - alpha0, mid + alpha0);
        match parabola_vertex(lo, f_prev, mid, f_cur, hi, f_next) {
            Some(v) if (v - mid).abs() <= tolerance(mid, abs_tol) => (mid, f_cur),
            _ => brent(&mut f, lo, hi, Some((mid, f_cur)), abs_tol)?,
        }
    };

    let (alpha, f_alpha) = if fx <= f0 { (x, fx) } else { (T::zero(), f0) };
    Ok(LineSearchResult { alpha, f_alpha, evals: f.evals })
}

fn tolerance<T: Scalar>(x: T, abs_tol: T) -> T {
    T::lit(REL_TOL) * x.abs() + abs_tol
}

fn parabola_vertex<T: Scalar>(a: T, fa: T, b: T, fb: T, c: T, fc: T) -> Option<T> {
    let p = (b - a) * (fb - fc);
    let q = (b - c) * (fb - fa);
    let den = T::lit(2.0) * (p - q);
    if den == T::zero() {
        return None;
    }
    let v = b - ((b - a) * p - (b - c) * q) / den;
    v.is_finite().then_some(v)
}

/// Brent's method on `[lo, hi]`, optionally seeded with an interior point.
fn brent<T: Scalar, F: FnMut(T) -> T>(
    f: &mut Counted<F>,
    mut lo: T,
    mut hi: T,
    seed: Option<(T, T)>,
    abs_tol: T,
) -> Result<(T, T)> {
    let golden = T::lit(0.381_966_011_250_105_1);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let (mut x, mut fx) = match seed {
        Some(s) => s,
        None => {
            let x = lo + golden * (hi - lo);
            (x, f.eval(x)?)
        }
    };
    let (mut w, mut fw, mut v, mut fv) = (x, fx, x, fx);
    let mut d = T::zero();
    let mut e = T::zero();

    while f.evals < MAX_EVALS {
        let xm = half * (lo + hi);
        let tol1 = tolerance(x, abs_tol);
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (hi - lo) {
            break;
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (half * q * e_prev).abs() && p > q * (lo - x) && p < q * (hi - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { lo - x } else { hi - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f.eval(u)?;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((x, fx))
}
