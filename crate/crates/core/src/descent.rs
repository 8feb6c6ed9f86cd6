//! The regularizing descent loop, its stopping rules and iteration history.
//!
//! Each step moves `psi <- psi - alpha d`. The direction `d` is a Sobolev (or
//! L2) gradient, optionally combined with the previous direction by
//! Polak-Ribiere. The step `alpha` comes from [`crate::line_search::search`],
//! started at the exact minimizer of the quadratic model.
//!
//! Stopping is the regularization. With a known noise level, the discrepancy
//! rule stops once the fitted data fall within `tau * delta` of the samples.
//! Without it, the heuristic rule watches `||u_psi - u||` and stops at its first
//! uptick or plateau. It then returns the iterate where that monitor was
//! smallest.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, l2_norm, weighted_dot, Grid, SampledFunction};
use crate::line_search::{search, step_from};
use crate::objective::gradient_from_residual;
use crate::scalar::Scalar;
use crate::sobolev::{next_direction, pr_coefficient, sobolev_gradient, BoundaryKind, CgVariant};
use crate::transform::{solve_from_source, TransformedData};

/// Metric in which the gradient of `G` is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GradientKind<T> {
    /// The plain L2 gradient.
    L2,
    /// `blend * (I - D^2)^{-1} grad + (1 - blend) * grad`; `blend = 1` is the
    /// pure Sobolev gradient.
    Sobolev { bc: BoundaryKind, blend: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientScheme<T> {
    pub kind: GradientKind<T>,
    pub cg: CgVariant,
}

impl<T: Scalar> GradientScheme<T> {
    pub fn sobolev(bc: BoundaryKind) -> Self {
        Self { kind: GradientKind::Sobolev { bc, blend: T::one() }, cg: CgVariant::None }
    }

    pub fn l2() -> Self {
        Self { kind: GradientKind::L2, cg: CgVariant::None }
    }

    pub fn with_cg(mut self, cg: CgVariant) -> Self {
        self.cg = cg;
        self
    }

    pub fn with_blend(mut self, blend: T) -> Self {
        if let GradientKind::Sobolev { bc, .. } = self.kind {
            self.kind = GradientKind::Sobolev { bc, blend };
        }
        self
    }

    fn precondition(&self, l2: &SampledFunction<T>) -> SampledFunction<T> {
        match self.kind {
            GradientKind::L2 => l2.clone(),
            GradientKind::Sobolev { bc, blend } => {
                let s = sobolev_gradient(l2, bc);
                if blend == T::one() {
                    s
                } else {
                    s.scale(blend).axpy(T::one() - blend, l2)
                }
            }
        }
    }
}

impl<T: Scalar> Default for GradientScheme<T> {
    fn default() -> Self {
        Self::sobolev(BoundaryKind::Neumann)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeuristicRule<T> {
    /// Relative increase of `residual_u` that counts as an uptick.
    pub uptick: T,
    /// Number of trailing steps compared for a plateau.
    pub patience: usize,
    /// Relative change below which `residual_u` counts as flat.
    pub sat_tol: T,
}

impl<T: Scalar> Default for HeuristicRule<T> {
    fn default() -> Self {
        Self { uptick: T::lit(1e-3), patience: 3, sat_tol: T::lit(1e-4) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule<T> {
    /// Stop once `||g_fit - g|| < tau * delta`.
    Discrepancy {
        delta: T,
        tau: T,
    },
    Heuristic(HeuristicRule<T>),
    /// Run until `max_iter`.
    Disabled,
}

impl<T: Scalar> Default for StoppingRule<T> {
    fn default() -> Self {
        Self::Heuristic(HeuristicRule::default())
    }
}

#[derive(Clone, Debug)]
pub struct DescentConfig<T> {
    pub gradient: GradientScheme<T>,
    pub stop: StoppingRule<T>,
    /// Maximum number of iterates kept, counting `psi_0`.
    pub max_iter: usize,
    /// Starting iterate; `None` means zero.
    pub psi0: Option<SampledFunction<T>>,
    pub record_history: bool,
}

impl<T: Scalar> Default for DescentConfig<T> {
    fn default() -> Self {
        Self {
            gradient: GradientScheme::default(),
            stop: StoppingRule::default(),
            max_iter: 500,
            psi0: None,
            record_history: true,
        }
    }
}

impl<T: Scalar> DescentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if let GradientKind::Sobolev { blend, .. } = self.gradient.kind {
            if !(blend >= T::zero() && blend <= T::one()) {
                return Err(Error::Config(format!("blend weight must lie in [0, 1], got {blend}")));
            }
        }
        match self.stop {
            StoppingRule::Discrepancy { delta, tau } => {
                if !(delta > T::zero() && delta.is_finite()) {
                    return Err(Error::Config(format!("noise level delta must be positive, got {delta}")));
                }
                if !(tau >= T::one() && tau.is_finite()) {
                    return Err(Error::Config(format!("tau must be at least 1, got {tau}")));
                }
            }
            StoppingRule::Heuristic(rule) => {
                if !(rule.uptick >= T::zero()) || !(rule.sat_tol >= T::zero()) || rule.patience == 0 {
                    return Err(Error::Config("heuristic thresholds must be non-negative, patience at least 1".into()));
                }
            }
            StoppingRule::Disabled => {}
        }
        Ok(())
    }
}

/// Straight line through `(a, left)` and `(b, right)`.
pub fn straight_line<T: Scalar>(grid: Grid<T>, left: T, right: T) -> SampledFunction<T> {
    let (a, len) = (grid.a(), grid.length());
    SampledFunction::from_fn(grid, |x| left + (right - left) * (x - a) / len)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub m: usize,
    pub g_value: T,
    /// `||g_fit - g||` with `g_fit` the data-scale image of `psi_m`.
    pub residual_g: T,
    pub residual_u: T,
    pub residual_uprime: T,
    /// Step that produced this iterate; zero for `psi_0`.
    pub step_alpha: T,
    /// Norm of the L2 gradient of the minimized functional at `psi_m`.
    pub grad_l2_norm: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    DiscrepancyMet,
    HeuristicUptick,
    Saturation,
    MaxIter,
    /// Gradient or objective at rounding level, or no further decrease possible.
    Stationary,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::DiscrepancyMet => "discrepancy",
            Self::HeuristicUptick => "uptick",
            Self::Saturation => "saturation",
            Self::MaxIter => "max_iter",
            Self::Stationary => "stationary",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Self::DiscrepancyMet, Self::HeuristicUptick, Self::Saturation, Self::MaxIter, Self::Stationary]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown stop reason {s:?}"))
    }
}

#[derive(Clone, Debug)]
pub struct DescentReport<T> {
    pub phi_hat: SampledFunction<T>,
    /// `Op phi_hat`, on the scale of `g3`.
    pub smoothed_fit: SampledFunction<T>,
    /// `smoothed_fit` mapped back to the scale of the data.
    pub data_fit: SampledFunction<T>,
    pub stop_reason: StopReason,
    /// Iterate at which the stopping rule fired.
    pub stop_index: usize,
    /// Iterate returned as `phi_hat`.
    pub selected_index: usize,
    pub history: Vec<IterationRecord<T>>,
}

pub fn discrepancy_stop<T: Scalar>(residual_g: T, delta: T, tau: T) -> bool {
    residual_g < tau * delta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicDecision {
    Continue,
    StopAt { index: usize, reason: StopReason },
}

/// Decision after the last record of `history`.
pub fn heuristic_stop<T: Scalar>(history: &[IterationRecord<T>], rule: &HeuristicRule<T>) -> HeuristicDecision {
    let m = match history.len() {
        0 | 1 => return HeuristicDecision::Continue,
        len => len - 1,
    };
    let r = |i: usize| history[i].residual_u;
    let argmin = || (0..=m).fold(0, |best, i| if r(i) < r(best) { i } else { best });
    if r(m) > r(m - 1) * (T::one() + rule.uptick) {
        return HeuristicDecision::StopAt { index: argmin(), reason: StopReason::HeuristicUptick };
    }
    if m >= rule.patience {
        let flat = (1..=rule.patience).all(|k| {
            let diff = (r(m) - r(m - k)).abs();
            diff == T::zero() || diff < rule.sat_tol * r(m - k)
        });
        if flat {
            return HeuristicDecision::StopAt { index: argmin(), reason: StopReason::Saturation };
        }
    }
    HeuristicDecision::Continue
}

/// Minimizes `G` from `config.psi0`.
pub fn run_descent<T: Scalar>(data: &TransformedData<T>, config: &DescentConfig<T>) -> Result<DescentReport<T>> {
    descend(data, config, Functional::Method, &mut |_, _| {})
}

/// [`run_descent`], calling `observer(m, psi_m)` on every iterate.
pub fn run_descent_observed<T: Scalar>(
    data: &TransformedData<T>,
    config: &DescentConfig<T>,
    observer: &mut dyn FnMut(usize, &SampledFunction<T>),
) -> Result<DescentReport<T>> {
    descend(data, config, Functional::Method, observer)
}

/// Minimizes the raw data misfit `||Op psi - g3||^2` with the same machinery.
/// Used as a reference iteration whose data residual decreases monotonically.
pub fn run_landweber<T: Scalar>(data: &TransformedData<T>, config: &DescentConfig<T>) -> Result<DescentReport<T>> {
    descend(data, config, Functional::Landweber, &mut |_, _| {})
}

pub fn run_landweber_observed<T: Scalar>(
    data: &TransformedData<T>,
    config: &DescentConfig<T>,
    observer: &mut dyn FnMut(usize, &SampledFunction<T>),
) -> Result<DescentReport<T>> {
    descend(data, config, Functional::Landweber, observer)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Functional {
    Method,
    Landweber,
}

/// Residual, value and gradient of the minimized functional at one iterate.
///
/// Both functionals have the form `||r(psi)||^2` with `r(psi - a d) = r - a q(d)`.
struct State<T> {
    residual: SampledFunction<T>,
    value: T,
    grad: SampledFunction<T>,
}

impl Functional {
    fn state<T: Scalar>(self, psi: &SampledFunction<T>, data: &TransformedData<T>) -> State<T> {
        let op_psi = data.operator.apply(psi);
        let (residual, grad) = match self {
            Self::Method => {
                let r = &data.u_prime - &solve_from_source(&op_psi);
                let g = gradient_from_residual(&r, data);
                (r, g)
            }
            Self::Landweber => {
                let r = &op_psi - &data.g3;
                let g = data.operator.apply_adjoint(&r).scale(T::lit(2.0));
                (r, g)
            }
        };
        let value = weighted_dot(&data.grid, residual.values(), residual.values());
        State { residual, value, grad }
    }

    fn image<T: Scalar>(self, d: &SampledFunction<T>, data: &TransformedData<T>) -> SampledFunction<T> {
        let op_d = data.operator.apply(d);
        match self {
            Self::Method => -&solve_from_source(&op_d),
            Self::Landweber => op_d,
        }
    }

    /// Size of the functional's residual at which it is at rounding level.
    fn rounding_floor<T: Scalar>(self, data: &TransformedData<T>) -> T {
        let (factor, shift) = data.scaling();
        let len = data.grid.length();
        let data_size = factor * l2_norm(&data.g_tilde) + shift.abs() * len.sqrt();
        let size = match self {
            Self::Method => len * data_size,
            Self::Landweber => data_size,
        };
        T::lit(1e3) * T::epsilon() * size
    }
}

fn record<T: Scalar>(
    psi: &SampledFunction<T>,
    data: &TransformedData<T>,
    m: usize,
    alpha: T,
    grad_norm: T,
) -> IterationRecord<T> {
    let op_psi = data.operator.apply(psi);
    let r = &data.u_prime - &solve_from_source(&op_psi);
    let g_value = weighted_dot(&data.grid, r.values(), r.values());
    let fit = data.to_data_scale(&op_psi);
    IterationRecord {
        m,
        g_value,
        residual_g: l2_norm(&(&fit - &data.g_tilde)),
        residual_u: l2_norm(&cumulative_integral(&r)),
        residual_uprime: g_value.sqrt(),
        step_alpha: alpha,
        grad_l2_norm: grad_norm,
    }
}

fn descend<T: Scalar>(
    data: &TransformedData<T>,
    config: &DescentConfig<T>,
    functional: Functional,
    observer: &mut dyn FnMut(usize, &SampledFunction<T>),
) -> Result<DescentReport<T>> {
    config.validate()?;
    let grid = data.grid;
    let mut psi = match &config.psi0 {
        Some(p) => {
            p.check_same_grid(&data.u)?;
            p.clone()
        }
        None => SampledFunction::zeros(grid),
    };
    let scheme = config.gradient;
    let floor = functional.rounding_floor(data);

    let mut state = functional.state(&psi, data);
    let mut history = vec![record(&psi, data, 0, T::zero(), l2_norm(&state.grad))];
    observer(0, &psi);
    let mut best = (0usize, history[0].residual_u, psi.clone());
    // previous (direction, preconditioned gradient, L2 gradient)
    let mut previous: Option<(SampledFunction<T>, SampledFunction<T>, SampledFunction<T>)> = None;

    let (stop_reason, stop_index) = loop {
        let m = history.len() - 1;
        let current = history[m];
        match config.stop {
            StoppingRule::Discrepancy { delta, tau } => {
                if discrepancy_stop(current.residual_g, delta, tau) {
                    break (StopReason::DiscrepancyMet, m);
                }
            }
            StoppingRule::Heuristic(rule) => {
                if let HeuristicDecision::StopAt { reason, .. } = heuristic_stop(&history, &rule) {
                    break (reason, m);
                }
            }
            StoppingRule::Disabled => {}
        }
        if history.len() >= config.max_iter {
            break (StopReason::MaxIter, m);
        }
        if state.value.sqrt() <= floor || current.grad_l2_norm == T::zero() {
            break (StopReason::Stationary, m);
        }

        let g = scheme.precondition(&state.grad);
        let mut d = match &previous {
            Some((d_old, g_old, l2_old)) if scheme.cg != CgVariant::None => {
                let gamma = pr_coefficient(&g, g_old, &state.grad, l2_old, scheme.cg)?;
                next_direction(d_old, &g, gamma)
            }
            _ => g.clone(),
        };
        let mut slope = weighted_dot(&grid, d.values(), state.grad.values());
        if !(slope > T::zero()) {
            d = g.clone();
            slope = weighted_dot(&grid, d.values(), state.grad.values());
        }
        if !(slope > T::zero()) || !slope.is_finite() {
            break (StopReason::Stationary, m);
        }

        let q = functional.image(&d, data);
        let curvature = T::lit(2.0) * weighted_dot(&grid, q.values(), q.values());
        let alpha0 = step_from(slope, curvature, weighted_dot(&grid, d.values(), d.values()))?;
        let r = state.residual.values();
        let qv = q.values();
        let n = r.len();
        let half = T::lit(0.5);
        let line = |a: T| {
            let sq = |i: usize| {
                let e = r[i] - a * qv[i];
                e * e
            };
            let interior: T = (1..n - 1).map(sq).sum();
            grid.h() * (interior + half * (sq(0) + sq(n - 1)))
        };
        let step = search(line, alpha0)?;
        if !(step.f_alpha < state.value) {
            break (StopReason::Stationary, m);
        }

        // the line search model and the recomputed value can disagree by rounding
        let trial = psi.axpy(-step.alpha, &d);
        let trial_state = functional.state(&trial, data);
        if !(trial_state.value < state.value) {
            break (StopReason::Stationary, m);
        }
        psi = trial;
        let l2_old = std::mem::replace(&mut state, trial_state).grad;
        previous = Some((d, g, l2_old));
        let rec = record(&psi, data, m + 1, step.alpha, l2_norm(&state.grad));
        observer(m + 1, &psi);
        if rec.residual_u < best.1 {
            best = (m + 1, rec.residual_u, psi.clone());
        }
        history.push(rec);
    };

    let heuristic = matches!(config.stop, StoppingRule::Heuristic(_));
    let (selected_index, phi_hat) = if heuristic { (best.0, best.2) } else { (stop_index, psi) };
    let smoothed_fit = data.operator.apply(&phi_hat);
    let data_fit = data.to_data_scale(&smoothed_fit);
    if !config.record_history {
        history.clear();
    }
    Ok(DescentReport { phi_hat, smoothed_fit, data_fit, stop_reason, stop_index, selected_index, history })
}
