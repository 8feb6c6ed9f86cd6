mod common;

use common::*;
use proptest::prelude::*;
use regdiff::grid::{l2_inner, l2_norm};
use regdiff::line_search::{initial_step, search};
use regdiff::objective::{directional_derivative, evaluate_g, l2_gradient, residual, second_derivative};
use regdiff::sobolev::{h1_inner, helmholtz_solve, pr_coefficient, sobolev_gradient, BoundaryKind, CgVariant};
use regdiff::transform::{transform_data, transform_data_with_boundary, u_of_psi, u_prime_of_psi, TransformedData};
use regdiff::{Grid64, SampledFunction64};

const ALL_BC: [BoundaryKind; 4] =
    [BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::RobinLeft, BoundaryKind::RobinRight];

fn smooth_setup(
    n_lo: usize,
    n_hi: usize,
) -> impl Strategy<Value = (TransformedData<f64>, SampledFunction64, SampledFunction64)> {
    (interval(), n_lo..n_hi, shape(), shape(), shape()).prop_map(|((a, b), n, d, p, h)| {
        let g = Grid64::uniform(a, b, n).unwrap();
        (transform_data(&d.sample(g)), p.smooth().sample(g), h.smooth().sample(g))
    })
}

fn setup(
    n_lo: usize,
    n_hi: usize,
) -> impl Strategy<Value = (TransformedData<f64>, SampledFunction64, SampledFunction64)> {
    (interval(), n_lo..n_hi, shape(), shape(), shape()).prop_map(|((a, b), n, d, p, h)| {
        let g = Grid64::uniform(a, b, n).unwrap();
        (transform_data(&d.sample(g)), p.sample(g), h.sample(g))
    })
}

/// Stiffness matrix of linear elements plus the trapezoid mass, assembled directly.
fn h1_matrix(g: Grid64) -> nalgebra::DMatrix<f64> {
    let n = g.n();
    let mut m = weight_matrix(g);
    let k = 1.0 / g.h();
    for i in 0..n - 1 {
        m[(i, i)] += k;
        m[(i + 1, i + 1)] += k;
        m[(i, i + 1)] -= k;
        m[(i + 1, i)] -= k;
    }
    m
}

fn vec_of(f: &SampledFunction64) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_column_slice(f.values())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gradient_matches_central_differences((data, psi, h) in setup(11, 300)) {
        let grad = l2_gradient(&psi, &data).unwrap();
        let scale = l2_norm(&psi).max(1.0);
        let eps = 1e-5 * scale;
        let fd = (evaluate_g(&psi.axpy(eps, &h), &data).unwrap() - evaluate_g(&psi.axpy(-eps, &h), &data).unwrap()) / (2.0 * eps);
        let an = l2_inner(&grad, &h).unwrap();
        let size = l2_norm(&grad) * l2_norm(&h);
        prop_assert!((fd - an).abs() <= 1e-5 * size.max(an.abs()), "{} vs {}", fd, an);
        let dd = directional_derivative(&psi, &h, &data).unwrap();
        prop_assert!((dd - an).abs() <= 1e-10 * size.max(1e-300));
    }

    #[test]
    fn g_is_exactly_quadratic((data, psi, h) in setup(11, 300), alpha in -3.0..3.0f64) {
        let g0 = evaluate_g(&psi, &data).unwrap();
        let lhs = evaluate_g(&psi.axpy(alpha, &h), &data).unwrap();
        let rhs = g0 + alpha * directional_derivative(&psi, &h, &data).unwrap()
            + 0.5 * alpha * alpha * second_derivative(&h, &h, &data).unwrap();
        let scale = g0 + alpha * alpha * second_derivative(&h, &h, &data).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * scale.max(lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn second_derivative_is_symmetric_and_positive((data, h, k) in setup(11, 200)) {
        let hk = second_derivative(&h, &k, &data).unwrap();
        let kh = second_derivative(&k, &h, &data).unwrap();
        prop_assert!((hk - kh).abs() <= 1e-12 * hk.abs().max(1e-300));
        if l2_norm(&h) > 1e-8 {
            prop_assert!(second_derivative(&h, &h, &data).unwrap() > 0.0);
        }
    }

    #[test]
    // The discrete identities below carry an O(h^2) endpoint term from summation by
    // parts, so they are checked on fine grids.
    fn equivalent_form((data, psi, _h) in smooth_setup(6001, 8001)) {
        let u = &data.u;
        let up = &data.u_prime;
        let u_psi = u_of_psi(&psi, &data).unwrap();
        let up_psi = u_prime_of_psi(&psi, &data).unwrap();
        let t_psi = data.operator.apply(&psi);
        let rhs = l2_inner(up, up).unwrap() - l2_inner(&up_psi, &up_psi).unwrap()
            - 2.0 * l2_inner(&t_psi, &(u - &u_psi)).unwrap();
        let g = evaluate_g(&psi, &data).unwrap();
        let scale = l2_inner(up, up).unwrap() + l2_inner(&up_psi, &up_psi).unwrap();
        prop_assert!((g - rhs).abs() <= 1e-6 * scale.max(g), "{} vs {}", g, rhs);
    }

    #[test]
    fn difference_identity((data, p1, p2) in smooth_setup(6001, 8001)) {
        let u1 = u_of_psi(&p1, &data).unwrap();
        let u2 = u_of_psi(&p2, &data).unwrap();
        let mid = &data.u - &(&u1 + &u2).scale(0.5);
        let rhs = -2.0 * l2_inner(&data.operator.apply(&(&p1 - &p2)), &mid).unwrap();
        let (g1, g2) = (evaluate_g(&p1, &data).unwrap(), evaluate_g(&p2, &data).unwrap());
        prop_assert!(((g1 - g2) - rhs).abs() <= 1e-6 * (g1 + g2), "{} vs {}", g1 - g2, rhs);
    }

    #[test]
    fn two_sided_bound((data, psi, _h) in setup(11, 400)) {
        let r = residual(&psi, &data).unwrap();
        let diff = &data.u - &u_of_psi(&psi, &data).unwrap();
        let h1 = l2_inner(&diff, &diff).unwrap() + l2_inner(&r, &r).unwrap();
        let g = evaluate_g(&psi, &data).unwrap();
        prop_assert!(g <= h1 * (1.0 + 1e-12));
        prop_assert!(h1 / (1.0 + 1.0 / data.lambda1) <= g * (1.0 + 1e-12), "{} {}", h1, g);
    }

    #[test]
    fn perturbation_stability((a, b) in interval(), n in 21usize..300, p in shape(), noise in shape()) {
        let g = Grid64::uniform(a, b, n).unwrap();
        let base = transform_data(&SampledFunction64::zeros(g));
        let phi = p.sample(g);
        // data whose discrete derivative is exactly phi
        let clean = base.to_data_scale(&base.operator.apply(&phi));
        let exact = transform_data_with_boundary(&clean, 0.0, 0.0);
        let noisy = &clean + &noise.sample(g).scale(0.1);
        let perturbed = transform_data_with_boundary(&noisy, 0.0, 0.0);
        let du = &exact.u - &perturbed.u;
        let dup = &exact.u_prime - &perturbed.u_prime;
        let delta_u2 = l2_inner(&du, &du).unwrap() + l2_inner(&dup, &dup).unwrap();
        prop_assert!(evaluate_g(&phi, &exact).unwrap() <= 1e-20 + 1e-12 * l2_inner(&exact.u_prime, &exact.u_prime).unwrap());
        prop_assert!(evaluate_g(&phi, &perturbed).unwrap() <= delta_u2 * (1.0 + 1e-10));
    }

    #[test]
    fn sobolev_gradient_is_a_descent_direction((data, psi, _h) in setup(11, 300)) {
        let l2 = l2_gradient(&psi, &data).unwrap();
        prop_assume!(l2_norm(&l2) > 1e-10);
        for bc in ALL_BC {
            let s = sobolev_gradient(&l2, bc);
            prop_assert!(directional_derivative(&psi, &s, &data).unwrap() > 0.0, "{:?}", bc);
        }
    }

    #[test]
    fn sobolev_gradient_smooths((a, b) in interval(), n in 5usize..300, f in shape()) {
        let g = Grid64::uniform(a, b, n).unwrap();
        let f = f.sample(g);
        for bc in ALL_BC {
            let s = sobolev_gradient(&f, bc);
            // equality for constants, so the slack is rounding only
            prop_assert!(h1_inner(&s, &s).unwrap().sqrt() <= l2_norm(&f) * (1.0 + 1e-9), "{:?}", bc);
        }
    }

    #[test]
    fn pr_coefficient_is_the_h1_ratio((a, b) in interval(), n in 5usize..40, p in shape(), q in shape()) {
        let g = Grid64::uniform(a, b, n).unwrap();
        let m = h1_matrix(g);
        let (l2_old, l2_new) = (p.sample(g), q.sample(g));
        let (g_old, g_new) = (sobolev_gradient(&l2_old, BoundaryKind::Neumann), sobolev_gradient(&l2_new, BoundaryKind::Neumann));
        let num = (vec_of(&g_new) - vec_of(&g_old)).dot(&(&m * vec_of(&g_new)));
        let den = vec_of(&g_old).dot(&(&m * vec_of(&g_old)));
        let expected = (num / den).max(0.0);
        let got = pr_coefficient(&g_new, &g_old, &l2_new, &l2_old, CgVariant::L2H1).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{} vs {}", got, expected);

        let w = weight_matrix(g);
        let num = (vec_of(&g_new) - vec_of(&g_old)).dot(&(&w * vec_of(&g_new)));
        let den = vec_of(&g_old).dot(&(&w * vec_of(&g_old)));
        let expected = (num / den).max(0.0);
        let got = pr_coefficient(&g_new, &g_old, &l2_new, &l2_old, CgVariant::H1H1).unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn line_search_accepts_the_quadratic_step((data, psi, _h) in setup(11, 300)) {
        let dir = sobolev_gradient(&l2_gradient(&psi, &data).unwrap(), BoundaryKind::Neumann);
        prop_assume!(l2_norm(&dir) > 1e-10);
        let a0 = initial_step(&psi, &dir, &data).unwrap();
        prop_assume!(a0 > 0.0);
        let r = search(|a| evaluate_g(&psi.axpy(-a, &dir), &data).unwrap(), a0).unwrap();
        prop_assert!((r.alpha - a0).abs() <= 1e-4 * a0, "{} vs {}", r.alpha, a0);
        prop_assert!(r.evals <= 2 + 5);
        prop_assert!(r.f_alpha <= evaluate_g(&psi, &data).unwrap());
    }
}

#[test]
fn helmholtz_is_second_order() {
    let pi = std::f64::consts::PI;
    for (bc, k) in [(BoundaryKind::Dirichlet, 1.0), (BoundaryKind::Dirichlet, 3.0), (BoundaryKind::Neumann, 2.0)] {
        let exact = |x: f64| {
            let s = if bc == BoundaryKind::Dirichlet { (k * pi * x).sin() } else { (k * pi * x).cos() };
            s / (1.0 + k * k * pi * pi)
        };
        let errs: Vec<f64> = [51usize, 101, 201]
            .iter()
            .map(|&n| {
                let g = Grid64::uniform(0.0, 1.0, n).unwrap();
                let rhs = SampledFunction64::from_fn(g, |x| exact(x) * (1.0 + k * k * pi * pi));
                let s = helmholtz_solve(&rhs, bc);
                (0..n).map(|i| (s[i] - exact(g.x(i))).abs()).fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.2..=4.8).contains(&ratio), "{bc:?} k={k}: {ratio}");
        }
    }
}

#[test]
fn helmholtz_boundary_behaviour() {
    let slopes = |n: usize| {
        let g = Grid64::uniform(0.0, 2.0, n).unwrap();
        let rhs = SampledFunction64::from_fn(g, |x| (3.0 * x).cos() + x * x);
        let d = helmholtz_solve(&rhs, BoundaryKind::Dirichlet);
        assert_eq!(d.first(), 0.0);
        assert_eq!(d.last(), 0.0);
        let s = helmholtz_solve(&rhs, BoundaryKind::Neumann);
        let h = g.h();
        let left = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * h);
        let right = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / (2.0 * h);
        (left.abs().max(right.abs()), s.max_abs())
    };
    // the one-sided slope of the discrete solution vanishes at second order
    let (coarse, _) = slopes(401);
    let (fine, _) = slopes(801);
    assert!((3.2..=4.8).contains(&(coarse / fine)), "{}", coarse / fine);
    let (slope, scale) = slopes(8001);
    assert!(slope <= 1e-6 * scale, "{slope} vs {scale}");
}

#[test]
fn second_derivative_of_the_constant_direction() {
    // T 1 = 2x - 1 on [0, 1]; w' = x - x^2 - 1/6 has squared norm 1/180
    let g = Grid64::uniform(0.0, 1.0, 2001).unwrap();
    let data = transform_data(&SampledFunction64::zeros(g));
    let one = SampledFunction64::constant(g, 1.0);
    let val = second_derivative(&one, &one, &data).unwrap();
    assert!((val - 1.0 / 90.0).abs() <= 1e-6, "{val}");
}
