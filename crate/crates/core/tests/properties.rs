//! Randomised invariants of the expression, geometry, analysis and solver layers.

mod common;

use minkowski_graphs::analysis::{
    fit_gradient_bound, heinz_check, integrate_ball, salavessa_check, stokes_check, unit_ball_constants,
    BallDomain, CheckOptions, QuadratureSpec, Sampling,
};
use minkowski_graphs::geometry::{
    classify_point, hyperbolic_angle, induced_metric, lorentz_inner, mean_curvature, point_report, tilt,
    tilt_of_grad_norm, unit_normal, Catalog, DEFAULT_LIGHTLIKE_TOLERANCE,
};
use minkowski_graphs::solvers::{solve_dirichlet_cmc, solve_radial_cmc, SolverConfig};
use minkowski_graphs::{CausalType, Expression, GraphSurface, HeightField};
use proptest::prelude::*;

const TAU: f64 = DEFAULT_LIGHTLIKE_TOLERANCE;

fn gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn hyperboloid(n: usize, h: f64) -> GraphSurface {
    Catalog::Hyperboloid { n, h }.build().unwrap()
}

fn perturbed(seed: u64, n: usize, time_like: bool) -> GraphSurface {
    let mut rng = common::rng(seed);
    let pert = common::gentle_perturbation(&mut rng, n);
    let text = if time_like { format!("2*u{n} + {pert}") } else { pert };
    GraphSurface::parse(&text, n).unwrap()
}

fn fast_options(n: usize) -> CheckOptions {
    CheckOptions {
        sampling: Some(Sampling::new(if n == 2 { 33 } else { 201 })),
        quadrature: Some(QuadratureSpec::tensor_polar(96)),
        ..CheckOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ad_derivatives_match_finite_differences(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = common::rng(seed);
        let text = common::random_expression(&mut rng, n, 4);
        let e = Expression::parse(&text, n).unwrap();
        let p = common::random_point(&mut rng, n, 1.5);
        let jet = e.evaluate_jet(&p).unwrap();
        let f = |q: &[f64]| e.evaluate(q).unwrap();
        let shifted = |d: &[(usize, f64)]| {
            let mut q = p.clone();
            for &(i, h) in d {
                q[i] += h;
            }
            f(&q)
        };
        let h1 = 1e-5;
        for i in 0..n {
            let fd = (shifted(&[(i, h1)]) - shifted(&[(i, -h1)])) / (2.0 * h1);
            prop_assert!(gap(jet.gradient[i], fd) <= 1e-6, "{text}: d{i} {} vs {fd}", jet.gradient[i]);
        }
        let h2 = 1e-4;
        for i in 0..n {
            for j in 0..n {
                let fd = (shifted(&[(i, h2), (j, h2)]) - shifted(&[(i, h2), (j, -h2)])
                    - shifted(&[(i, -h2), (j, h2)])
                    + shifted(&[(i, -h2), (j, -h2)]))
                    / (4.0 * h2 * h2);
                let ad = jet.hess(i, j);
                prop_assert!(gap(ad, fd) <= 1e-4, "{text}: d{i}d{j} {ad} vs {fd}");
                prop_assert!((ad - jet.hess(j, i)).abs() <= 1e-12 * ad.abs().max(1.0));
            }
        }
    }

    #[test]
    fn evaluation_is_deterministic_and_survives_rendering(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = common::rng(seed);
        let e = Expression::parse(&common::random_expression(&mut rng, n, 5), n).unwrap();
        let p = common::random_point(&mut rng, n, 2.0);
        let again = Expression::parse(&e.render(), n).unwrap();
        prop_assert_eq!(again.root(), e.root());
        let a = e.evaluate_jet(&p).unwrap();
        prop_assert_eq!(&a, &e.evaluate_jet(&p).unwrap());
        prop_assert_eq!(&a, &again.evaluate_jet(&p).unwrap());
    }

    #[test]
    fn hyperboloids_have_constant_mean_curvature(
        n in 1usize..=4,
        h in prop::sample::select(vec![0.5, 1.0, 2.0]),
        seed in any::<u64>(),
    ) {
        let s = hyperboloid(n, h);
        let mut rng = common::rng(seed);
        for _ in 0..10 {
            let p = common::random_point(&mut rng, n, 5.0);
            prop_assert!((mean_curvature(&s, &p).unwrap() - h).abs() <= 1e-9);
        }
    }

    #[test]
    fn space_like_point_identities(seed in any::<u64>(), n in 1usize..=3) {
        let s = perturbed(seed, n, false);
        let p = common::random_point(&mut common::rng(seed ^ 1), n, 1.4);
        let report = point_report(&s, &p, TAU).unwrap();
        prop_assert_eq!(report.causal, CausalType::SpaceLike);
        let t = tilt(&s, &p).unwrap();
        let theta = hyperbolic_angle(&s, &p).unwrap();
        prop_assert!((theta.sinh() - t).abs() <= 1e-12 * t.max(1.0));
        prop_assert_eq!(report.sinh_theta, Some(t));

        let det = induced_metric(&s, &p).unwrap().det;
        prop_assert!(gap(det, 1.0 - report.grad_norm.powi(2)) <= 1e-10);

        let nu = unit_normal(&s, &p).unwrap();
        prop_assert!((lorentz_inner(&nu, &nu) + 1.0).abs() <= 1e-10);
        let mut e_last = vec![0.0; n + 1];
        e_last[n] = 1.0;
        prop_assert!((lorentz_inner(&nu, &e_last) + theta.cosh()).abs() <= 1e-10);
    }

    #[test]
    fn negating_the_field_negates_mean_curvature(
        seed in any::<u64>(),
        n in 1usize..=3,
        time_like in any::<bool>(),
    ) {
        let s = perturbed(seed, n, time_like);
        let p = common::random_point(&mut common::rng(seed ^ 2), n, 1.4);
        let h = mean_curvature(&s, &p).unwrap();
        let flipped = mean_curvature(&s.negated(), &p).unwrap();
        prop_assert!((h + flipped).abs() <= 1e-12 * h.abs().max(1.0));

        let g2 = s.jet(&p).unwrap().grad_norm_sq();
        prop_assert_eq!(classify_point(&s, &p, TAU).unwrap(), CausalType::from_grad_norm_sq(g2, TAU));
    }

    #[test]
    fn tilt_is_monotone_on_each_branch(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 1.0f64..10.0, d in 1.0f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(lo < hi && hi < 1.0 - 1e-6);
        prop_assert!(tilt_of_grad_norm(lo) < tilt_of_grad_norm(hi));
        let (lo, hi) = if c < d { (c, d) } else { (d, c) };
        prop_assume!(lo < hi && lo > 1.0 + 1e-6);
        prop_assert!(tilt_of_grad_norm(lo) > tilt_of_grad_norm(hi));
    }

    #[test]
    fn radial_profiles_satisfy_the_first_integral(
        n in 1usize..=3,
        h in 0.2f64..3.0,
        r_max in 0.5f64..5.0,
    ) {
        let p = solve_radial_cmc(n, h, r_max, 0.01).unwrap();
        prop_assert!(p.max_relative_first_integral_residual() <= 1e-12);
        prop_assert_eq!(p.psi_values[0], 1.0 / h);
        prop_assert!(p.psi_prime_values.iter().all(|&d| (0.0..1.0).contains(&d)));
        prop_assert!(p.psi_values.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn stokes_identity_holds(seed in any::<u64>(), time_like in any::<bool>(), radius in 0.5f64..2.0) {
        let s = perturbed(seed, 2, time_like);
        let r = stokes_check(&s, radius, &CheckOptions::default()).unwrap();
        prop_assert!(r.passed, "{}", r.to_json());
        prop_assert_eq!(r.passed, r.residual <= r.tolerance + r.quadrature_error);
    }

    #[test]
    fn heinz_never_fails_under_a_fitted_bound(
        seed in any::<u64>(),
        n in 1usize..=2,
        time_like in any::<bool>(),
        radius in 0.5f64..2.0,
        k in -0.5f64..=0.0,
    ) {
        // a nonzero tilt at the origin rules out k > 0, so only k <= 0 is fitted here
        let s = perturbed(seed, n, time_like);
        let opts = fast_options(n);
        let fit = fit_gradient_bound(&s, radius, k, &opts).unwrap();
        prop_assert!(fit.valid && fit.m > 0.0);
        let r = heinz_check(&s, radius, fit.m, k, &opts).unwrap();
        prop_assert!(r.passed, "{}", r.to_json());
        prop_assert_eq!(r.passed, r.lhs <= r.rhs + r.tolerance + r.quadrature_error);
    }

    #[test]
    fn heinz_never_fails_on_hyperboloids(
        n in 1usize..=2,
        h in 0.3f64..3.0,
        radius in 0.5f64..4.0,
        k in 0.05f64..=0.5,
    ) {
        let s = hyperboloid(n, h);
        let opts = fast_options(n);
        let fit = fit_gradient_bound(&s, radius, k, &opts).unwrap();
        let r = heinz_check(&s, radius, fit.m, k, &opts).unwrap();
        prop_assert!(r.passed, "{}", r.to_json());
    }

    #[test]
    fn salavessa_never_fails_on_space_like_graphs(seed in any::<u64>(), radius in 0.5f64..2.0) {
        let s = perturbed(seed, 2, false);
        let r = salavessa_check(&s, radius, &fast_options(2)).unwrap();
        prop_assert!(r.passed, "{}", r.to_json());
    }

    #[test]
    fn bounded_tilt_means_gradient_bounded_away_from_one(seed in any::<u64>(), n in 1usize..=3) {
        let s = perturbed(seed, n, false);
        let mut rng = common::rng(seed ^ 3);
        let (mut sup_tilt, mut sup_grad) = (0.0f64, 0.0f64);
        for _ in 0..200 {
            let p = common::random_point(&mut rng, n, 1.4);
            let r = point_report(&s, &p, TAU).unwrap();
            sup_tilt = sup_tilt.max(r.tilt.unwrap());
            sup_grad = sup_grad.max(r.grad_norm);
        }
        let c = sup_tilt / (1.0 + sup_tilt * sup_tilt).sqrt();
        prop_assert!(c < 1.0);
        prop_assert!((c - sup_grad).abs() <= 1e-12);
    }
}

/// `H = div(grad psi / sqrt|1 - |grad psi|^2|) / n` for both causal types,
/// with the divergence taken by central differences of the AD gradient.
#[test]
fn mean_curvature_matches_a_finite_difference_divergence() {
    let h = 1e-5;
    for seed in 0..50u64 {
        let n = 1 + (seed % 3) as usize;
        let s = perturbed(seed, n, seed % 2 == 1);
        let flux = |q: &[f64], i: usize| {
            let jet = s.jet(q).unwrap();
            jet.gradient[i] / (1.0 - jet.grad_norm_sq()).abs().sqrt()
        };
        let p = common::random_point(&mut common::rng(seed ^ 4), n, 1.4);
        let mut div = 0.0;
        for i in 0..n {
            let (mut fwd, mut back) = (p.clone(), p.clone());
            fwd[i] += h;
            back[i] -= h;
            div += (flux(&fwd, i) - flux(&back, i)) / (2.0 * h);
        }
        let oracle = div / n as f64;
        let hm = mean_curvature(&s, &p).unwrap();
        assert!(gap(hm, oracle) <= 1e-6, "seed {seed}: {hm} vs {oracle}");
    }
}

#[test]
fn sphere_area_is_n_times_ball_volume() {
    for n in 1..=10 {
        let (v, a) = unit_ball_constants(n).unwrap();
        assert!(gap(n as f64 * v, a) <= 1e-14 * a.max(1.0), "n = {n}");
        let half = n as f64 / 2.0;
        let oracle = std::f64::consts::PI.powf(half) / statrs::function::gamma::gamma(half + 1.0);
        assert!((v - oracle).abs() <= 1e-13 * oracle, "n = {n}: {v} vs {oracle}");
    }
    assert!(unit_ball_constants(0).is_err());
    assert!(unit_ball_constants(11).is_err());
}

#[test]
fn monte_carlo_agrees_with_tensor_rule_within_its_error() {
    for n in [2, 3] {
        let ball = BallDomain::new(n, 1.3).unwrap();
        let tensor_spec = QuadratureSpec::tensor_polar(if n == 2 { 128 } else { 32 });
        for (label, f) in [
            ("one", (|_: &[f64]| Ok(1.0)) as fn(&[f64]) -> minkowski_graphs::Result<f64>),
            ("radius squared", |p: &[f64]| Ok(p.iter().map(|x| x * x).sum())),
        ] {
            let tensor = integrate_ball(f, ball, &tensor_spec).unwrap();
            for seed in 0..8 {
                let mc = integrate_ball(f, ball, &QuadratureSpec::monte_carlo(20_000, seed)).unwrap();
                // a constant integrand has zero sample variance; leave room for round-off
                let roundoff = 1e-12 * tensor.value.abs();
                assert!(
                    (mc.value - tensor.value).abs() <= mc.error + tensor.error + roundoff,
                    "n = {n}, {label}, seed {seed}: {} vs {} (3 sigma {})",
                    mc.value,
                    tensor.value,
                    mc.error
                );
            }
        }
    }
}

#[test]
fn quadrature_rejects_coarse_resolutions() {
    let ball = BallDomain::new(2, 1.0).unwrap();
    let one = |_: &[f64]| Ok(1.0);
    assert!(integrate_ball(one, ball, &QuadratureSpec::tensor_polar(7)).is_err());
    assert!(integrate_ball(one, ball, &QuadratureSpec::monte_carlo(7, 0)).is_err());
    assert!(integrate_ball(one, ball, &QuadratureSpec::tensor_polar(8)).is_ok());
}

/// Radial profile at radius `r`, by cubic Hermite interpolation of the stored
/// values and slopes.
fn radial_at(p: &minkowski_graphs::solvers::RadialProfile, r: f64) -> f64 {
    let h = p.r_grid[1] - p.r_grid[0];
    let i = ((r / h) as usize).min(p.r_grid.len() - 2);
    let t = (r - p.r_grid[i]) / h;
    let (y0, y1) = (p.psi_values[i], p.psi_values[i + 1]);
    let (d0, d1) = (p.psi_prime_values[i] * h, p.psi_prime_values[i + 1] * h);
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
}

#[test]
fn dirichlet_solutions_reproduce_the_hyperboloid() {
    let (h, radius) = (1.0, 1.0);
    let exact = hyperboloid(2, h);
    let boundary = |x: f64, y: f64| exact.psi().evaluate(&[x, y]);
    let profile = solve_radial_cmc(2, h, 2.0, 1e-3).unwrap();

    let mut diagonal_errors = Vec::new();
    for m in [32, 64] {
        let sol = solve_dirichlet_cmc(h, radius, boundary, m, SolverConfig::default()).unwrap();
        assert!(sol.final_residual <= SolverConfig::default().newton_tol);

        // discrete gradient stays inside the guard
        let side = sol.side();
        for j in 1..side - 1 {
            for i in 1..side - 1 {
                if !sol.unknown[j * side + i] {
                    continue;
                }
                let gx = (sol.value(i + 1, j) - sol.value(i - 1, j)) / (2.0 * sol.spacing);
                let gy = (sol.value(i, j + 1) - sol.value(i, j - 1)) / (2.0 * sol.spacing);
                assert!((gx * gx + gy * gy).sqrt() <= 1.0 - SolverConfig::default().delta_guard);
            }
        }

        let mut worst = 0.0f64;
        for i in 0..side {
            let x = sol.coord(i);
            if sol.unknown[i * side + i] {
                let r = (2.0 * x * x).sqrt();
                worst = worst.max((sol.value(i, i) - radial_at(&profile, r)).abs());
            }
        }
        diagonal_errors.push(worst);

        if m == 64 {
            let surface = sol.interpolant();
            let mut rng = common::rng(64);
            let mut checked = 0;
            while checked < 200 {
                let p = common::random_point(&mut rng, 2, 0.7);
                if p[0].hypot(p[1]) > 0.7 {
                    continue;
                }
                let hm = mean_curvature(&surface, &p).unwrap();
                assert!((hm - h).abs() <= 1e-2, "H = {hm} at {p:?}");
                checked += 1;
            }

            let opts = fast_options(2);
            let inner = 0.9 * radius;
            let fit = fit_gradient_bound(&surface, inner, 0.5, &opts).unwrap();
            let report = heinz_check(&surface, inner, fit.m, 0.5, &opts).unwrap();
            assert!(report.passed, "{}", report.to_json());
        }
    }
    let ratio = diagonal_errors[0] / diagonal_errors[1];
    assert!((3.5..=4.5).contains(&ratio), "diagonal errors {diagonal_errors:?}");
}
