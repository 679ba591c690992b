use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use intineq::function_models::sampling::{random_monotone_grid, RandomGridSpec};
use intineq::function_models::{log_convex_from_density, Scaled};
use intineq::functionals::{constraint_lhs, evaluate, objective_lhs, EvalConfig};
use intineq::lp_search::{build_model, log_grid, refine_grid, simplex_solve, StepIncrements};
use intineq::special_values::{beta_product, kernel_psi, rising_product, sharp_bound};
use intineq::{Form, Interpolation, Params, Profile};

fn grid(seed: u64, step: bool) -> intineq::GridFunction {
    let spec = RandomGridSpec {
        interpolation: if step {
            Interpolation::StepLeft
        } else {
            Interpolation::Linear
        },
        ..RandomGridSpec::default()
    };
    random_monotone_grid(&mut ChaCha8Rng::seed_from_u64(seed), &spec)
}

fn steps() -> impl Strategy<Value = StepIncrements> {
    prop::collection::vec((-3.0f64..3.0, 0.01f64..2.0), 1..8).prop_map(|mut v| {
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.dedup_by(|a, b| a.0 - b.0 < 1e-3);
        let (k, d): (Vec<_>, Vec<_>) = v.into_iter().map(|(l, d)| (10f64.powf(l), d)).unzip();
        StepIncrements::new(k, d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ratio_is_scale_invariant(seed in any::<u64>(), c in 0.01f64..100.0, step in any::<bool>()) {
        let p = Params::from_alpha(1.0, 3).unwrap();
        let cfg = EvalConfig::default();
        let g = grid(seed, step);
        let a = evaluate(Form::Two, &g, &p, &cfg).unwrap();
        let b = evaluate(Form::Two, &Scaled { inner: &g, factor: c }, &p, &cfg).unwrap();
        prop_assert!((a.ratio - b.ratio).abs() <= 1e-8 * a.ratio.max(1.0), "{} vs {}", a.ratio, b.ratio);
    }

    #[test]
    fn log_convex_lift_is_monotone_and_log_convex(seed in any::<u64>()) {
        let s = log_convex_from_density(&grid(seed, false)).unwrap();
        let xs = s.default_check_grid();
        prop_assert!(s.verify_log_convexity(&xs).is_ok());
        let vals: Vec<f64> = xs.iter().map(|&x| s.value(x)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(s.value(0.0), 0.0);
    }

    #[test]
    fn step_formulas_match_quadrature(h in steps(), t in 0.01f64..100.0, alpha in 0.55f64..3.0, n in 2u32..6) {
        let p = Params::from_alpha(alpha, n).unwrap();
        let exact = EvalConfig::default();
        let quad = EvalConfig::default().quadrature_only();
        let c_exact = constraint_lhs(Form::Two, &h, t, &p, &exact).unwrap().value;
        let c_quad = constraint_lhs(Form::Two, &h, t, &p, &quad).unwrap().value;
        prop_assert!((c_exact - c_quad).abs() <= 1e-9 * c_exact.max(1.0), "{c_exact} vs {c_quad}");
        let o_exact = objective_lhs(Form::Two, &h, &p, &exact).unwrap().value;
        let o_quad = objective_lhs(Form::Two, &h, &p, &quad).unwrap().value;
        prop_assert!((o_exact - o_quad).abs() <= 1e-8 * o_exact.max(1.0), "{o_exact} vs {o_quad}");
        prop_assert!((o_exact - h.objective(alpha)).abs() <= 1e-12 * o_exact.max(1.0));
    }

    #[test]
    fn lp_is_deterministic(alpha in 0.55f64..2.5, n in 2u32..5, m in 5usize..25, j in 10usize..50) {
        let p = Params::from_alpha(alpha, n).unwrap();
        let model = build_model(&p, &log_grid(1e-2, 1e2, m), &log_grid(1e-3, 1e4, j)).unwrap();
        let a = simplex_solve(&model, 100_000).unwrap();
        let b = simplex_solve(&model, 100_000).unwrap();
        prop_assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        prop_assert_eq!(a.increments.increments(), b.increments.increments());
        prop_assert!(model.max_constraint_ratio(a.increments.increments()) <= 1.0 + 1e-9);
    }

    #[test]
    fn refinement_keeps_every_node(lo in -4.0f64..0.0, span in 0.5f64..8.0, m in 2usize..60) {
        let g = log_grid(10f64.powf(lo), 10f64.powf(lo + span), m);
        let r = refine_grid(&g);
        prop_assert_eq!(r.len(), 2 * g.len() - 1);
        prop_assert!(g.iter().all(|x| r.contains(x)));
        prop_assert!(r.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn beta_and_bounds_are_consistent(alpha in 0.05f64..10.0, n in 2u32..12) {
        let b = beta_product(alpha, n).unwrap();
        prop_assert!((b * alpha * rising_product(alpha, n) - 1.0).abs() < 1e-12);
        let p = Params::from_alpha(alpha, n).unwrap();
        if p.admits(Form::One) {
            let one = sharp_bound(&p, Form::One).unwrap();
            prop_assert!(one > 0.0 && one.is_finite());
        } else {
            prop_assert!(sharp_bound(&p, Form::One).is_err());
        }
        if p.admits(Form::Two) {
            let two = sharp_bound(&p, Form::Two).unwrap();
            let three = sharp_bound(&p, Form::Three).unwrap();
            prop_assert!((three - 2.0 * alpha * two).abs() <= 1e-12 * three);
        }
    }

    #[test]
    fn psi_decreases(alpha in 0.1f64..5.0, a in 1e-3f64..1e3, f in 1.001f64..10.0) {
        prop_assert!(kernel_psi(a * f, alpha).unwrap() < kernel_psi(a, alpha).unwrap());
    }
}
