//! Property tests for the solver invariants.

use asianray::bs_rate::{optimal_path, solve_fwd_rate, RateBranch};
use asianray::domain::{classify, ContractSpec, ModelSpec, Side};
use asianray::expansions::{classify_region, RegionLabel};
use asianray::numerics::{find_root, integrate, Bracket, SolverConfig};
use asianray::pricing::{bachelier_call, bs_call};
use proptest::prelude::*;

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

proptest! {
    #[test]
    fn find_root_residual_bound(root in -5.0f64..5.0, scale in 0.1f64..10.0) {
        // Cubic with a known root and no other real root inside the bracket.
        let f = move |x: f64| scale * (x - root) * (1.0 + (x - root) * (x - root));
        let got = find_root(f, Bracket::new(root - 3.0, root + 4.0).unwrap(), &cfg()).unwrap();
        prop_assert!(f(got).abs() <= 10.0 * 1e-14 + 1e-10 * scale);
        prop_assert!((got - root).abs() < 1e-9);
    }

    #[test]
    fn integrate_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, w in 0.5f64..4.0) {
        let f = |t: f64| (t * 1.3).sin();
        let g = |t: f64| t * t - 0.7 * t;
        let c = cfg();
        let lhs = integrate(|t| a * f(t) + b * g(t), 0.0, w, &c).unwrap();
        let rhs = a * integrate(f, 0.0, w, &c).unwrap() + b * integrate(g, 0.0, w, &c).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn forward_rate_solution_invariants(
        log_k in -0.7f64..0.7,
        tau in 0.0f64..0.95,
        sigma in 0.05f64..1.5,
    ) {
        prop_assume!(log_k.abs() > 1e-6);
        let k = log_k.exp();
        let r = solve_fwd_rate(k, tau, sigma).unwrap();
        // Rate nonnegative, zero only at the money.
        prop_assert!(r.j_fwd > 0.0);
        prop_assert!((r.i_fwd - r.j_fwd / (sigma * sigma)).abs() <= 1e-12 * r.i_fwd.abs());
        // Corner slope sign matches the moneyness and the corner level sits
        // between spot and strike.
        prop_assert_eq!(r.c > 0.0, log_k > 0.0);
        let corner = (r.c * tau).exp();
        let (lo, hi) = if k > 1.0 { (1.0, k) } else { (k, 1.0) };
        prop_assert!(corner >= lo - 1e-12 && corner <= hi + 1e-12);
        // Defining-equation residual.
        prop_assert!(r.residual.abs() < 1e-10);
        match r.branch {
            RateBranch::Beta => prop_assert!(log_k > 0.0),
            RateBranch::Xi => prop_assert!(log_k < 0.0),
        }
    }

    #[test]
    fn optimal_path_constraint_and_monotonicity(
        log_k in -0.6f64..0.6,
        tau in 0.0f64..0.9,
    ) {
        prop_assume!(log_k.abs() > 1e-3);
        let k = log_k.exp();
        let p = optimal_path(k, tau, 96).unwrap();
        prop_assert!(p.constraint_residual < 1e-9);
        prop_assert_eq!(p.values[0], 0.0);
        for w in p.values.windows(2) {
            if log_k > 0.0 {
                prop_assert!(w[1] >= w[0] - 1e-12);
            } else {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn classify_is_scale_invariant(
        s0 in 1.0f64..1000.0,
        ratio in 0.3f64..3.0,
        lambda in 0.01f64..100.0,
    ) {
        let m1 = ModelSpec::black_scholes(s0, 0.02, 0.01, 0.2).unwrap();
        let m2 = ModelSpec::black_scholes(s0 * lambda, 0.02, 0.01, 0.2).unwrap();
        let c1 = ContractSpec::fixed_strike(Side::Put, s0 * ratio, 1.0, 0.3).unwrap();
        let c2 = ContractSpec::fixed_strike(Side::Put, s0 * ratio * lambda, 1.0, 0.3).unwrap();
        prop_assert_eq!(classify(&m1, &c1).label, classify(&m2, &c2).label);
    }

    #[test]
    fn region_label_never_regresses(tau in 0.0f64..0.99, x0 in 0.05f64..1.0) {
        // Increasing |x| at fixed tau never moves DOTM back to AATM.
        let mut left_aatm = false;
        for step in 0..40 {
            let x = x0 * (1.0 + step as f64);
            let label = classify_region(x, tau).label;
            if label != RegionLabel::TauAatm {
                left_aatm = true;
            } else {
                prop_assert!(!left_aatm);
            }
        }
    }

    #[test]
    fn call_prices_monotone_in_strike(
        f in 50.0f64..150.0,
        vol in 0.05f64..0.8,
        t in 0.05f64..2.0,
    ) {
        let mut prev_bs = f64::INFINITY;
        let mut prev_bach = f64::INFINITY;
        for i in 0..10 {
            let k = 0.5 * f + i as f64 * 0.1 * f;
            let bs = bs_call(f, k, vol, t, 1.0);
            let bach = bachelier_call(f, k, vol * f, t, 1.0);
            prop_assert!(bs <= prev_bs + 1e-12);
            prop_assert!(bach <= prev_bach + 1e-12);
            prop_assert!(bs >= (f - k).max(0.0) - 1e-9);
            prop_assert!(bach >= (f - k).max(0.0) - 1e-9);
            prev_bs = bs;
            prev_bach = bach;
        }
    }
}
