//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `-- --nocapture` to see the lines for passing criteria).
//!
//! Two sub-checks fail by design against defective reference values and are
//! kept faithful rather than loosened: the table-3 Monte Carlo band contains
//! one row whose printed value duplicates the TCL column, and the deep-OTM
//! put probes sit outside the expansions' asymptotic regime. Their failure
//! messages carry the measured numbers.

use std::time::Instant;

use asianray::bs_rate::{
    asian_path_slope, j_bs, optimal_path_fn, solve_fwd_rate,
};
use asianray::domain::{ContractSpec, ModelSpec, Side};
use asianray::expansions::{aatm_rate, dotm_call_rate, dotm_put_rate, RegionLabel};
use asianray::floating::{generalized_rate_bs, symmetry_map, GenRegion};
use asianray::lv_rate::{fwd_rate_with, AverageKind};
use asianray::mc::{price_mc, Averaging, McConfig, Scheme};
use asianray::numerics::{integrate, SolverConfig};
use asianray::pricing::floating_price_approx;

const TABLE1: &[(f64, f64, f64, f64, f64)] = &[
    (1.1, 0.0, f64::NAN, 0.76340, 0.01337),
    (1.2, 0.0, f64::NAN, 1.06487, 0.04813),
    (1.3, 0.0, f64::NAN, 1.2873, 0.09818),
    (1.4, 0.0, f64::NAN, 1.46814, 0.15932),
    (1.5, 0.0, f64::NAN, 1.62213, 0.22854),
    (1.1, 0.25, 0.189261, 0.5392, 0.00904),
    (1.2, 0.25, 0.35968, 0.751447, 0.03294),
    (1.3, 0.25, 0.514475, 0.907739, 0.06794),
    (1.4, 0.25, 0.65612, 1.03462, 0.11132),
    (1.5, 0.25, 0.786554, 1.14257, 0.16109),
    (1.1, 0.5, 0.142709, 0.38003, 0.00681),
    (1.2, 0.5, 0.272543, 0.52806, 0.02487),
    (1.3, 0.5, 0.391598, 0.636173, 0.05146),
    (1.4, 0.5, 0.501497, 0.723307, 0.08455),
    (1.5, 0.5, 0.603527, 0.796955, 0.12267),
];

/// tau = 0.75 rows: c and beta_c are trusted; the printed rate column equals
/// log(K/S0) and is compared against the recomputation instead.
const TABLE1_TAU75: &[(f64, f64, f64)] = &[
    (1.1, 0.114339, 0.239673),
    (1.2, 0.218666, 0.332169),
    (1.3, 0.314588, 0.399221),
    (1.4, 0.403356, 0.452895),
    (1.5, 0.485962, 0.497977),
];

const TABLE2: &[(f64, f64, f64, f64, f64)] = &[
    (1.0, 0.0, f64::NAN, 0.0, 0.0),
    (0.9, 0.0, f64::NAN, 0.39334, 0.01701),
    (0.8, 0.0, f64::NAN, 0.56555, 0.07823),
    (0.7, 0.0, f64::NAN, 0.70509, 0.20580),
    (0.6, 0.0, f64::NAN, 0.83002, 0.43735),
    (0.5, 0.0, f64::NAN, 0.94775, 0.84161),
    (1.0, 0.25, 0.0, 0.0, 0.0),
    (0.9, 0.25, -0.21239, 0.278525, 0.01116),
    (0.8, 0.25, -0.453789, 0.401176, 0.05035),
    (0.7, 0.25, -0.732556, 0.5013, 0.12950),
    (0.6, 0.25, -1.06111, 0.591885, 0.26765),
    (0.5, 0.25, -1.45904, 0.678576, 0.49724),
    (1.0, 0.5, 0.0, 0.0, 0.0),
    (0.9, 0.5, -0.158352, 0.197664, 0.00834),
    (0.8, 0.5, -0.336107, 0.285876, 0.03745),
    (0.7, 0.5, -0.538556, 0.358898, 0.09584),
    (0.6, 0.5, -0.773475, 0.426057, 0.19694),
    (0.5, 0.5, -1.05297, 0.491616, 0.36342),
    (1.0, 0.75, 0.0, 0.0, 0.0),
    (0.9, 0.75, -0.126473, 0.125404, 0.00667),
    (0.8, 0.75, -0.267951, 0.181998, 0.02989),
    (0.7, 0.75, -0.428465, 0.229381, 0.07639),
    (0.6, 0.75, -0.613921, 0.273526, 0.15672),
    (0.5, 0.75, -0.833483, 0.317279, 0.28867),
];

const TABLE3: &[(f64, f64, f64, f64)] = &[
    // (sigma, tau, asymptotic, reference mc)
    (0.2, 305.0 / 365.0, 2.13005, 2.264616),
    (0.3, 305.0 / 365.0, 2.96462, 3.171457),
    (0.4, 305.0 / 365.0, 3.80438, 4.084590),
    (0.5, 305.0 / 365.0, 4.64622, 4.999982),
    (0.6, 305.0 / 365.0, 5.48911, 5.908669),
    (0.2, 265.0 / 365.0, 2.92733, 3.105413),
    (0.3, 265.0 / 365.0, 3.99604, 4.268604),
    (0.4, 265.0 / 365.0, 5.07577, 5.493439),
    (0.5, 265.0 / 365.0, 6.15994, 6.620761),
    (0.6, 265.0 / 365.0, 7.24634, 7.790436),
    (0.2, 183.0 / 365.0, 4.33054, 4.554739),
    (0.3, 183.0 / 365.0, 5.74906, 6.096058),
    (0.4, 183.0 / 365.0, 7.19388, 7.661532),
    (0.5, 183.0 / 365.0, 8.64938, 9.228435),
    (0.6, 183.0 / 365.0, 10.1102, 10.798441),
];

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPT {name}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

#[test]
fn c01_table1_call_side() {
    let t0 = Instant::now();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for &(k, tau, c, beta, j) in TABLE1 {
        let r = solve_fwd_rate(k, tau, 1.0).unwrap();
        if c.is_finite() {
            worst.0 = worst.0.max((r.c - c).abs());
        }
        worst.1 = worst.1.max((r.beta_or_xi - beta).abs());
        worst.2 = worst.2.max((r.j_fwd - j).abs());
    }
    // tau = 0.75: c and beta against the reference; the rate against its
    // recomputation from the solved beta (printed column is log(K/S0)).
    let mut tau75_consistent = true;
    for &(k, c, beta) in TABLE1_TAU75 {
        let r = solve_fwd_rate(k, 0.75, 1.0).unwrap();
        worst.0 = worst.0.max((r.c - c).abs());
        worst.1 = worst.1.max((r.beta_or_xi - beta).abs());
        // Recomputation from the printed beta must agree with the solver.
        let bth = beta * (beta / 2.0f64).tanh();
        let g = beta * beta - 2.0 * bth;
        let j_re = (0.75 * bth * bth + 0.25 * g) / (2.0 * 0.25 * 0.25);
        tau75_consistent &= (r.j_fwd - j_re).abs() < 5e-5;
    }
    let dt = t0.elapsed();
    let pass = worst.0 < 5e-6 && worst.1 < 5e-6 && worst.2 < 5e-5 && tau75_consistent
        && dt.as_secs_f64() < 0.1;
    report(
        "c01 table1-call-side",
        pass,
        &format!(
            "worst |dc|={:.1e} |dbeta|={:.1e} |dj|={:.1e}, tau=0.75 j from printed beta consistent={tau75_consistent}, elapsed={dt:?}",
            worst.0, worst.1, worst.2
        ),
    );
}

#[test]
fn c02_table2_put_side() {
    let t0 = Instant::now();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for &(k, tau, c, xi, j) in TABLE2 {
        let r = solve_fwd_rate(k, tau, 1.0).unwrap();
        if c.is_finite() {
            worst.0 = worst.0.max((r.c - c).abs());
        }
        worst.1 = worst.1.max((r.beta_or_xi - xi).abs());
        worst.2 = worst.2.max((r.j_fwd - j).abs());
    }
    let dt = t0.elapsed();
    let pass = worst.0 < 5e-6 && worst.1 < 5e-6 && worst.2 < 5e-5 && dt.as_secs_f64() < 0.1;
    report(
        "c02 table2-put-side",
        pass,
        &format!(
            "24 rows, worst |dc|={:.1e} |dxi|={:.1e} |dj|={:.1e}, elapsed={dt:?}",
            worst.0, worst.1, worst.2
        ),
    );
}

#[test]
fn c03a_table3_asymptotic_column() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for &(sigma, tau, c_f, _) in TABLE3 {
        let model = ModelSpec::black_scholes(100.0, 0.1, 0.0, sigma).unwrap();
        let got = floating_price_approx(&model, 1.0, tau, 1.0).unwrap();
        worst = worst.max((got - c_f).abs());
    }
    let dt = t0.elapsed();
    let pass = worst < 5e-5 && dt.as_secs_f64() < 0.1;
    report(
        "c03a table3-asymptotic",
        pass,
        &format!("15 values, worst |diff|={worst:.2e}, elapsed={dt:?}"),
    );
}

#[test]
fn c03b_table3_mc_band() {
    // Discrete daily fixings: the convention of the reference MC column.
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut n_out = 0;
    let mut worst = 0.0f64;
    for &(sigma, tau, _, mc_ref) in TABLE3 {
        let model = ModelSpec::black_scholes(100.0, 0.1, 0.0, sigma).unwrap();
        let c = ContractSpec::floating_strike(Side::Call, 1.0, 1.0, tau).unwrap();
        let cfg = McConfig {
            n_paths: 1_000_000,
            n_steps: 365,
            seed: 424_242,
            antithetic: true,
            scheme: Scheme::ExactGbm,
            averaging: Averaging::DiscreteFixings,
        };
        let est = price_mc(&model, &c, &cfg).unwrap();
        let rel = (est.price - mc_ref) / mc_ref;
        worst = worst.max(rel.abs());
        if rel.abs() > 0.005 {
            n_out += 1;
            lines.push(format!(
                "sigma={sigma} tau={tau:.4}: mc={:.5} ref={mc_ref} rel={:+.3}%",
                est.price,
                100.0 * rel
            ));
        }
    }
    let dt = t0.elapsed();
    let pass = n_out == 0 && dt.as_secs_f64() < 300.0;
    report(
        "c03b table3-mc-band",
        pass,
        &format!(
            "{}/15 rows within 0.5% (worst {:.2}%), elapsed={dt:?}; out-of-band: [{}] \
             (the sigma=0.4, tau=265/365 reference prints the TCL approximation in the MC \
             column - a reference-value defect, kept as a faithful failing check)",
            15 - n_out,
            100.0 * worst,
            lines.join("; ")
        ),
    );
}

#[test]
fn c04_limit_recoveries() {
    let mut worst_zero = 0.0f64;
    let mut worst_one = 0.0f64;
    for k in [0.5f64, 0.7, 0.9, 1.1, 1.3, 1.5, 2.0] {
        let r0 = solve_fwd_rate(k, 0.0, 1.0).unwrap();
        worst_zero = worst_zero.max((r0.j_fwd - j_bs(k).unwrap()).abs());
        let r1 = solve_fwd_rate(k, 1.0 - 1e-4, 1.0).unwrap();
        let european = 0.5 * (k as f64).ln().powi(2);
        worst_one = worst_one.max((r1.j_fwd - european).abs());
    }
    let pass = worst_zero < 1e-12 && worst_one < 1e-3;
    report(
        "c04 limit-recoveries",
        pass,
        &format!("tau=0 gap {worst_zero:.1e} (<1e-12), tau=1-1e-4 gap {worst_one:.1e} (<1e-3)"),
    );
}

#[test]
fn c05_lv_matches_closed_form_with_quadratic_convergence() {
    let model = ModelSpec::black_scholes(100.0, 0.0, 0.0, 0.2).unwrap();
    // Full table grid at the default resolution.
    let mut worst_rel = 0.0f64;
    for &(k, tau, ..) in TABLE1.iter().chain(TABLE2) {
        if (k - 1.0f64).abs() < 1e-12 {
            continue;
        }
        let exact = solve_fwd_rate(k, tau, 0.2).unwrap().i_fwd;
        let lv = fwd_rate_with(&model, 100.0 * k, tau, AverageKind::FixedAverage, 256).unwrap();
        worst_rel = worst_rel.max((lv.i_fwd - exact).abs() / exact);
    }
    // Grid-refinement study on representative points.
    let mut ratios = Vec::new();
    for (k, tau) in [(1.3, 0.5), (0.7, 0.25)] {
        let exact = solve_fwd_rate(k, tau, 0.2).unwrap().i_fwd;
        let mut errs = Vec::new();
        for n in [64usize, 128, 256, 512] {
            let lv = fwd_rate_with(&model, 100.0 * k, tau, AverageKind::FixedAverage, n).unwrap();
            errs.push((lv.i_fwd - exact).abs());
        }
        for w in errs.windows(2) {
            ratios.push(w[0] / w[1]);
        }
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = worst_rel < 1e-3 && min_ratio > 2.5;
    report(
        "c05 lv-vs-bs-oracle",
        pass,
        &format!(
            "worst relative gap at n=256: {worst_rel:.2e} (<1e-3); error ratios per grid \
             doubling: {:?} (O(n^-2) is 4)",
            ratios.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn c06_atm_sqrt_t_law() {
    let sigma = 0.2;
    let s0 = 100.0;
    let model = ModelSpec::black_scholes(s0, 0.0, 0.0, sigma).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    let cfg = McConfig {
        n_paths: 400_000,
        n_steps: 256,
        seed: 31_337,
        antithetic: true,
        scheme: Scheme::ExactGbm,
        averaging: Averaging::Trapezoid,
    };
    let mut check = |label: String, contract: ContractSpec, coeff: f64| {
        let t = contract.maturity_t;
        let est = price_mc(&model, &contract, &cfg).unwrap();
        let got = est.price / t.sqrt();
        let se = est.std_error / t.sqrt();
        let ok = (got - coeff).abs() <= 3.0 * se;
        pass &= ok;
        details.push(format!(
            "{label}: {got:.4} vs {coeff:.4} ({:+.2} se){}",
            (got - coeff) / se,
            if ok { "" } else { " OUT" }
        ));
    };
    for t in [0.04, 0.01] {
        for tau in [0.0, 0.5] {
            let c = ContractSpec::fixed_strike(Side::Call, s0, t, tau).unwrap();
            let coeff = sigma * s0 * ((1.0 + 2.0 * tau) / (6.0 * std::f64::consts::PI)).sqrt();
            check(format!("fixed T={t} tau={tau}"), c, coeff);

            let c = ContractSpec::floating_strike(Side::Put, 1.0, t, tau).unwrap();
            let coeff = sigma * s0 * ((1.0 - tau) / (6.0 * std::f64::consts::PI)).sqrt();
            check(format!("floating T={t} tau={tau}"), c, coeff);
        }
        let kappa = 0.5;
        let c = ContractSpec::generalized(Side::Call, kappa, s0 * (1.0 - kappa), t).unwrap();
        let coeff = sigma * s0 * (kappa * kappa - kappa + 1.0 / 3.0).sqrt()
            / (2.0 * std::f64::consts::PI).sqrt();
        check(format!("generalized T={t} kappa={kappa}"), c, coeff);
    }
    report("c06 atm-sqrt-t-law", pass, &details.join("; "));
}

#[test]
fn c07a_expansion_accuracy() {
    let mut pass = true;
    let mut details = Vec::new();
    // AATM relative error at x = +/-0.05.
    for tau in [0.25, 0.5] {
        for x in [0.05f64, -0.05] {
            let exact = solve_fwd_rate(x.exp(), tau, 1.0).unwrap().i_fwd;
            let rel = (aatm_rate(x, tau, 1.0) - exact).abs() / exact;
            pass &= rel < 1e-4;
            details.push(format!("aatm x={x} tau={tau}: rel={rel:.1e}"));
        }
        // Error-scaling factor halving x from 0.1 to 0.05.
        let e1 = (aatm_rate(0.1, tau, 1.0)
            - solve_fwd_rate(0.1f64.exp(), tau, 1.0).unwrap().i_fwd)
            .abs();
        let e2 = (aatm_rate(0.05, tau, 1.0)
            - solve_fwd_rate(0.05f64.exp(), tau, 1.0).unwrap().i_fwd)
            .abs();
        let factor = e1 / e2;
        pass &= factor >= 12.8;
        details.push(format!("aatm scaling tau={tau}: factor={factor:.1}"));
    }
    // DOTM call wing.
    let exact = solve_fwd_rate(8.0f64.exp(), 0.5, 1.0).unwrap().i_fwd;
    let rel = (dotm_call_rate(8.0, 0.5, 1.0) - exact).abs() / exact;
    pass &= rel < 0.03;
    details.push(format!("dotm-call x=8 tau=0.5: rel={:.3}%", 100.0 * rel));
    report("c07a expansion-accuracy", pass, &details.join("; "));
}

#[test]
fn c07b_dotm_put_probes() {
    // Faithful check at the stated probe points; both sit outside the
    // expansions' asymptotic regimes and exceed the 10% band (the formulas
    // converge in-regime: 0.6% by tau=1e-5 on the left wing, 6.6% by x=-12
    // at tau=0.5).
    let mut details = Vec::new();
    let mut pass = true;
    for (x, tau, want_label) in [
        (-6.0, 0.001, RegionLabel::TauDotmPutRegion1),
        (-6.0, 0.5, RegionLabel::TauDotmPutRegion2),
    ] {
        let exact = solve_fwd_rate((x as f64).exp(), tau, 1.0).unwrap().i_fwd;
        let (v, region) = dotm_put_rate(x, tau, 1.0).unwrap();
        let rel = (v - exact).abs() / exact;
        pass &= region.label == want_label && rel < 0.10;
        details.push(format!(
            "x={x} tau={tau}: dispatch={:?}, rel={:.1}% (band 10%)",
            region.label,
            100.0 * rel
        ));
    }
    report("c07b dotm-put-probes", pass, &details.join("; "));
}

#[test]
fn c08_generalized_properties() {
    let mut pass = true;
    let mut details = Vec::new();
    // ATM line: 20 deterministic pseudo-random points.
    let mut worst_line = 0.0f64;
    let mut state = 0x9e3779b97f4a7c15u64;
    for _ in 0..20 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let kappa = 0.02 + 0.96 * ((state >> 11) as f64 / (1u64 << 53) as f64);
        let g = generalized_rate_bs(kappa, 1.0 - kappa, 1.0).unwrap();
        worst_line = worst_line.max(g.j_g);
    }
    pass &= worst_line < 1e-12;
    details.push(format!("ATM-line worst j={worst_line:.1e}"));

    // Argument symmetry on a 10x10 grid avoiding the line.
    let mut worst_sym = 0.0f64;
    let grid: Vec<f64> = (1..=10).map(|i| 0.12 * i as f64).collect();
    for &a in &grid {
        for &b in &grid {
            if (a + b - 1.0f64).abs() < 0.05 {
                continue;
            }
            let ja = generalized_rate_bs(a, b, 1.0).unwrap().j_g;
            let jb = generalized_rate_bs(b, a, 1.0).unwrap().j_g;
            worst_sym = worst_sym.max((ja - jb).abs());
        }
    }
    pass &= worst_sym < 1e-8;
    details.push(format!("symmetry worst |dj|={worst_sym:.1e}"));

    // Residuals.
    let mut worst_res = 0.0f64;
    for (a, b) in [(0.3, 1.1), (1.2, 0.4), (0.2, 0.3), (0.6, 0.1), (0.05, 0.55)] {
        let g = generalized_rate_bs(a, b, 1.0).unwrap();
        assert!(matches!(g.region, GenRegion::A | GenRegion::B));
        for r in &g.residuals {
            worst_res = worst_res.max(r.abs());
        }
    }
    pass &= worst_res < 1e-9;
    details.push(format!("A/B residuals worst {worst_res:.1e}"));
    report("c08 generalized-properties", pass, &details.join("; "));
}

#[test]
fn c09_symmetry_mc() {
    let model = ModelSpec::black_scholes(100.0, 0.05, 0.02, 0.3).unwrap();
    let cfg = McConfig {
        n_paths: 100_000,
        n_steps: 128,
        seed: 1_234,
        antithetic: true,
        scheme: Scheme::ExactGbm,
        averaging: Averaging::Trapezoid,
    };
    let mut pass = true;
    let mut details = Vec::new();
    for kappa in [0.9, 1.1] {
        for side in [Side::Call, Side::Put] {
            let c = ContractSpec::floating_strike(side, kappa, 1.0, 0.5).unwrap();
            let orig = price_mc(&model, &c, &cfg).unwrap();
            let mapped = symmetry_map(&model, &c).unwrap();
            let dual = price_mc(&mapped.model, &mapped.contract, &cfg).unwrap();
            let gap = orig.price - mapped.price_scale * dual.price;
            let cse = (orig.std_error.powi(2) + dual.std_error.powi(2)).sqrt();
            let ok = gap.abs() <= 3.0 * cse;
            pass &= ok;
            details.push(format!(
                "kappa={kappa} {side:?}: gap={gap:+.4} ({:+.2} cse){}",
                gap / cse,
                if ok { "" } else { " OUT" }
            ));
        }
    }
    report("c09 symmetry-mc", pass, &details.join("; "));
}

#[test]
fn c10_path_properties() {
    let quad_cfg = SolverConfig::<f64> {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_iter: 60,
    };
    let mut worst_constraint = 0.0f64;
    let mut worst_corner = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut monotone = true;
    for &(k, tau, ..) in TABLE1.iter().chain(TABLE2) {
        if (k - 1.0f64).abs() < 1e-12 {
            continue;
        }
        let sample = asianray::bs_rate::optimal_path(k, tau, 128).unwrap();
        worst_constraint = worst_constraint.max(sample.constraint_residual);
        for w in sample.values.windows(2) {
            if k > 1.0 {
                monotone &= w[1] >= w[0] - 1e-12;
            } else {
                monotone &= w[1] <= w[0] + 1e-12;
            }
        }
        let path = optimal_path_fn(k, tau).unwrap();
        let r = solve_fwd_rate(k, tau, 1.0).unwrap();
        // Corner slope gap by second-order one-sided differences.
        if tau > 0.0 {
            let d = 1e-5;
            let left =
                (3.0 * path.value(tau) - 4.0 * path.value(tau - d) + path.value(tau - 2.0 * d))
                    / (2.0 * d);
            let right =
                (-3.0 * path.value(tau) + 4.0 * path.value(tau + d) - path.value(tau + 2.0 * d))
                    / (2.0 * d);
            worst_corner = worst_corner.max((left - right).abs() / 1.0f64.max(r.c.abs()));
        }
        // Quadrature energy vs the rate.
        let param = path_param(&path);
        let asian =
            integrate(|u| asian_path_slope(u, param).powi(2), 0.0, 1.0, &quad_cfg).unwrap();
        let energy = 0.5 * r.c * r.c * tau + 0.5 * asian / (1.0 - tau);
        worst_energy = worst_energy.max((energy - r.j_fwd).abs() / r.j_fwd);
    }
    let pass =
        worst_constraint < 1e-8 && monotone && worst_corner < 1e-8 && worst_energy < 1e-6;
    report(
        "c10 path-properties",
        pass,
        &format!(
            "constraint<=1e-8: {worst_constraint:.1e}; monotone: {monotone}; corner gap \
             {worst_corner:.1e} (<1e-8); energy rel {worst_energy:.1e} (<1e-6)"
        ),
    );
}

// Test-side access to the path's branch parameter for the energy quadrature.
fn path_param(path: &asianray::OptimalPath) -> asianray::bs_rate::AsianParam<f64> {
    path.param()
}
