//! Floating-strike and generalized Asian rate functions under Black-Scholes,
//! plus the floating/fixed symmetry mapping.
//!
//! The floating-strike forward-start rate reduces to the standard Asian rate:
//! `I_f(kappa, tau, sigma) = J_BS(kappa) / ((1 - tau) sigma^2)`.
//!
//! The generalized (seasoned) payoff `(kappa S_T - A_T + K)^+` leads to a
//! two-parameter transcendental system. Above the ATM line
//! `kappa + K/S0 = 1` (region A) the solution is hyperbolic in `(beta,
//! gamma)`; below it (region B) trigonometric in `(xi, eta)`, with `eta`
//! determined only up to a discrete branch choice. Candidates are enumerated,
//! filtered on residuals and pole distance, and the least action wins.

use crate::bs_rate::j_bs;
use crate::domain::{ContractSpec, Family, ModelSpec};
use crate::error::{Error, Result};
use crate::numerics::{find_root, Bracket, SolverConfig};
use crate::scalar::Real;

/// Rate function of an out-of-the-money floating-strike forward-start Asian
/// option in the Black-Scholes model: `J_BS(kappa) / ((1 - tau) sigma^2)`.
pub fn floating_rate_bs<T: Real>(kappa: T, tau: T, sigma: T) -> Result<T> {
    if !(kappa > T::zero()) {
        return Err(Error::Domain(format!("kappa must be > 0, got {kappa}")));
    }
    if !(tau >= T::zero() && tau < T::one()) {
        return Err(Error::Domain(format!("tau must lie in [0, 1), got {tau}")));
    }
    if !(sigma > T::zero()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(j_bs(kappa)? / ((T::one() - tau) * sigma * sigma))
}

/// Which side of the ATM line `kappa + K/S0 = 1` the contract sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenRegion {
    /// `kappa + K/S0 > 1`: hyperbolic `(beta, gamma)` solution.
    A,
    /// `kappa + K/S0 < 1`: trigonometric `(xi, eta)` solution.
    B,
    /// On the line: the flat path is optimal and the rate vanishes.
    AtmLine,
}

/// Generalized Asian rate function plus solver internals.
#[derive(Debug, Clone)]
pub struct GenRateResult {
    /// Dimensionless rate `J_g(kappa, K/S0)`.
    pub j_g: f64,
    /// `I_g = J_g / sigma^2`.
    pub i_g: f64,
    pub region: GenRegion,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    /// Region B branch that produced the minimum:
    /// `family * 2 + n` with family in {0, 1}, n in {0, 1}.
    pub branch_index: Option<usize>,
    /// Residuals of the defining equations at the returned solution.
    pub residuals: Vec<f64>,
    /// More than one genuinely distinct `(xi, eta)` candidate passed the
    /// residual filter; the least action was returned.
    pub ambiguous: bool,
}

impl GenRateResult {
    fn atm() -> Self {
        GenRateResult {
            j_g: 0.0,
            i_g: 0.0,
            region: GenRegion::AtmLine,
            beta: None,
            gamma: None,
            xi: None,
            eta: None,
            branch_index: None,
            residuals: vec![0.0],
            ambiguous: false,
        }
    }
}

fn gen_gamma(kappa: f64, beta: f64) -> f64 {
    beta.exp() / (kappa * beta + (1.0 + kappa * kappa * beta * beta).sqrt())
}

/// Left-minus-right of the region-A moneyness equation after substituting
/// `gamma(beta)`.
fn region_a_eq(kappa: f64, k: f64, beta: f64) -> f64 {
    let eb = beta.exp();
    let g = gen_gamma(kappa, beta);
    let w = (g + 1.0) / (g + eb);
    let lhs = if beta.abs() < 1e-8 {
        w * (1.0 + beta / 2.0 + beta * beta / 6.0)
    } else {
        w * (eb - 1.0) / beta
    };
    lhs - kappa * eb * w * w - k
}

fn region_a_rate(kappa: f64, beta: f64) -> f64 {
    let eb = beta.exp();
    let g = gen_gamma(kappa, beta);
    0.5 * beta * beta - 2.0 * beta * (g / (g + 1.0)) * ((eb - 1.0) / (eb + g))
}

/// Region-B candidate from one branch of the `eta` ambiguity.
#[derive(Debug, Clone, Copy)]
struct GenCandidate {
    xi: f64,
    eta: f64,
    j: f64,
    branch_index: usize,
    eta_residual: f64,
    xi_residual: f64,
}

/// `eta(xi)` for branch `family` in {0, 1} and shift `n` in {0, 1}; requires
/// `2 xi kappa <= 1`.
fn gen_eta(kappa: f64, xi: f64, family: usize, n: usize) -> f64 {
    let a = (2.0 * xi * kappa).asin();
    let pi = std::f64::consts::PI;
    match family {
        0 => -xi + 0.5 * a + n as f64 * pi,
        _ => -xi - 0.5 * a + (n as f64 + 0.5) * pi,
    }
}

/// Left-minus-right of the region-B equation in `xi` after substituting
/// `eta(xi)`. Written to stay finite as `cos(eta) -> 0`.
fn region_b_eq(kappa: f64, k: f64, xi: f64, eta: f64) -> f64 {
    let se = xi + eta;
    let ce = eta.cos();
    // cos^2(eta) (tan(se) - tan(eta)) = cos^2(eta) tan(se) - sin(eta) cos(eta)
    let lhs = (ce * ce * se.tan() - eta.sin() * ce) / xi;
    lhs - kappa * ce * ce / (se.cos() * se.cos()) - k
}

fn region_b_rate(xi: f64, eta: f64) -> f64 {
    2.0 * xi * ((xi + eta).tan() - eta.tan() - xi)
}

/// Residual of the transversality equation `sin(2(xi+eta))/(2 xi) = kappa`.
fn eta_eq_residual(kappa: f64, xi: f64, eta: f64) -> f64 {
    (2.0 * (xi + eta)).sin() / (2.0 * xi) - kappa
}

const POLE_GUARD: f64 = 1e-8;

fn region_b_candidates(kappa: f64, k: f64) -> Vec<GenCandidate> {
    let pi_2 = std::f64::consts::FRAC_PI_2;
    let xi_max = if kappa > 0.0 {
        pi_2.min(1.0 / (2.0 * kappa)) - 1e-12
    } else {
        pi_2 - 1e-12
    };
    let cfg = SolverConfig::<f64> {
        rel_tol: 1e-14,
        abs_tol: 1e-15,
        max_iter: 200,
    };
    let mut out = Vec::new();
    let mut consider = |root: f64, family: usize, n: usize| {
        let eta = gen_eta(kappa, root, family, n);
        let se = root + eta;
        // Reject solutions parked on a tangent pole.
        let pole_ok = se.cos().abs() > POLE_GUARD && eta.cos().abs() > POLE_GUARD;
        let j = region_b_rate(root, eta);
        let eta_res = eta_eq_residual(kappa, root, eta);
        let xi_res = region_b_eq(kappa, k, root, eta);
        if pole_ok
            && root > 0.0
            && root <= pi_2
            && j >= -1e-12
            && eta_res.abs() < 1e-9
            && xi_res.abs() < 1e-9
        {
            out.push(GenCandidate {
                xi: root,
                eta,
                j: j.max(0.0),
                branch_index: family * 2 + n,
                eta_residual: eta_res,
                xi_residual: xi_res,
            });
        }
    };
    for family in 0..2usize {
        for n in 0..2usize {
            let h = |xi: f64| region_b_eq(kappa, k, xi, gen_eta(kappa, xi, family, n));
            // Sign scan; the equations may have several roots per branch.
            let grid = 600;
            let mut prev_xi = xi_max * 1e-9;
            let mut prev_val = h(prev_xi);
            for i in 1..=grid {
                let xi = xi_max * i as f64 / grid as f64;
                let val = h(xi);
                if prev_val.is_finite() && val.is_finite() && prev_val * val < 0.0 {
                    if let Ok(root) = find_root(h, Bracket::new(prev_xi, xi).unwrap(), &cfg) {
                        consider(root, family, n);
                    }
                }
                prev_xi = xi;
                prev_val = val;
            }
            // On the symmetry diagonal kappa = K/S0 the solution sits exactly
            // on the domain boundary xi = pi/2 (no interior sign change).
            let edge = h(xi_max);
            if edge.is_finite() && edge.abs() < 1e-9 {
                consider(xi_max, family, n);
            }
        }
    }
    out
}

/// Rate function `J_g(kappa, K/S0)` of a generalized Asian option in the
/// Black-Scholes model (Black-Scholes rate `I_g = J_g / sigma^2`).
///
/// The region is chosen by the sign of `kappa + K/S0 - 1`; exactly on the ATM
/// line the rate is zero. `kappa = 0` reduces to the fixed-strike Asian rate
/// and is delegated to [`j_bs`].
pub fn generalized_rate_bs(kappa: f64, k_over_s0: f64, sigma: f64) -> Result<GenRateResult> {
    if !(kappa >= 0.0) || !(k_over_s0 >= 0.0) {
        return Err(Error::Domain(format!(
            "kappa and K/S0 must be >= 0, got {kappa}, {k_over_s0}"
        )));
    }
    if kappa == 0.0 && k_over_s0 == 0.0 {
        return Err(Error::Domain(
            "kappa and K/S0 cannot both be zero".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }

    let m = kappa + k_over_s0;
    if (m - 1.0).abs() < 1e-14 {
        return Ok(GenRateResult::atm());
    }

    if kappa == 0.0 {
        // Degenerates to the plain fixed-strike Asian constraint.
        let j = j_bs(k_over_s0)?;
        let mut res = GenRateResult::atm();
        res.j_g = j;
        res.i_g = j / (sigma * sigma);
        res.region = if m > 1.0 { GenRegion::A } else { GenRegion::B };
        res.residuals = vec![0.0];
        return Ok(res);
    }

    if m > 1.0 {
        // Region A: one scalar equation in beta after eliminating gamma.
        let f = |b: f64| region_a_eq(kappa, k_over_s0, b);
        let mut lo = 1e-6;
        let mut flo = f(lo);
        if flo > 0.0 {
            // The root sits below 1e-6 only in a vanishing sliver near the
            // ATM line; shrink towards zero.
            while flo > 0.0 && lo > 1e-300 {
                lo /= 2.0;
                flo = f(lo);
            }
        }
        let mut hi = lo.max(1e-6);
        let mut n = 0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            n += 1;
            if n > 70 {
                return Err(Error::Convergence {
                    what: "generalized region-A bracket",
                    residual: f(hi),
                    iterations: n,
                });
            }
        }
        let cfg = SolverConfig::<f64> {
            rel_tol: 1e-14,
            abs_tol: 1e-15,
            max_iter: 200,
        };
        let beta = find_root(f, Bracket::new((lo / 2.0).min(hi / 2.0), hi)?, &cfg)?;
        let gamma = gen_gamma(kappa, beta);
        let j = region_a_rate(kappa, beta);
        let gsol_res = gamma - gen_gamma(kappa, beta);
        return Ok(GenRateResult {
            j_g: j.max(0.0),
            i_g: j.max(0.0) / (sigma * sigma),
            region: GenRegion::A,
            beta: Some(beta),
            gamma: Some(gamma),
            xi: None,
            eta: None,
            branch_index: None,
            residuals: vec![f(beta), gsol_res],
            ambiguous: false,
        });
    }

    // Region B: enumerate eta branches, keep residual-feasible candidates,
    // return the least action.
    let mut cands = region_b_candidates(kappa, k_over_s0);
    if cands.is_empty() {
        return Err(Error::Convergence {
            what: "generalized region-B solve",
            residual: f64::NAN,
            iterations: 0,
        });
    }
    cands.sort_by(|a, b| a.j.total_cmp(&b.j));
    let best = cands[0];
    let distinct = cands
        .iter()
        .filter(|c| (c.xi - best.xi).abs() > 1e-9 || (c.j - best.j).abs() > 1e-9)
        .count();
    Ok(GenRateResult {
        j_g: best.j,
        i_g: best.j / (sigma * sigma),
        region: GenRegion::B,
        beta: None,
        gamma: None,
        xi: Some(best.xi),
        eta: Some(best.eta),
        branch_index: Some(best.branch_index),
        residuals: vec![best.eta_residual, best.xi_residual],
        ambiguous: distinct > 0,
    })
}

/// Which direction a symmetry mapping went.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryDirection {
    FloatingToFixed,
    FixedToFloating,
}

/// A contract mapped through the floating/fixed symmetry, with the exact
/// price relation `price(original) = price_scale * price(mapped)`.
///
/// For a floating forward-start contract `(kappa, r, q, tau T, T)` the mapped
/// contract is the opposite-side fixed-strike contract
/// `(K = kappa S0, rates swapped, start 0, maturity (1 - tau) T)` and
/// `price_scale = exp(-q tau T)`. The scale is forced by the change of
/// measure: the floating price discounts dividends over the whole `[0, T]`
/// while the mapped fixed contract only lives on a window of length
/// `(1 - tau) T`. It degenerates to 1 when `q = 0` or `tau = 0`.
#[derive(Debug, Clone)]
pub struct SymmetryMapped {
    pub model: ModelSpec,
    pub contract: ContractSpec,
    pub direction: SymmetryDirection,
    pub price_scale: f64,
    original: (ModelSpec, ContractSpec),
}

impl SymmetryMapped {
    /// The exact pre-image of this mapping.
    pub fn invert(&self) -> (ModelSpec, ContractSpec) {
        self.original.clone()
    }
}

/// Maps a floating-strike contract to its equivalent fixed-strike contract
/// (and a spot-start fixed contract back to floating) under constant
/// volatility, swapping `r` and `q`, flipping the side, and remapping the
/// window.
///
/// A forward-start *fixed*-strike contract (`tau > 0`) has no dual inside
/// this contract family (its image is a seasoned floating option whose
/// averaging window ends before maturity) and is rejected.
pub fn symmetry_map(model: &ModelSpec, contract: &ContractSpec) -> Result<SymmetryMapped> {
    if !model.is_constant_vol() {
        return Err(Error::InvalidInput(
            "the floating/fixed symmetry holds under constant volatility only".into(),
        ));
    }
    contract.validate()?;
    let swapped = ModelSpec::new(model.s0, model.q, model.r, model.vol.clone())?;
    match contract.family {
        Family::FloatingStrike => {
            let kappa = contract.kappa.expect("validated");
            let t2 = (1.0 - contract.tau) * contract.maturity_t;
            let mapped = ContractSpec::fixed_strike(
                contract.side.flipped(),
                kappa * model.s0,
                t2,
                0.0,
            )?;
            Ok(SymmetryMapped {
                model: swapped,
                contract: mapped,
                direction: SymmetryDirection::FloatingToFixed,
                price_scale: (-model.q * contract.tau * contract.maturity_t).exp(),
                original: (model.clone(), contract.clone()),
            })
        }
        Family::FixedStrike => {
            if contract.tau != 0.0 {
                return Err(Error::RegimeUnsupported(
                    "the dual of a forward-start fixed-strike contract is a seasoned floating \
                     option, which this contract family cannot represent"
                        .into(),
                ));
            }
            let k = contract.strike_k.expect("validated");
            let mapped = ContractSpec::floating_strike(
                contract.side.flipped(),
                k / model.s0,
                contract.maturity_t,
                0.0,
            )?;
            Ok(SymmetryMapped {
                model: swapped,
                contract: mapped,
                direction: SymmetryDirection::FixedToFloating,
                price_scale: 1.0,
                original: (model.clone(), contract.clone()),
            })
        }
        Family::Generalized => Err(Error::UnsupportedFamily(
            "generalized contracts have no floating/fixed dual".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Side;

    #[test]
    fn floating_rate_examples() {
        assert_eq!(floating_rate_bs(1.0f64, 0.5, 0.3).unwrap(), 0.0);
        let r = floating_rate_bs(1.2f64, 0.5, 1.0).unwrap();
        assert!((r - 0.04813 / 0.5).abs() < 2e-5, "r={r}");
        let r = floating_rate_bs(0.8f64, 0.0, 0.2).unwrap();
        assert!((r - 0.07823 / 0.04).abs() < 3e-4, "r={r}");
        assert!(floating_rate_bs(-1.0f64, 0.5, 1.0).is_err());
    }

    #[test]
    fn generalized_vanishes_on_atm_line() {
        for kappa in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let r = generalized_rate_bs(kappa, 1.0 - kappa, 1.0).unwrap();
            assert_eq!(r.region, GenRegion::AtmLine);
            assert!(r.j_g < 1e-12);
        }
    }

    #[test]
    fn generalized_kappa_zero_is_fixed_strike() {
        let r = generalized_rate_bs(0.0, 1.3, 1.0).unwrap();
        assert!((r.j_g - 0.09818).abs() < 5e-6, "j={}", r.j_g);
        let r = generalized_rate_bs(0.0, 0.8, 1.0).unwrap();
        assert!((r.j_g - 0.07823).abs() < 5e-6, "j={}", r.j_g);
    }

    #[test]
    fn generalized_k_zero_is_floating() {
        // By the argument symmetry, J_g(kappa, 0) = J_g(0, kappa) = J_BS(kappa).
        let r = generalized_rate_bs(1.3, 0.0, 1.0).unwrap();
        assert_eq!(r.region, GenRegion::A);
        assert!((r.j_g - 0.09818).abs() < 1e-5, "j={}", r.j_g);
        let r = generalized_rate_bs(0.8, 0.0, 1.0).unwrap();
        assert_eq!(r.region, GenRegion::B);
        assert!((r.j_g - 0.07823).abs() < 1e-5, "j={}", r.j_g);
    }

    #[test]
    fn generalized_argument_symmetry() {
        let pairs = [
            (0.2, 1.1),
            (0.3, 0.4),
            (0.05, 0.6),
            (1.4, 0.7),
            (0.25, 0.35),
        ];
        for (a, b) in pairs {
            let ja = generalized_rate_bs(a, b, 1.0).unwrap().j_g;
            let jb = generalized_rate_bs(b, a, 1.0).unwrap().j_g;
            assert!((ja - jb).abs() < 1e-8, "({a},{b}): {ja} vs {jb}");
        }
    }

    #[test]
    fn generalized_residuals_are_tight() {
        let r = generalized_rate_bs(0.2, 1.1, 1.0).unwrap();
        assert!(r.residuals.iter().all(|x| x.abs() < 1e-9), "{:?}", r.residuals);
        let r = generalized_rate_bs(0.3, 0.4, 1.0).unwrap();
        assert!(r.residuals.iter().all(|x| x.abs() < 1e-9), "{:?}", r.residuals);
        assert!(r.xi.unwrap() > 0.0 && r.xi.unwrap() < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn generalized_quadratic_near_atm_line() {
        // j_g at distance eps from the line scales like eps^2.
        let kappa = 0.4;
        let j2 = generalized_rate_bs(kappa, 1.0 - kappa + 1e-2, 1.0).unwrap().j_g;
        let j3 = generalized_rate_bs(kappa, 1.0 - kappa + 1e-3, 1.0).unwrap().j_g;
        let ratio = j2 / j3;
        assert!(ratio > 50.0 && ratio < 200.0, "ratio={ratio}");
        let j2 = generalized_rate_bs(kappa, 1.0 - kappa - 1e-2, 1.0).unwrap().j_g;
        let j3 = generalized_rate_bs(kappa, 1.0 - kappa - 1e-3, 1.0).unwrap().j_g;
        let ratio = j2 / j3;
        assert!(ratio > 50.0 && ratio < 200.0, "ratio={ratio}");
    }

    #[test]
    fn symmetry_map_floating_to_fixed() {
        let model = ModelSpec::black_scholes(100.0, 0.1, 0.0, 0.2).unwrap();
        let c = ContractSpec::floating_strike(Side::Call, 1.0, 1.0, 0.5).unwrap();
        let m = symmetry_map(&model, &c).unwrap();
        assert_eq!(m.direction, SymmetryDirection::FloatingToFixed);
        assert_eq!(m.contract.family, Family::FixedStrike);
        assert_eq!(m.contract.side, Side::Put);
        assert_eq!(m.contract.strike_k, Some(100.0));
        assert_eq!(m.contract.maturity_t, 0.5);
        assert_eq!(m.contract.tau, 0.0);
        assert_eq!(m.model.r, 0.0);
        assert_eq!(m.model.q, 0.1);
        assert_eq!(m.price_scale, 1.0); // q = 0 in the original model
    }

    #[test]
    fn symmetry_roundtrip_at_spot_start() {
        let model = ModelSpec::black_scholes(100.0, 0.05, 0.02, 0.3).unwrap();
        let c = ContractSpec::floating_strike(Side::Put, 0.9, 2.0, 0.0).unwrap();
        let m1 = symmetry_map(&model, &c).unwrap();
        let m2 = symmetry_map(&m1.model, &m1.contract).unwrap();
        assert_eq!(m2.contract.family, Family::FloatingStrike);
        assert_eq!(m2.contract.side, Side::Put);
        assert!((m2.contract.kappa.unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(m2.contract.maturity_t, 2.0);
        assert_eq!(m2.model.r, 0.05);
        assert_eq!(m2.model.q, 0.02);
        // invert() restores the exact original at any tau.
        let fwd = ContractSpec::floating_strike(Side::Call, 1.1, 1.0, 0.5).unwrap();
        let m = symmetry_map(&model, &fwd).unwrap();
        let (om, oc) = m.invert();
        assert_eq!(oc.tau, 0.5);
        assert_eq!(om.r, 0.05);
    }

    #[test]
    fn symmetry_rejects_unsupported() {
        let model = ModelSpec::black_scholes(100.0, 0.05, 0.02, 0.3).unwrap();
        let gen = ContractSpec::generalized(Side::Call, 0.5, 40.0, 1.0).unwrap();
        assert!(matches!(
            symmetry_map(&model, &gen),
            Err(Error::UnsupportedFamily(_))
        ));
        let fwd_fixed = ContractSpec::fixed_strike(Side::Call, 110.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            symmetry_map(&model, &fwd_fixed),
            Err(Error::RegimeUnsupported(_))
        ));
    }
}
