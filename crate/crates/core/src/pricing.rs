//! Price asymptotes, closed-form option evaluators, and equivalent
//! volatilities.
//!
//! Out-of-the-money prices decay like `exp(-I_fwd/T)`: the deliverable is the
//! slope `lim T log Price = -I_fwd` and the equivalent volatilities; the
//! exponential itself is only an order of magnitude (the theory fixes no
//! prefactor). At the money the price scales like `sqrt(T)` with an explicit
//! coefficient. In the money the price expands around put-call parity.

use crate::bs_rate::{j_bs, solve_fwd_rate};
use crate::domain::{
    classify, forward_average, ContractSpec, Family, ModelSpec, Moneyness, Regime, Side,
};
use crate::error::{Error, Result};
use crate::floating::{floating_rate_bs, generalized_rate_bs};
use crate::lv_rate::{self, AverageKind};
use crate::scalar::{lit, Real};

/// Standard normal density.
pub fn norm_pdf<T: Real>(x: T) -> T {
    (-x * x * lit::<T>(0.5)).exp() / (lit::<T>(2.0) * T::PI()).sqrt()
}

/// Standard normal CDF via Cody's rational approximations for erf/erfc
/// (relative error near machine precision in double).
pub fn norm_cdf<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    half * erfc(-x / lit::<T>(std::f64::consts::SQRT_2))
}

/// Complementary error function (Cody 1969 rational approximations).
pub fn erfc<T: Real>(x: T) -> T {
    let ax = x.abs();
    if ax < lit(0.46875) {
        return T::one() - erf_small(x);
    }
    let v = if ax <= lit(4.0) {
        erfc_mid(ax)
    } else {
        erfc_large(ax)
    };
    if x < T::zero() {
        lit::<T>(2.0) - v
    } else {
        v
    }
}

fn erf_small<T: Real>(x: T) -> T {
    const P: [f64; 5] = [
        3.209377589138469472562e3,
        3.774852376853020208137e2,
        1.138641541510501556495e2,
        3.161123743870565596947e0,
        1.857777061846031526730e-1,
    ];
    const Q: [f64; 5] = [
        2.844236833439170622273e3,
        1.282616526077372275645e3,
        2.440246379344441733056e2,
        2.360129095234412093499e1,
        1.0,
    ];
    let z = x * x;
    let mut num = lit::<T>(P[4]);
    let mut den = lit::<T>(Q[4]);
    for i in (0..4).rev() {
        num = num * z + lit(P[i]);
        den = den * z + lit(Q[i]);
    }
    x * num / den
}

fn erfc_mid<T: Real>(x: T) -> T {
    const P: [f64; 9] = [
        1.23033935479799725272e3,
        2.05107837782607146532e3,
        1.71204761263407058314e3,
        8.81952221241769090411e2,
        2.98635138197400131132e2,
        6.61191906371416294775e1,
        8.88314979438837594118e0,
        5.64188496988670089180e-1,
        2.15311535474403846343e-8,
    ];
    const Q: [f64; 9] = [
        1.23033935480374942043e3,
        3.43936767414372163696e3,
        4.36261909014324715820e3,
        3.29079923573345962678e3,
        1.62138957456669018874e3,
        5.37181101862009857509e2,
        1.17693950891312499305e2,
        1.57449261107098347253e1,
        1.0,
    ];
    let mut num = lit::<T>(P[8]);
    let mut den = lit::<T>(Q[8]);
    for i in (0..8).rev() {
        num = num * x + lit(P[i]);
        den = den * x + lit(Q[i]);
    }
    (-x * x).exp() * num / den
}

fn erfc_large<T: Real>(x: T) -> T {
    // sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
    // evaluated backward; converges well past machine precision for x >= 4.
    let half = lit::<T>(0.5);
    let mut t = x;
    for n in (1..=80).rev() {
        t = x + lit::<T>(n as f64) * half / t;
    }
    let sqrt_pi = lit::<T>(1.772_453_850_905_516);
    (-x * x).exp() / (sqrt_pi * t)
}

/// Black formula on the forward: `df * (F N(d1) - K N(d2))` with
/// `d_{1,2} = (log(F/K) ± vol^2 t / 2) / (vol sqrt(t))`. Zero volatility (or
/// zero time) returns discounted intrinsic value.
pub fn bs_call<T: Real>(forward: T, strike: T, vol: T, t: T, df: T) -> T {
    let std = vol * t.max(T::zero()).sqrt();
    if std <= T::zero() || forward <= T::zero() || strike <= T::zero() {
        return df * (forward - strike).max(T::zero());
    }
    let d1 = ((forward / strike).ln() + std * std * lit::<T>(0.5)) / std;
    let d2 = d1 - std;
    df * (forward * norm_cdf(d1) - strike * norm_cdf(d2))
}

/// Bachelier (normal) call: `df * ((F - K) N(d) + vol_n sqrt(t) n(d))` with
/// `d = (F - K)/(vol_n sqrt(t))`. Zero normal volatility returns discounted
/// intrinsic value.
pub fn bachelier_call<T: Real>(forward: T, strike: T, vol_n: T, t: T, df: T) -> T {
    let std = vol_n * t.max(T::zero()).sqrt();
    if std <= T::zero() {
        return df * (forward - strike).max(T::zero());
    }
    let d = (forward - strike) / std;
    df * ((forward - strike) * norm_cdf(d) + std * norm_pdf(d))
}

/// How the price (or asymptote) in a [`PriceResult`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceMethod {
    /// OTM: only `lim T log Price = -I_fwd` is fixed by the theory; the
    /// `price` field is `exp(-I_fwd/T)`, an order of magnitude with no
    /// prefactor.
    OtmExponentialOrder,
    /// ATM: `price = coeff * sqrt(T)` with the exact leading coefficient.
    AtmSqrtT,
    /// ITM: parity expansion through `O(T)`.
    ItmParityExpansion,
}

/// Asymptotic price output per regime.
#[derive(Debug, Clone)]
pub struct PriceResult {
    /// Approximate price when the regime supports one.
    pub price: Option<f64>,
    /// `lim T log Price = -I_fwd` (OTM only), strictly negative.
    pub log_price_slope: Option<f64>,
    /// ATM coefficient `lim Price/sqrt(T)`, strictly positive (ATM only).
    pub sqrt_t_coeff: Option<f64>,
    pub regime: Moneyness,
    pub sigma_ln: Option<f64>,
    pub sigma_n: Option<f64>,
    pub method: PriceMethod,
}

/// Rate function `I_fwd` for an OTM contract, routed to the closed form for
/// constant volatility and to the variational solver otherwise.
pub fn otm_rate(model: &ModelSpec, contract: &ContractSpec) -> Result<f64> {
    match contract.family {
        Family::FixedStrike => {
            let k = contract.strike_k.expect("validated");
            if model.is_constant_vol() {
                Ok(solve_fwd_rate(k / model.s0, contract.tau, model.sigma_spot())?.i_fwd)
            } else {
                Ok(lv_rate::fwd_rate(model, k, contract.tau, AverageKind::FixedAverage)?.i_fwd)
            }
        }
        Family::FloatingStrike => {
            let kappa = contract.kappa.expect("validated");
            if model.is_constant_vol() {
                floating_rate_bs(kappa, contract.tau, model.sigma_spot())
            } else {
                Ok(lv_rate::fwd_rate(model, kappa, contract.tau, AverageKind::FloatingAverage)?
                    .i_fwd)
            }
        }
        Family::Generalized => {
            if !model.is_constant_vol() {
                return Err(Error::RegimeUnsupported(
                    "generalized rate functions are implemented for constant volatility only"
                        .into(),
                ));
            }
            let kappa = contract.kappa.expect("validated");
            let k = contract.strike_k.expect("validated");
            Ok(generalized_rate_bs(kappa, k / model.s0, model.sigma_spot())?.i_g)
        }
    }
}

/// Dispatches on the regime and produces the price asymptote the theory
/// licenses there.
pub fn asymptotic_price(model: &ModelSpec, contract: &ContractSpec) -> Result<PriceResult> {
    contract.validate()?;
    let mny = classify(model, contract);
    let t = contract.maturity_t;
    let tau = contract.tau;
    let s0 = model.s0;
    let (r, q) = (model.r, model.q);
    let sigma0 = model.sigma_spot();

    match mny.label {
        Regime::Otm => {
            let rate = otm_rate(model, contract)?;
            let (sigma_ln, sigma_n) = equivalent_vols(model, contract, rate)?;
            Ok(PriceResult {
                price: Some((-rate / t).exp()),
                log_price_slope: Some(-rate),
                sqrt_t_coeff: None,
                regime: mny,
                sigma_ln: Some(sigma_ln),
                sigma_n: Some(sigma_n),
                method: PriceMethod::OtmExponentialOrder,
            })
        }
        Regime::Atm => {
            let coeff = match contract.family {
                Family::FixedStrike => sigma0 * s0 * ((1.0 + 2.0 * tau) / (6.0 * std::f64::consts::PI)).sqrt(),
                Family::FloatingStrike => {
                    sigma0 * s0 * ((1.0 - tau) / (6.0 * std::f64::consts::PI)).sqrt()
                }
                Family::Generalized => {
                    let kappa = contract.kappa.expect("validated");
                    sigma0 * s0 * (kappa * kappa - kappa + 1.0 / 3.0).sqrt()
                        / (2.0 * std::f64::consts::PI).sqrt()
                }
            };
            let (sigma_ln, sigma_n) = match contract.family {
                Family::Generalized => (None, None),
                _ => {
                    let (ln, n) = equivalent_vols(model, contract, 0.0)?;
                    (Some(ln), Some(n))
                }
            };
            Ok(PriceResult {
                price: Some(coeff * t.sqrt()),
                log_price_slope: None,
                sqrt_t_coeff: Some(coeff),
                regime: mny,
                sigma_ln,
                sigma_n,
                method: PriceMethod::AtmSqrtT,
            })
        }
        Regime::Itm => {
            let price = match contract.family {
                Family::FixedStrike => {
                    let k = contract.strike_k.expect("validated");
                    match contract.side {
                        Side::Call => {
                            s0 - k + (0.5 * s0 * (r - q) * (1.0 + tau) - (s0 - k) * r) * t
                        }
                        Side::Put => {
                            k - s0 - (0.5 * s0 * (r - q) * (1.0 + tau) - (s0 - k) * r) * t
                        }
                    }
                }
                Family::FloatingStrike => {
                    let kappa = contract.kappa.expect("validated");
                    let drift = s0 * (0.5 * (r + q) - kappa * q - 0.5 * (r - q) * tau);
                    match contract.side {
                        Side::Call => s0 * (kappa - 1.0) + drift * t,
                        Side::Put => s0 * (1.0 - kappa) - drift * t,
                    }
                }
                Family::Generalized => {
                    return Err(Error::RegimeUnsupported(
                        "no in-the-money expansion is available for generalized contracts".into(),
                    ));
                }
            };
            Ok(PriceResult {
                price: Some(price.max(0.0)),
                log_price_slope: None,
                sqrt_t_coeff: None,
                regime: mny,
                sigma_ln: None,
                sigma_n: None,
                method: PriceMethod::ItmParityExpansion,
            })
        }
    }
}

/// Equivalent log-normal and normal (Bachelier) volatilities in the
/// short-maturity limit. For OTM contracts `rate` is the rate function
/// `I_fwd` and must be positive; for ATM contracts it is ignored.
pub fn equivalent_vols(
    model: &ModelSpec,
    contract: &ContractSpec,
    rate: f64,
) -> Result<(f64, f64)> {
    let mny = classify(model, contract);
    let s0 = model.s0;
    let sigma0 = model.sigma_spot();
    let tau = contract.tau;
    match (mny.label, contract.family) {
        (Regime::Atm, Family::FixedStrike) => {
            let level = ((1.0 + 2.0 * tau) / 3.0).sqrt();
            Ok((sigma0 * level, sigma0 * s0 * level))
        }
        (Regime::Atm, Family::FloatingStrike) => {
            let level = ((1.0 - tau) / 3.0).sqrt();
            Ok((sigma0 * level, sigma0 * s0 * level))
        }
        (Regime::Otm, Family::FixedStrike) | (Regime::Itm, Family::FixedStrike) => {
            if mny.label == Regime::Itm {
                return Err(Error::RegimeUnsupported(
                    "equivalent volatilities are defined for OTM and ATM contracts".into(),
                ));
            }
            if !(rate > 0.0) {
                return Err(Error::Domain(format!(
                    "OTM equivalent volatility requires a positive rate, got {rate}"
                )));
            }
            let k = contract.strike_k.expect("validated");
            let denom = (2.0 * rate).sqrt();
            Ok(((k / s0).ln().abs() / denom, (k - s0).abs() / denom))
        }
        (Regime::Otm, Family::FloatingStrike) => {
            if !(rate > 0.0) {
                return Err(Error::Domain(format!(
                    "OTM equivalent volatility requires a positive rate, got {rate}"
                )));
            }
            let kappa = contract.kappa.expect("validated");
            let denom = (2.0 * rate).sqrt();
            Ok((kappa.ln().abs() / denom, s0 * (kappa - 1.0).abs() / denom))
        }
        _ => Err(Error::RegimeUnsupported(
            "equivalent volatilities cover OTM/ATM fixed- and floating-strike contracts".into(),
        )),
    }
}

/// Taylor smile of the equivalent log-normal volatility around the money:
///
/// `sigma sqrt((1+2tau)/3) [ 1 + (1-tau)^2 x / (10 (1+2tau)^2)
///   - (1-tau)^3 (23 - 143 tau) x^2 / (2100 (1+2tau)^4) ]`.
pub fn smile_expansion<T: Real>(x: T, tau: T, sigma: T) -> T {
    let one = T::one();
    let omt = one - tau;
    let opt2 = one + lit::<T>(2.0) * tau;
    let level = sigma * (opt2 / lit::<T>(3.0)).sqrt();
    level
        * (one + omt * omt * x / (lit::<T>(10.0) * opt2 * opt2)
            - omt.powi(3) * (lit::<T>(23.0) - lit::<T>(143.0) * tau) * x * x
                / (lit::<T>(2100.0) * opt2.powi(4)))
}

/// Bachelier price approximation for the floating-strike forward-start call
/// `(kappa S_T - A_{[tau T, T]})^+`: a zero-strike normal call on the spread
/// with forward `F_f = kappa S0 e^{(r-q)T} - A(tau T, tau)` and the
/// short-maturity normal volatility (ATM form when `kappa = 1`).
pub fn floating_price_approx(model: &ModelSpec, kappa: f64, tau: f64, t: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
    }
    if !(t > 0.0) || !(0.0..1.0).contains(&tau) {
        return Err(Error::Domain(format!("need t > 0 and tau in [0,1), got t={t}, tau={tau}")));
    }
    let s0 = model.s0;
    let sigma0 = model.sigma_spot();
    let forward = kappa * s0 * ((model.r - model.q) * t).exp() - forward_average(model, t, tau);
    let sigma_n = if kappa == 1.0 {
        sigma0 * s0 * ((1.0 - tau) / 3.0).sqrt()
    } else {
        let j = j_bs(kappa)?;
        sigma0 * s0 * (kappa - 1.0).abs() * ((1.0 - tau) / (2.0 * j)).sqrt()
    };
    Ok(bachelier_call(forward, 0.0, sigma_n, t, (-model.r * t).exp()))
}
