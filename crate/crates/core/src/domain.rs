//! Model and contract types shared by the solvers and the CLI.
//!
//! A [`ModelSpec`] holds the risk-neutral dynamics
//! `dS_t = (r - q) S_t dt + sigma(S_t) S_t dW_t`; the volatility is either a
//! constant or a user-supplied bounded local-volatility function. A
//! [`ContractSpec`] describes a forward-start Asian option (fixed strike,
//! floating strike, or generalized/seasoned) with averaging window
//! `[tau*T, T]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Volatility specification.
///
/// `LocalVol` functions must satisfy `0 < sigma_lo <= sigma(s) <= sigma_hi`
/// for all prices; the bounds are user-supplied and spot-checked on a grid at
/// construction rather than proven. The function must also be safe to call
/// concurrently (part of its contract) and is assumed Hölder continuous in
/// log-price, which is not checked.
#[derive(Clone)]
pub enum VolSpec {
    Constant(f64),
    LocalVol {
        sigma_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        sigma_lo: f64,
        sigma_hi: f64,
    },
}

impl fmt::Debug for VolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VolSpec::Constant(s) => write!(f, "Constant({s})"),
            VolSpec::LocalVol {
                sigma_lo, sigma_hi, ..
            } => write!(f, "LocalVol {{ sigma_lo: {sigma_lo}, sigma_hi: {sigma_hi} }}"),
        }
    }
}

/// Asset dynamics: spot, carry rates, and volatility.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub s0: f64,
    pub r: f64,
    pub q: f64,
    pub vol: VolSpec,
}

impl ModelSpec {
    /// Builds and validates a model. For `LocalVol`, the stated bounds are
    /// spot-checked on a log-price grid `s0 * e^z`, `z` in `[-5, 5]`.
    pub fn new(s0: f64, r: f64, q: f64, vol: VolSpec) -> Result<Self> {
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(Error::InvalidInput(format!("s0 must be > 0, got {s0}")));
        }
        if !(r >= 0.0) || !(q >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "rates must be >= 0, got r={r}, q={q}"
            )));
        }
        match &vol {
            VolSpec::Constant(sigma) => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "constant volatility must be > 0, got {sigma}"
                    )));
                }
            }
            VolSpec::LocalVol {
                sigma_fn,
                sigma_lo,
                sigma_hi,
            } => {
                if !(0.0 < *sigma_lo && sigma_lo <= sigma_hi && sigma_hi.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "local vol bounds must satisfy 0 < lo <= hi < inf, got [{sigma_lo}, {sigma_hi}]"
                    )));
                }
                for i in 0..=100 {
                    let z = -5.0 + 10.0 * i as f64 / 100.0;
                    let s = s0 * z.exp();
                    let v = sigma_fn(s);
                    if !(v >= *sigma_lo && v <= *sigma_hi) {
                        return Err(Error::InvalidInput(format!(
                            "sigma({s}) = {v} escapes the stated bounds [{sigma_lo}, {sigma_hi}]"
                        )));
                    }
                }
            }
        }
        Ok(Self { s0, r, q, vol })
    }

    /// Convenience constructor for the Black-Scholes case.
    pub fn black_scholes(s0: f64, r: f64, q: f64, sigma: f64) -> Result<Self> {
        Self::new(s0, r, q, VolSpec::Constant(sigma))
    }

    /// Local volatility evaluated at price `s`.
    pub fn sigma_at(&self, s: f64) -> f64 {
        match &self.vol {
            VolSpec::Constant(v) => *v,
            VolSpec::LocalVol { sigma_fn, .. } => sigma_fn(s),
        }
    }

    /// Volatility at the spot.
    pub fn sigma_spot(&self) -> f64 {
        self.sigma_at(self.s0)
    }

    /// `(sigma_lo, sigma_hi)`; a constant volatility bounds itself.
    pub fn sigma_bounds(&self) -> (f64, f64) {
        match &self.vol {
            VolSpec::Constant(v) => (*v, *v),
            VolSpec::LocalVol {
                sigma_lo, sigma_hi, ..
            } => (*sigma_lo, *sigma_hi),
        }
    }

    pub fn is_constant_vol(&self) -> bool {
        matches!(self.vol, VolSpec::Constant(_))
    }
}

/// Contract family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Payoff compares the window average against a cash strike `K`.
    FixedStrike,
    /// Payoff compares the window average against `kappa * S_T`.
    FloatingStrike,
    /// Seasoned payoff `(kappa*S_T - A_T + K)^+` with averaging over `[0, T]`.
    Generalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Call,
    Put,
}

impl Side {
    pub fn flipped(self) -> Self {
        match self {
            Side::Call => Side::Put,
            Side::Put => Side::Call,
        }
    }
}

/// A forward-start Asian option contract.
#[derive(Debug, Clone)]
pub struct ContractSpec {
    pub family: Family,
    pub side: Side,
    /// Cash strike `K` (fixed strike and generalized families).
    pub strike_k: Option<f64>,
    /// Floating strike multiplier `kappa` (floating and generalized families).
    pub kappa: Option<f64>,
    /// Maturity in years.
    pub maturity_t: f64,
    /// Forward-start fraction: the averaging window is `[tau*T, T]`.
    pub tau: f64,
}

impl ContractSpec {
    pub fn fixed_strike(side: Side, strike_k: f64, maturity_t: f64, tau: f64) -> Result<Self> {
        let c = Self {
            family: Family::FixedStrike,
            side,
            strike_k: Some(strike_k),
            kappa: None,
            maturity_t,
            tau,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn floating_strike(side: Side, kappa: f64, maturity_t: f64, tau: f64) -> Result<Self> {
        let c = Self {
            family: Family::FloatingStrike,
            side,
            strike_k: None,
            kappa: Some(kappa),
            maturity_t,
            tau,
        };
        c.validate()?;
        Ok(c)
    }

    /// Generalized (seasoned) Asian option; averaging starts at the valuation
    /// date, so `tau = 0`.
    pub fn generalized(side: Side, kappa: f64, strike_k: f64, maturity_t: f64) -> Result<Self> {
        let c = Self {
            family: Family::Generalized,
            side,
            strike_k: Some(strike_k),
            kappa: Some(kappa),
            maturity_t,
            tau: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.maturity_t > 0.0) || !self.maturity_t.is_finite() {
            return Err(Error::InvalidInput(format!(
                "maturity must be > 0, got {}",
                self.maturity_t
            )));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::InvalidInput(format!(
                "tau must lie in [0, 1), got {}",
                self.tau
            )));
        }
        match self.family {
            Family::FixedStrike => {
                let k = self.strike_k.ok_or_else(|| {
                    Error::InvalidInput("fixed-strike contract requires strike_k".into())
                })?;
                if !(k > 0.0) {
                    return Err(Error::InvalidInput(format!("strike_k must be > 0, got {k}")));
                }
            }
            Family::FloatingStrike => {
                let kappa = self.kappa.ok_or_else(|| {
                    Error::InvalidInput("floating-strike contract requires kappa".into())
                })?;
                if !(kappa > 0.0) {
                    return Err(Error::InvalidInput(format!("kappa must be > 0, got {kappa}")));
                }
            }
            Family::Generalized => {
                let kappa = self.kappa.ok_or_else(|| {
                    Error::InvalidInput("generalized contract requires kappa".into())
                })?;
                let k = self.strike_k.ok_or_else(|| {
                    Error::InvalidInput("generalized contract requires strike_k".into())
                })?;
                if !(kappa > 0.0) || !(k >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "generalized contract requires kappa > 0 and strike_k >= 0, got kappa={kappa}, strike_k={k}"
                    )));
                }
                if self.tau != 0.0 {
                    return Err(Error::InvalidInput(
                        "generalized contracts average from time zero (tau = 0)".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Moneyness regime in the short-maturity sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Otm,
    Atm,
    Itm,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Otm => write!(f, "OTM"),
            Regime::Atm => write!(f, "ATM"),
            Regime::Itm => write!(f, "ITM"),
        }
    }
}

/// Moneyness classification plus the log-strike coordinate used by the
/// asymptotic expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moneyness {
    pub label: Regime,
    /// `log(K/S0)` for fixed strike, `log(kappa)` for floating,
    /// `log(kappa + K/S0)` for generalized.
    pub log_strike_x: f64,
}

/// Forward averaged asset price `A(tau*T, tau)` over the window `[tau*T, T]`
/// under the risk-neutral measure.
///
/// Continuous across `r - q = 0`: a series branch takes over when
/// `|(r - q) * T| < 1e-6`.
pub fn forward_average(model: &ModelSpec, t: f64, tau: f64) -> f64 {
    let a = (model.r - model.q) * t;
    if a.abs() < 1e-6 {
        // (e^a - e^(a*tau)) / ((1 - tau) a) = sum_{k>=1} a^(k-1) (1 - tau^k) / (k! (1 - tau))
        let mut acc = 0.0;
        let mut a_pow = 1.0;
        let mut tau_pow = tau;
        let mut fact = 1.0;
        for k in 1..=6 {
            acc += a_pow * (1.0 - tau_pow) / (fact * (1.0 - tau));
            a_pow *= a;
            tau_pow *= tau;
            fact *= (k + 1) as f64;
        }
        model.s0 * acc
    } else {
        // exp(a*tau) * expm1(a*(1-tau)) avoids cancellation for small a, so
        // the two branches join without a jump.
        model.s0 * (a * tau).exp() * (a * (1.0 - tau)).exp_m1() / ((1.0 - tau) * a)
    }
}

/// Classifies a contract as OTM/ATM/ITM in the short-maturity sense, where
/// `K > A(tau*T, tau)` is equivalent to `K > S0`.
///
/// ATM is exact equality of the normalized moneyness with 1; callers wanting
/// a numerical ATM band apply their own threshold.
pub fn classify(model: &ModelSpec, contract: &ContractSpec) -> Moneyness {
    match contract.family {
        Family::FixedStrike => {
            let ratio = contract.strike_k.expect("validated") / model.s0;
            let x = ratio.ln();
            let label = if ratio == 1.0 {
                Regime::Atm
            } else {
                let call_otm = ratio > 1.0;
                match (contract.side, call_otm) {
                    (Side::Call, true) | (Side::Put, false) => Regime::Otm,
                    _ => Regime::Itm,
                }
            };
            Moneyness {
                label,
                log_strike_x: x,
            }
        }
        Family::FloatingStrike => {
            let kappa = contract.kappa.expect("validated");
            let label = if kappa == 1.0 {
                Regime::Atm
            } else {
                // Call pays (kappa*S_T - avg)^+: OTM when kappa < 1.
                let call_otm = kappa < 1.0;
                match (contract.side, call_otm) {
                    (Side::Call, true) | (Side::Put, false) => Regime::Otm,
                    _ => Regime::Itm,
                }
            };
            Moneyness {
                label,
                log_strike_x: kappa.ln(),
            }
        }
        Family::Generalized => {
            let kappa = contract.kappa.expect("validated");
            let m = kappa + contract.strike_k.expect("validated") / model.s0;
            let label = if m == 1.0 {
                Regime::Atm
            } else {
                // Call pays (kappa*S_T - A_T + K)^+: OTM below the ATM line.
                let call_otm = m < 1.0;
                match (contract.side, call_otm) {
                    (Side::Call, true) | (Side::Put, false) => Regime::Otm,
                    _ => Regime::Itm,
                }
            };
            Moneyness {
                label,
                log_strike_x: m.ln(),
            }
        }
    }
}
