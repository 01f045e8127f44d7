//! Closed-form asymptotic expansions of the forward-start rate function in
//! the around-ATM and deep-OTM regions of the `(tau, x)` plane,
//! `x = log(K/S0)`.
//!
//! The expansion scale is `(1-tau)|x|`: small values put the contract in the
//! tau-AATM region, large values in tau-DOTM. The deep-OTM put side splits
//! further on `2 tau/(1-tau)` vs `e^x (-x)`. Outside both regions callers
//! fall back to the exact solver in [`crate::bs_rate`].

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Region of the `(tau, x)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    TauAatm,
    TauDotmCallWing,
    TauDotmPutRegion1,
    TauDotmPutRegion2,
    /// Neither expansion applies; use the exact solver.
    Intermediate,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionLabel::TauAatm => "tau-AATM",
            RegionLabel::TauDotmCallWing => "tau-DOTM call wing",
            RegionLabel::TauDotmPutRegion1 => "tau-DOTM put region 1",
            RegionLabel::TauDotmPutRegion2 => "tau-DOTM put region 2",
            RegionLabel::Intermediate => "intermediate",
        };
        write!(f, "{s}")
    }
}

/// Region classification with the quantities that decided it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub label: RegionLabel,
    /// `(1 - tau) |x|`, the expansion scale.
    pub scale: T,
    /// `2 tau / ((1-tau) e^x (-x))` for `x < 0`; the put-side regions split
    /// on this ratio vs 1. `None` on the call side.
    pub kappa_ratio: Option<T>,
}

pub const AATM_THRESHOLD: f64 = 0.1;
pub const DOTM_THRESHOLD: f64 = 2.0;

/// Classifies `(x, tau)` with the default representative thresholds
/// `(1-tau)|x| <= 0.1` (AATM) and `>= 2` (DOTM).
pub fn classify_region<T: Real>(x: T, tau: T) -> Region<T> {
    classify_region_with(x, tau, lit(AATM_THRESHOLD), lit(DOTM_THRESHOLD))
}

/// Classifies `(x, tau)` with caller-supplied thresholds. The underlying
/// regions are defined only asymptotically; the thresholds pick concrete
/// representatives.
pub fn classify_region_with<T: Real>(
    x: T,
    tau: T,
    aatm_threshold: T,
    dotm_threshold: T,
) -> Region<T> {
    let scale = (T::one() - tau) * x.abs();
    let kappa_ratio = if x < T::zero() {
        let denom = (T::one() - tau) * x.exp() * (-x);
        Some(lit::<T>(2.0) * tau / denom)
    } else {
        None
    };
    let label = if scale <= aatm_threshold {
        RegionLabel::TauAatm
    } else if scale >= dotm_threshold {
        if x > T::zero() {
            RegionLabel::TauDotmCallWing
        } else if kappa_ratio.map_or(false, |k| k < T::one()) {
            RegionLabel::TauDotmPutRegion1
        } else {
            RegionLabel::TauDotmPutRegion2
        }
    } else {
        RegionLabel::Intermediate
    };
    Region {
        label,
        scale,
        kappa_ratio,
    }
}

/// Around-the-money expansion of the rate function `I_fwd(x, tau, sigma)`:
///
/// `(3/(2 sigma^2)) [ x^2/(1+2tau) - (1-tau)^2 x^3 / (5 (1+2tau)^3)
///   + (1-tau)^3 (109 - 349 tau) x^4 / (2100 (1+2tau)^5) ]`
///
/// with an `O(x^5)` remainder. Accuracy degrades outside the tau-AATM region.
pub fn aatm_rate<T: Real>(x: T, tau: T, sigma: T) -> T {
    let one = T::one();
    let omt = one - tau;
    let opt2 = one + lit::<T>(2.0) * tau;
    let x2 = x * x;
    let bracket = x2 / opt2 - omt * omt * x2 * x / (lit::<T>(5.0) * opt2.powi(3))
        + omt.powi(3) * (lit::<T>(109.0) - lit::<T>(349.0) * tau) * x2 * x2
            / (lit::<T>(2100.0) * opt2.powi(5));
    lit::<T>(1.5) / (sigma * sigma) * bracket
}

/// Deep-OTM call-wing expansion, valid for `(1-tau) x >> 1`:
///
/// `(1/(2 sigma^2)) [ x^2 + 2x log(2(1-tau)x) - 2x + log^2(2(1-tau)x) ]`.
pub fn dotm_call_rate<T: Real>(x: T, tau: T, sigma: T) -> T {
    let two = lit::<T>(2.0);
    let l = (two * (T::one() - tau) * x).ln();
    (x * x + two * x * l - two * x + l * l) / (two * sigma * sigma)
}

/// Deep-OTM put expansion (`x < 0`, `(1-tau)(-x) >> 1`), dispatching on the
/// two regions of the left wing:
///
/// * region 1 (`2tau/(1-tau) << e^x(-x)`):
///   `(2/(sigma^2 (1-tau)^2)) [ e^{-2x} tau + (1-3tau) e^{-x} - pi^2/4 - 1 ]`
/// * region 2 (`2tau/(1-tau) >> e^x(-x)`):
///   `(2/sigma^2) [ x^2/(4tau) + x/(2tau) L + (-x)/(2tau) + L^2/(4tau)
///      - (pi^2/12)(3-tau)/(1-tau)^2 ]`, `L = log((-x)(1-tau)/(2tau))`.
///
/// Near the region boundary both formulas are inaccurate; the returned
/// [`Region`] tells the caller which one was used.
pub fn dotm_put_rate<T: Real>(x: T, tau: T, sigma: T) -> Result<(T, Region<T>)> {
    if x >= T::zero() {
        return Err(Error::Domain(format!(
            "deep-OTM put expansion requires x < 0, got {x}"
        )));
    }
    let region = classify_region(x, tau);
    let one = T::one();
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let omt = one - tau;
    let s2 = sigma * sigma;
    let use_region1 = region.kappa_ratio.map_or(true, |k| k < T::one());
    let value = if use_region1 {
        let pi2 = T::PI() * T::PI();
        two / (s2 * omt * omt)
            * ((-two * x).exp() * tau + (one - lit::<T>(3.0) * tau) * (-x).exp()
                - pi2 / four
                - one)
    } else {
        let l = ((-x) * omt / (two * tau)).ln();
        let pi2 = T::PI() * T::PI();
        two / s2
            * (x * x / (four * tau) + x * l / (two * tau) + (-x) / (two * tau)
                + l * l / (four * tau)
                - pi2 / lit::<T>(12.0) * (lit::<T>(3.0) - tau) / (omt * omt))
    };
    Ok((value, region))
}
