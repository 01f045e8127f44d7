//! Short-maturity asymptotics for forward-start Asian options.
//!
//! Prices, rate functions, optimal paths, and equivalent volatilities for
//! fixed-strike, floating-strike, and generalized (seasoned) Asian options
//! whose averaging window `[tau*T, T]` opens in the future, under
//! Black-Scholes and bounded local-volatility dynamics, with a seeded Monte
//! Carlo engine validating every asymptotic formula.
//!
//! Out of the money the price decays like `exp(-I_fwd/T)`; `I_fwd` solves a
//! constrained path-energy minimization that is closed-form under
//! Black-Scholes ([`bs_rate`], [`floating`]) and a double-layer numerical
//! optimization under local volatility ([`lv_rate`]). At the money the price
//! scales like `sqrt(T)` with explicit coefficients, and in the money it
//! expands around put-call parity ([`pricing`]). The [`mc`] engine prices by
//! simulation with reproducible, thread-count-independent seeding.
//!
//! The numerical kernels and closed-form solvers are generic over the scalar
//! type through [`scalar::Real`]; the model-facing layers work in `f64` (see
//! the aliases below).

pub mod bs_rate;
pub mod domain;
pub mod error;
pub mod expansions;
pub mod floating;
pub mod lv_rate;
pub mod mc;
pub mod numerics;
pub mod pricing;
pub mod scalar;

pub use domain::{classify, forward_average, ContractSpec, Family, ModelSpec, Regime, Side, VolSpec};
pub use error::{Error, Result};

/// Single-precision scalar.
pub type Real32 = f32;
/// Double-precision scalar; the type every model-facing API uses.
pub type Real64 = f64;

/// `f64`-instantiated aliases of the generic kernel types.
pub type Bracket = numerics::Bracket<Real64>;
pub type SolverConfig = numerics::SolverConfig<Real64>;
pub type BsRateResult = bs_rate::BsRateResult<Real64>;
pub type OptimalPath = bs_rate::OptimalPath<Real64>;
pub type PathSample = bs_rate::PathSample<Real64>;
pub type Region = expansions::Region<Real64>;
