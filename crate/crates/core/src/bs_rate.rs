//! Closed-form rate functions and optimal paths for fixed-strike
//! forward-start Asian options under the Black-Scholes model.
//!
//! The short-maturity price of an out-of-the-money contract decays like
//! `exp(-I_fwd / T)` where `I_fwd = J_fwd / sigma^2`. The dimensionless rate
//! `J_fwd(K/S0, tau)` solves a constrained path-energy minimization whose
//! optimizer is piecewise explicit: linear with slope `c` on `[0, tau]`, then
//! the standard Asian optimal path rescaled onto `[tau, 1]`. Eliminating the
//! corner slope `c` reduces everything to one transcendental equation in a
//! single variable: hyperbolic (`beta`) when `K > S0`, trigonometric (`xi`)
//! when `K < S0`.

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate, Bracket, SolverConfig};
use crate::scalar::{lit, Real};

/// Which transcendental branch solved the rate equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBranch {
    /// `K >= S0 e^{c tau}`: hyperbolic branch, parameter `beta` in `[0, inf)`.
    Beta,
    /// `K <= S0 e^{c tau}`: trigonometric branch, parameter `xi` in `[0, pi/2)`.
    Xi,
}

/// Rate function of a fixed-strike forward-start Asian option plus solver
/// internals.
#[derive(Debug, Clone, Copy)]
pub struct BsRateResult<T> {
    /// Dimensionless rate `J_fwd(K/S0, tau)`.
    pub j_fwd: T,
    /// Rate `I_fwd = J_fwd / sigma^2` entering `lim T log C(T) = -I_fwd`.
    pub i_fwd: T,
    /// Slope of the optimal log-price path on `[0, tau]`.
    pub c: T,
    /// Solved branch parameter (`beta` or `xi` depending on `branch`).
    pub beta_or_xi: T,
    pub branch: RateBranch,
    /// Residual of the defining transcendental equation at the solution.
    pub residual: T,
}

/// Discretized optimal log-price path on `[0, 1]`.
///
/// `values[i] = f(grid[i])` with `f(0) = 0`; the corner node `t = tau`
/// appears twice so consumers see the kink location exactly.
#[derive(Debug, Clone)]
pub struct PathSample<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub corner: T,
    /// `|(1/(1-tau)) int_tau^1 e^f dt - K/S0|` by adaptive quadrature.
    pub constraint_residual: T,
}

// --- stable elementary pieces -------------------------------------------------

/// `beta * tanh(beta/2)`; derivative of the Asian path at the window start.
pub(crate) fn beta_tanh_half<T: Real>(beta: T) -> T {
    beta * (beta * lit::<T>(0.5)).tanh()
}

/// `beta^2 - 2 beta tanh(beta/2)` without cancellation near zero.
pub(crate) fn beta_energy_gap<T: Real>(beta: T) -> T {
    if beta.abs() < lit(0.1) {
        let b2 = beta * beta;
        let b4 = b2 * b2;
        b4 * (T::one() / lit::<T>(12.0) - b2 / lit::<T>(120.0)
            + lit::<T>(17.0) * b4 / lit::<T>(20160.0)
            - lit::<T>(31.0) * b4 * b2 / lit::<T>(362880.0))
    } else {
        beta * beta - lit::<T>(2.0) * beta_tanh_half(beta)
    }
}

/// `log(sinh(beta)/beta)`, series near zero, overflow-safe for large `beta`.
pub(crate) fn log_sinh_ratio<T: Real>(beta: T) -> T {
    if beta == T::zero() {
        return T::zero();
    }
    let b2 = beta * beta;
    if beta.abs() < lit(0.25) {
        b2 * (T::one() / lit::<T>(6.0) - b2 / lit::<T>(180.0)
            + b2 * b2 / lit::<T>(2835.0)
            - b2 * b2 * b2 / lit::<T>(37800.0))
    } else if beta > lit(30.0) {
        beta - (lit::<T>(2.0) * beta).ln() + (-(lit::<T>(2.0) * beta)).exp().neg().ln_1p()
    } else {
        (beta.sinh() / beta).ln()
    }
}

/// `log(2 xi / sin(2 xi))` for `xi` in `[0, pi/2)`; nonnegative.
pub(crate) fn log_sinc_recip<T: Real>(xi: T) -> T {
    if xi == T::zero() {
        return T::zero();
    }
    let u = lit::<T>(2.0) * xi;
    if u < lit(0.25) {
        let u2 = u * u;
        u2 * (T::one() / lit::<T>(6.0)
            + u2 / lit::<T>(180.0)
            + u2 * u2 / lit::<T>(2835.0)
            + u2 * u2 * u2 / lit::<T>(37800.0))
    } else {
        (u / u.sin()).ln()
    }
}

/// `xi * tan(xi)`.
pub(crate) fn xi_tan<T: Real>(xi: T) -> T {
    xi * xi.tan()
}

/// `xi * (tan(xi) - xi)` without cancellation near zero.
pub(crate) fn xi_tan_gap<T: Real>(xi: T) -> T {
    if xi.abs() < lit(0.1) {
        let x2 = xi * xi;
        let x4 = x2 * x2;
        x4 * (T::one() / lit::<T>(3.0)
            + lit::<T>(2.0) * x2 / lit::<T>(15.0)
            + lit::<T>(17.0) * x4 / lit::<T>(315.0)
            + lit::<T>(62.0) * x4 * x2 / lit::<T>(2835.0))
    } else {
        xi * (xi.tan() - xi)
    }
}

// --- standard Asian rate (tau = 0) --------------------------------------------

/// Branch parameter of the standard Asian rate function.
#[derive(Debug, Clone, Copy)]
pub enum AsianParam<T> {
    Beta(T),
    Xi(T),
}

/// Solves the standard Asian moneyness equations `sinh(b)/b = x` (for
/// `x >= 1`) or `sin(2 xi)/(2 xi) = x` (for `x < 1`).
pub(crate) fn asian_param<T: Real>(x: T) -> Result<AsianParam<T>> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("moneyness ratio must be > 0, got {x}")));
    }
    let cfg = SolverConfig::default();
    let lx = x.ln();
    if lx.abs() < lit(1e-14) {
        return Ok(AsianParam::Beta(T::zero()));
    }
    if x > T::one() {
        let f = |b: T| log_sinh_ratio(b) - lx;
        let mut hi = T::one();
        while f(hi) < T::zero() {
            hi = hi * lit(2.0);
            if hi > lit(1e6) {
                return Err(Error::Convergence {
                    what: "asian beta bracket",
                    residual: f64::NAN,
                    iterations: 0,
                });
            }
        }
        let beta = find_root(f, Bracket::new(T::zero(), hi)?, &cfg)?;
        Ok(AsianParam::Beta(beta))
    } else {
        let f = |xi: T| log_sinc_recip(xi) + lx;
        let hi = T::FRAC_PI_2() - lit(1e-12);
        let xi = find_root(f, Bracket::new(T::zero(), hi)?, &cfg)?;
        Ok(AsianParam::Xi(xi))
    }
}

/// Rate function `J_BS(x)` of a standard Asian option (averaging from time
/// zero): `beta^2/2 - beta tanh(beta/2)` for `x >= 1`, `2 xi (tan xi - xi)`
/// for `x < 1`, continuous at `x = 1` with value 0.
pub fn j_bs<T: Real>(x: T) -> Result<T> {
    match asian_param(x)? {
        AsianParam::Beta(b) => Ok(beta_energy_gap(b) * lit(0.5)),
        AsianParam::Xi(xi) => Ok(lit::<T>(2.0) * xi_tan_gap(xi)),
    }
}

// --- forward-start rate --------------------------------------------------------

/// Solves the forward-start rate function `J_fwd(K/S0, tau)` of an
/// out-of-the-money fixed-strike contract, together with the corner slope `c`
/// of its optimal path and the rate `I_fwd = J_fwd / sigma^2`.
pub fn solve_fwd_rate<T: Real>(k_over_s0: T, tau: T, sigma: T) -> Result<BsRateResult<T>> {
    if !(k_over_s0 > T::zero()) {
        return Err(Error::Domain(format!(
            "k_over_s0 must be > 0, got {k_over_s0}"
        )));
    }
    if !(tau >= T::zero() && tau < T::one()) {
        return Err(Error::Domain(format!("tau must lie in [0, 1), got {tau}")));
    }
    if !(sigma > T::zero()) {
        return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
    }

    let x = k_over_s0.ln();
    if x.abs() < lit(1e-9) {
        // At the money: c = 0, flat path, zero rate.
        return Ok(BsRateResult {
            j_fwd: T::zero(),
            i_fwd: T::zero(),
            c: T::zero(),
            beta_or_xi: T::zero(),
            branch: if x >= T::zero() {
                RateBranch::Beta
            } else {
                RateBranch::Xi
            },
            residual: T::zero(),
        });
    }

    let cfg = SolverConfig::default();
    let one = T::one();
    let ratio = tau / (one - tau);

    if x > T::zero() {
        // log(sinh b / b) + tau/(1-tau) * b tanh(b/2) = x, strictly increasing.
        let f = |b: T| log_sinh_ratio(b) + ratio * beta_tanh_half(b) - x;
        let mut hi = T::one();
        let mut n = 0;
        while f(hi) < T::zero() {
            hi = hi * lit(2.0);
            n += 1;
            if n > 60 {
                return Err(Error::Convergence {
                    what: "forward beta bracket",
                    residual: f(hi).to_f64().unwrap_or(f64::NAN),
                    iterations: n,
                });
            }
        }
        let beta = find_root(f, Bracket::new(T::zero(), hi)?, &cfg)?;
        let bth = beta_tanh_half(beta);
        let c = bth / (one - tau);
        let j = (tau * bth * bth + (one - tau) * beta_energy_gap(beta))
            / (lit::<T>(2.0) * (one - tau) * (one - tau));
        Ok(BsRateResult {
            j_fwd: j,
            i_fwd: j / (sigma * sigma),
            c,
            beta_or_xi: beta,
            branch: RateBranch::Beta,
            residual: f(beta),
        })
    } else {
        // log(2 xi / sin 2 xi) + 2 tau/(1-tau) * xi tan(xi) = -x, increasing
        // from 0 to +inf on (0, pi/2).
        let f = |xi: T| log_sinc_recip(xi) + lit::<T>(2.0) * ratio * xi_tan(xi) + x;
        let hi = T::FRAC_PI_2() - lit(1e-12);
        let xi = find_root(f, Bracket::new(T::zero(), hi)?, &cfg)?;
        let xt = xi_tan(xi);
        let c = -lit::<T>(2.0) * xt / (one - tau);
        let j = lit::<T>(2.0) * (tau * xt * xt + (one - tau) * xi_tan_gap(xi))
            / ((one - tau) * (one - tau));
        Ok(BsRateResult {
            j_fwd: j,
            i_fwd: j / (sigma * sigma),
            c,
            beta_or_xi: xi,
            branch: RateBranch::Xi,
            residual: f(xi),
        })
    }
}

// --- optimal path ---------------------------------------------------------------

/// Optimal log-price path in callable form: `value(t)` and `slope(t)` on
/// `[0, 1]`, with the corner at `t = tau`.
#[derive(Debug, Clone, Copy)]
pub struct OptimalPath<T> {
    pub c: T,
    pub tau: T,
    pub(crate) param: AsianParam<T>,
}

impl<T: Real> OptimalPath<T> {
    /// Branch parameter of the averaging leg.
    pub fn param(&self) -> AsianParam<T> {
        self.param
    }

    pub fn value(&self, t: T) -> T {
        if t <= self.tau {
            self.c * t
        } else {
            let u = (t - self.tau) / (T::one() - self.tau);
            self.c * self.tau + asian_path_value(u, self.param)
        }
    }

    pub fn slope(&self, t: T) -> T {
        if t < self.tau {
            self.c
        } else {
            let u = (t - self.tau) / (T::one() - self.tau);
            asian_path_slope(u, self.param) / (T::one() - self.tau)
        }
    }
}

/// Standard Asian optimal path `phi(u)` on `[0, 1]`, `phi(0) = 0`.
pub fn asian_path_value<T: Real>(u: T, param: AsianParam<T>) -> T {
    match param {
        AsianParam::Beta(b) => {
            if b == T::zero() {
                return T::zero();
            }
            // b*u - 2 log((e^{bu} + e^b) / (1 + e^b)), overflow-safe.
            let two = lit::<T>(2.0);
            b * u - two * (b * (u - T::one())).exp().ln_1p() + two * (-b).exp().ln_1p()
        }
        AsianParam::Xi(xi) => {
            if xi == T::zero() {
                return T::zero();
            }
            lit::<T>(2.0) * (xi.cos().ln() - (xi * (T::one() - u)).cos().ln())
        }
    }
}

/// Derivative `phi'(u)` of the standard Asian optimal path.
pub fn asian_path_slope<T: Real>(u: T, param: AsianParam<T>) -> T {
    match param {
        AsianParam::Beta(b) => b * (b * (T::one() - u) * lit::<T>(0.5)).tanh(),
        AsianParam::Xi(xi) => -lit::<T>(2.0) * xi * (xi * (T::one() - u)).tan(),
    }
}

/// Optimal path in callable form for a fixed-strike forward-start contract.
pub fn optimal_path_fn<T: Real>(k_over_s0: T, tau: T) -> Result<OptimalPath<T>> {
    let rate = solve_fwd_rate(k_over_s0, tau, T::one())?;
    let param = match rate.branch {
        RateBranch::Beta => AsianParam::Beta(rate.beta_or_xi),
        RateBranch::Xi => AsianParam::Xi(rate.beta_or_xi),
    };
    Ok(OptimalPath {
        c: rate.c,
        tau,
        param,
    })
}

/// Samples the optimal path on a grid of about `n_grid` intervals. The grid
/// contains the corner `t = tau` twice (once ending the linear leg, once
/// starting the averaging leg).
pub fn optimal_path<T: Real>(k_over_s0: T, tau: T, n_grid: usize) -> Result<PathSample<T>> {
    if n_grid < 3 {
        return Err(Error::InvalidInput(format!(
            "n_grid must be >= 3, got {n_grid}"
        )));
    }
    let path = optimal_path_fn(k_over_s0, tau)?;
    let n = n_grid as f64;
    let n1 = if tau > T::zero() {
        ((tau.to_f64().unwrap_or(0.0) * n).round() as usize).max(1)
    } else {
        0
    };
    let n2 = n_grid.saturating_sub(n1).max(2);

    let mut grid = Vec::with_capacity(n1 + n2 + 2);
    let mut values = Vec::with_capacity(n1 + n2 + 2);
    if n1 > 0 {
        for i in 0..=n1 {
            let t = tau * lit::<T>(i as f64 / n1 as f64);
            grid.push(t);
            values.push(path.value(t));
        }
    }
    for j in 0..=n2 {
        let t = tau + (T::one() - tau) * lit::<T>(j as f64 / n2 as f64);
        grid.push(t);
        values.push(if j == 0 { path.c * tau } else { path.value(t) });
    }

    // Window-average constraint, checked by quadrature in the rescaled
    // variable: (1/(1-tau)) int_tau^1 e^f dt = e^{c tau} int_0^1 e^{phi} du.
    let quad_cfg = SolverConfig {
        rel_tol: lit(1e-12),
        abs_tol: lit(1e-13),
        max_iter: 60,
    };
    let avg = integrate(
        |u| (path.c * tau + asian_path_value(u, path.param)).exp(),
        T::zero(),
        T::one(),
        &quad_cfg,
    )?;
    Ok(PathSample {
        grid,
        values,
        corner: tau,
        constraint_residual: (avg - k_over_s0).abs(),
    })
}
