//! Rate functions under general local volatility via the double-layer
//! variational problem.
//!
//! Outer layer: a scalar minimization over the corner slope `c` of
//! `c^2 tau / 2 + I(S0 e^{F^{-1}(c tau)}, K) / (1 - tau)`, where
//! `F(y) = int_0^y dz / sigma(S0 e^z)`. Inner layer: the constrained
//! path-energy minimum `I(x, K)` over piecewise-linear paths on a uniform
//! grid, with the averaging constraint enforced through a Lagrange
//! multiplier (Newton on the multiplier, damped quasi-Newton on the path).
//! For constant volatility the whole construction collapses onto the closed
//! forms in [`crate::bs_rate`], which serve as its convergence oracle.

use std::cell::Cell;

use crate::bs_rate::{asian_param, asian_path_value, solve_fwd_rate, PathSample};
use crate::domain::{ModelSpec, VolSpec};
use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate, minimize_1d, Bracket, SolverConfig};

/// Which averaging constraint the inner problem enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    /// `int_0^1 e^phi du = target` (fixed strike; target = K/x).
    FixedAverage,
    /// `int_0^1 e^phi du = target * e^{phi(1)}` (floating strike; target = kappa).
    FloatingAverage,
}

/// Inner constrained minimization instance.
#[derive(Debug, Clone, Copy)]
pub struct InnerProblem {
    /// Start price `x` of the averaging window; the volatility is evaluated
    /// at `x e^{phi(u)}`.
    pub start_price: f64,
    /// Constraint target: `K/x` for [`AverageKind::FixedAverage`], `kappa`
    /// for [`AverageKind::FloatingAverage`].
    pub target: f64,
    pub kind: AverageKind,
    pub n_grid: usize,
}

/// Inner minimizer output.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    /// Minimal action `I` (already in rate units: includes the 1/sigma^2).
    pub value: f64,
    /// Path values `phi_0..phi_n` on the uniform grid (`phi_0 = 0`).
    pub path: Vec<f64>,
    /// Converged Lagrange multiplier.
    pub multiplier: f64,
    /// Constraint residual at the solution.
    pub constraint_residual: f64,
    pub multiplier_iterations: usize,
}

/// Result of the double-layer minimization.
#[derive(Debug, Clone)]
pub struct LvRateResult {
    /// Rate `I_fwd = c*^2 tau / 2 + inner_value / (1 - tau)`.
    pub i_fwd: f64,
    /// Optimal corner slope.
    pub c_star: f64,
    /// Inner rate `I(x(c*), K)` at the optimum.
    pub inner_value: f64,
    pub path: PathSample<f64>,
    /// Objective evaluations spent by the outer minimization.
    pub outer_iterations: usize,
    /// `|f'(tau-) - f'(tau+)|` at the optimum; the corner condition makes
    /// this vanish up to discretization.
    pub corner_slope_gap: f64,
}

/// `F(y) = int_0^y dz / sigma(S0 e^z)`, strictly increasing.
pub fn f_transform(model: &ModelSpec, y: f64) -> f64 {
    match &model.vol {
        VolSpec::Constant(sigma) => y / sigma,
        VolSpec::LocalVol { sigma_fn, .. } => {
            let s0 = model.s0;
            let cfg = SolverConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                max_iter: 60,
            };
            integrate(|z: f64| 1.0 / sigma_fn(s0 * z.exp()), 0.0, y, &cfg)
                .expect("bounded smooth integrand")
        }
    }
}

/// Inverse of [`f_transform`]: the `y` with `F(y) = v`, located inside the
/// exact bracket `[sigma_lo v, sigma_hi v]` given by the volatility bounds.
pub fn f_inverse(model: &ModelSpec, v: f64) -> Result<f64> {
    match &model.vol {
        VolSpec::Constant(sigma) => Ok(sigma * v),
        VolSpec::LocalVol {
            sigma_lo, sigma_hi, ..
        } => {
            if v == 0.0 {
                return Ok(0.0);
            }
            let (mut lo, mut hi) = if v > 0.0 {
                (sigma_lo * v, sigma_hi * v)
            } else {
                (sigma_hi * v, sigma_lo * v)
            };
            // The bounds are spot-checked, not proven; grow a little if the
            // root sits on an endpoint.
            let f = |y: f64| f_transform(model, y) - v;
            for _ in 0..8 {
                if f(lo) * f(hi) <= 0.0 {
                    break;
                }
                let w = hi - lo;
                lo -= 0.5 * w;
                hi += 0.5 * w;
            }
            let cfg = SolverConfig {
                rel_tol: 1e-13,
                abs_tol: 1e-14,
                max_iter: 200,
            };
            find_root(f, Bracket::new(lo, hi)?, &cfg)
        }
    }
}

/// Volatility and its price-derivative at `s`, the derivative by central
/// differencing (zero for constant volatility).
fn sigma_and_slope(model: &ModelSpec, s: f64) -> (f64, f64) {
    match &model.vol {
        VolSpec::Constant(sig) => (*sig, 0.0),
        VolSpec::LocalVol { sigma_fn, .. } => {
            let eps = 1e-6 * s.max(1e-12);
            let up = sigma_fn(s + eps);
            let dn = sigma_fn(s - eps);
            (sigma_fn(s), (up - dn) / (2.0 * eps))
        }
    }
}

struct InnerWorkspace {
    // Trapezoid weights for the constraint.
    w: Vec<f64>,
    h: f64,
    n: usize,
}

impl InnerWorkspace {
    fn new(n: usize) -> Self {
        let h = 1.0 / n as f64;
        let mut w = vec![h; n + 1];
        w[0] = 0.5 * h;
        w[n] = 0.5 * h;
        InnerWorkspace { w, h, n }
    }

    /// Discretized action with midpoint-rule volatility.
    fn action(&self, model: &ModelSpec, x: f64, phi: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let mid = x * (0.5 * (phi[i] + phi[i + 1])).exp();
            let sig = model.sigma_at(mid);
            let d = phi[i + 1] - phi[i];
            s += d * d / (2.0 * self.h * sig * sig);
        }
        s
    }

    fn constraint(&self, p: &InnerProblem, phi: &[f64]) -> f64 {
        let avg: f64 = phi.iter().zip(&self.w).map(|(v, w)| w * v.exp()).sum();
        match p.kind {
            AverageKind::FixedAverage => avg - p.target,
            AverageKind::FloatingAverage => avg - p.target * phi[self.n].exp(),
        }
    }

    /// Gradient of the action w.r.t. phi_1..phi_n, including the volatility's
    /// own path dependence.
    fn action_grad(&self, model: &ModelSpec, x: f64, phi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let mid = x * (0.5 * (phi[i] + phi[i + 1])).exp();
            let (sig, dsig) = sigma_and_slope(model, mid);
            let d = phi[i + 1] - phi[i];
            let flow = d / (self.h * sig * sig);
            // d(action)/d(phi) through the difference quotient...
            if i >= 1 {
                out[i - 1] -= flow;
            }
            out[i] += flow;
            // ...and through sigma(x e^{phi_mid}).
            if dsig != 0.0 {
                let s_term = -d * d * dsig * mid / (2.0 * self.h * sig * sig * sig);
                if i >= 1 {
                    out[i - 1] += 0.5 * s_term;
                }
                out[i] += 0.5 * s_term;
            }
        }
    }

    fn constraint_grad(&self, p: &InnerProblem, phi: &[f64], out: &mut [f64]) {
        for k in 1..=self.n {
            out[k - 1] = self.w[k] * phi[k].exp();
        }
        if p.kind == AverageKind::FloatingAverage {
            out[self.n - 1] -= p.target * phi[self.n].exp();
        }
    }

    /// Tridiagonal quasi-Newton Hessian of the Lagrangian (volatility frozen
    /// per interval; exact for constant volatility).
    fn hessian(
        &self,
        model: &ModelSpec,
        p: &InnerProblem,
        x: f64,
        phi: &[f64],
        lambda: f64,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut inv = vec![0.0; n]; // 1/(h sig_i^2) per interval i = 0..n-1
        for (i, v) in inv.iter_mut().enumerate() {
            let mid = x * (0.5 * (phi[i] + phi[i + 1])).exp();
            let sig = model.sigma_at(mid);
            *v = 1.0 / (self.h * sig * sig);
        }
        for k in 1..=n {
            let mut d = inv[k - 1];
            if k < n {
                d += inv[k];
                sup[k - 1] = -inv[k];
                sub[k] = -inv[k];
            }
            // Constraint curvature.
            d -= lambda * self.w[k] * phi[k].exp();
            if p.kind == AverageKind::FloatingAverage && k == n {
                d += lambda * p.target * phi[n].exp();
            }
            diag[k - 1] = d;
        }
        (sub, diag, sup)
    }
}

/// Tridiagonal solve with partial pivoting (one fill-in superdiagonal).
fn solve_tridiag(
    mut sub: Vec<f64>,
    mut diag: Vec<f64>,
    mut sup: Vec<f64>,
    mut rhs: Vec<f64>,
) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(vec![]);
    }
    let mut sup2 = vec![0.0; n];
    for k in 0..n - 1 {
        if diag[k].abs() < sub[k + 1].abs() {
            std::mem::swap(&mut diag[k], &mut sub[k + 1]);
            let (a, b) = sup.split_at_mut(k + 1);
            std::mem::swap(&mut a[k], &mut diag[k + 1]);
            std::mem::swap(&mut sup2[k], &mut b[0]);
            rhs.swap(k, k + 1);
        }
        if diag[k] == 0.0 {
            return None;
        }
        let m = sub[k + 1] / diag[k];
        diag[k + 1] -= m * sup[k];
        sup[k + 1] -= m * sup2[k];
        rhs[k + 1] -= m * rhs[k];
    }
    if diag[n - 1] == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    if n >= 2 {
        x[n - 2] = (rhs[n - 2] - sup[n - 2] * x[n - 1]) / diag[n - 2];
    }
    for k in (0..n.saturating_sub(2)).rev() {
        x[k] = (rhs[k] - sup[k] * x[k + 1] - sup2[k] * x[k + 2]) / diag[k];
    }
    Some(x)
}

const GRAD_TOL: f64 = 5e-13;
const CONSTRAINT_TOL: f64 = 1e-12;
const MULTIPLIER_CAP: usize = 50;

/// Stationary path of the Lagrangian at fixed multiplier: damped Newton on
/// `grad S - lambda grad C = 0` from the supplied warm start.
fn solve_path_at_multiplier(
    ws: &InnerWorkspace,
    model: &ModelSpec,
    p: &InnerProblem,
    lambda: f64,
    phi: &mut Vec<f64>,
) -> Result<()> {
    let n = ws.n;
    let x = p.start_price;
    let mut gs = vec![0.0; n];
    let mut gc = vec![0.0; n];
    let grad_norm = |gs: &[f64], gc: &[f64]| -> f64 {
        gs.iter()
            .zip(gc)
            .map(|(a, b)| (a - lambda * b).abs())
            .fold(0.0, f64::max)
    };
    for _ in 0..80 {
        ws.action_grad(model, x, phi, &mut gs);
        ws.constraint_grad(p, phi, &mut gc);
        let g0 = grad_norm(&gs, &gc);
        if g0 < GRAD_TOL {
            return Ok(());
        }
        let (sub, diag, sup) = ws.hessian(model, p, x, phi, lambda);
        let rhs: Vec<f64> = gs.iter().zip(&gc).map(|(a, b)| -(a - lambda * b)).collect();
        let step = solve_tridiag(sub, diag, sup, rhs).ok_or(Error::Convergence {
            what: "inner path Newton (singular Hessian)",
            residual: g0,
            iterations: 0,
        })?;
        let mut alpha = 1.0;
        let base: Vec<f64> = phi.clone();
        let mut accepted = false;
        for _ in 0..30 {
            for k in 1..=n {
                phi[k] = base[k] + alpha * step[k - 1];
            }
            ws.action_grad(model, x, phi, &mut gs);
            ws.constraint_grad(p, phi, &mut gc);
            if grad_norm(&gs, &gc) < g0 * (1.0 - 0.1 * alpha) + 1e-15 {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Converged as far as rounding allows.
            phi.clone_from(&base);
            ws.action_grad(model, x, phi, &mut gs);
            ws.constraint_grad(p, phi, &mut gc);
            if grad_norm(&gs, &gc) < 1e4 * GRAD_TOL {
                return Ok(());
            }
            return Err(Error::Convergence {
                what: "inner path Newton (line search stalled)",
                residual: g0,
                iterations: 0,
            });
        }
    }
    ws.action_grad(model, x, phi, &mut gs);
    ws.constraint_grad(p, phi, &mut gc);
    let g = grad_norm(&gs, &gc);
    if g < 1e4 * GRAD_TOL {
        return Ok(());
    }
    Err(Error::Convergence {
        what: "inner path Newton",
        residual: g,
        iterations: 80,
    })
}

/// Black-Scholes warm start: the closed-form optimal path evaluated on the
/// grid, plus the least-squares multiplier estimate.
fn warm_start(ws: &InnerWorkspace, p: &InnerProblem) -> Result<Vec<f64>> {
    let n = ws.n;
    let mut phi = vec![0.0; n + 1];
    match p.kind {
        AverageKind::FixedAverage => {
            let param = asian_param(p.target)?;
            for (k, v) in phi.iter_mut().enumerate() {
                *v = asian_path_value(k as f64 * ws.h, param);
            }
        }
        AverageKind::FloatingAverage => {
            // Time reversal of the fixed path with the same target.
            let param = asian_param(p.target)?;
            let tail = asian_path_value(1.0, param);
            for (k, v) in phi.iter_mut().enumerate() {
                *v = asian_path_value(1.0 - k as f64 * ws.h, param) - tail;
            }
        }
    }
    Ok(phi)
}

/// Solves the inner constrained minimization. The optional `warm` slot
/// carries `(path, multiplier)` from a previous nearby solve.
pub fn inner_rate_warm(
    problem: &InnerProblem,
    model: &ModelSpec,
    warm: Option<(Vec<f64>, f64)>,
) -> Result<InnerSolution> {
    if !(problem.start_price > 0.0) || !(problem.target > 0.0) {
        return Err(Error::InvalidInput(format!(
            "inner problem requires positive start price and target, got {}, {}",
            problem.start_price, problem.target
        )));
    }
    if problem.n_grid < 4 {
        return Err(Error::InvalidInput(format!(
            "n_grid must be >= 4, got {}",
            problem.n_grid
        )));
    }
    let ws = InnerWorkspace::new(problem.n_grid);
    let n = ws.n;
    let x = problem.start_price;

    let (mut phi, mut lambda) = match warm {
        Some((p, l)) if p.len() == n + 1 => (p, l),
        _ => {
            let phi = warm_start(&ws, problem)?;
            let mut gs = vec![0.0; n];
            let mut gc = vec![0.0; n];
            ws.action_grad(model, x, &phi, &mut gs);
            ws.constraint_grad(problem, &phi, &mut gc);
            let num: f64 = gs.iter().zip(&gc).map(|(a, b)| a * b).sum();
            let den: f64 = gc.iter().map(|b| b * b).sum();
            (phi, if den > 0.0 { num / den } else { 0.0 })
        }
    };

    let scale = problem.target.max(1.0);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for it in 0..MULTIPLIER_CAP {
        iterations = it + 1;
        solve_path_at_multiplier(&ws, model, problem, lambda, &mut phi)?;
        residual = ws.constraint(problem, &phi);
        if residual.abs() < CONSTRAINT_TOL * scale {
            break;
        }
        // Newton on the multiplier: dC/dlambda = gc^T H^{-1} gc.
        let mut gc = vec![0.0; n];
        ws.constraint_grad(problem, &phi, &mut gc);
        let (sub, diag, sup) = ws.hessian(model, problem, x, &phi, lambda);
        let hinv_gc =
            solve_tridiag(sub, diag, sup, gc.clone()).ok_or(Error::Convergence {
                what: "multiplier Newton (singular Hessian)",
                residual: residual.abs(),
                iterations: it,
            })?;
        let slope: f64 = gc.iter().zip(&hinv_gc).map(|(a, b)| a * b).sum();
        if slope.abs() < 1e-300 {
            return Err(Error::Convergence {
                what: "multiplier Newton (flat constraint)",
                residual: residual.abs(),
                iterations: it,
            });
        }
        lambda -= residual / slope;
    }
    if residual.abs() >= CONSTRAINT_TOL * scale {
        return Err(Error::Convergence {
            what: "multiplier Newton",
            residual: residual.abs(),
            iterations,
        });
    }
    let value = ws.action(model, x, &phi);
    if !value.is_finite() {
        return Err(Error::Convergence {
            what: "inner action (non-finite value)",
            residual: f64::NAN,
            iterations,
        });
    }
    Ok(InnerSolution {
        value,
        path: phi,
        multiplier: lambda,
        constraint_residual: residual,
        multiplier_iterations: iterations,
    })
}

/// Solves the inner constrained minimization from the Black-Scholes warm
/// start.
pub fn inner_rate(problem: &InnerProblem, model: &ModelSpec) -> Result<InnerSolution> {
    inner_rate_warm(problem, model, None)
}

pub const DEFAULT_N_GRID: usize = 256;

/// Double-layer rate function with the default grid.
pub fn fwd_rate(model: &ModelSpec, k: f64, tau: f64, kind: AverageKind) -> Result<LvRateResult> {
    fwd_rate_with(model, k, tau, kind, DEFAULT_N_GRID)
}

/// Double-layer rate function `I_fwd` for a fixed-strike (`k` = strike `K`)
/// or floating-strike (`k` = `kappa`) forward-start contract, on an inner
/// grid of `n_grid` intervals.
pub fn fwd_rate_with(
    model: &ModelSpec,
    k: f64,
    tau: f64,
    kind: AverageKind,
    n_grid: usize,
) -> Result<LvRateResult> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("strike parameter must be > 0, got {k}")));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau must lie in [0, 1), got {tau}")));
    }
    let s0 = model.s0;
    let sigma0 = model.sigma_spot();

    // Inner solve as a function of the corner slope. Each evaluation warm
    // starts from the closed-form path at its own target: reusing the
    // previous outer evaluation's path can drop the Newton iteration into a
    // wrapped stationary point of the discrete system for deep puts at
    // large tau.
    let evals = Cell::new(0usize);
    let solve_inner = |c: f64| -> Result<(InnerSolution, f64)> {
        evals.set(evals.get() + 1);
        let x = s0 * f_inverse(model, c * tau)?.exp();
        let target = match kind {
            AverageKind::FixedAverage => k / x,
            AverageKind::FloatingAverage => k,
        };
        let problem = InnerProblem {
            start_price: x,
            target,
            kind,
            n_grid,
        };
        let sol = inner_rate_warm(&problem, model, None)?;
        Ok((sol, x))
    };

    let (c_star, inner, x_star, outer_iterations) = if tau == 0.0 {
        let (sol, x) = solve_inner(0.0)?;
        (0.0, sol, x, evals.get())
    } else {
        // Bracket seeded by the constant-volatility corner slope at the spot.
        let c_bs = match kind {
            AverageKind::FixedAverage => solve_fwd_rate(k / s0, tau, sigma0)?.c * sigma0,
            AverageKind::FloatingAverage => 0.0,
        };
        // The closed-form slope lives on the F-transformed scale; for
        // constant sigma the path slope is c*sigma, and the outer variable
        // here is the transformed slope c with f = F^{-1}(c t), so seed with
        // c_bs measured in transformed units: c_transformed = c_path / sigma.
        let c_seed = c_bs / (sigma0 * sigma0) * sigma0; // = c_path/sigma
        let mut half_width = 1.0f64.max(2.0 * c_seed.abs());
        let objective = |c: f64| -> f64 {
            match solve_inner(c) {
                Ok((sol, _)) => 0.5 * c * c * tau + sol.value / (1.0 - tau),
                Err(_) => f64::INFINITY,
            }
        };
        let cfg = SolverConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-11,
            max_iter: 300,
        };
        let mut accepted = None;
        for expansion in 0..=5 {
            let bracket = Bracket::new(c_seed - half_width, c_seed + half_width)?;
            let (c_min, _) = minimize_1d(objective, bracket, &cfg)?;
            let edge = 0.01 * bracket.width();
            if c_min - bracket.lo > edge && bracket.hi - c_min > edge {
                accepted = Some(c_min);
                break;
            }
            if expansion == 5 {
                return Err(Error::OuterBracketFailure {
                    lo: bracket.lo,
                    hi: bracket.hi,
                    expansions: expansion,
                });
            }
            half_width *= 2.0;
        }
        let c_star = accepted.expect("loop either accepts or errors");
        let (sol, x) = solve_inner(c_star)?;
        (c_star, sol, x, evals.get())
    };

    let inner_value = inner.value;
    let i_fwd = 0.5 * c_star * c_star * tau + inner_value / (1.0 - tau);
    if !i_fwd.is_finite() {
        return Err(Error::Convergence {
            what: "double-layer rate (non-finite value)",
            residual: f64::NAN,
            iterations: outer_iterations,
        });
    }

    // Assemble the full path on [0, 1]: F^{-1}(c t) on the linear leg, then
    // the inner path shifted to the corner level. The corner node appears
    // twice.
    let n = n_grid;
    let h = 1.0 / n as f64;
    let corner_level = (x_star / s0).ln();
    let n1 = if tau > 0.0 {
        ((tau * n as f64).round() as usize).max(1)
    } else {
        0
    };
    let mut grid = Vec::with_capacity(n1 + n + 2);
    let mut values = Vec::with_capacity(n1 + n + 2);
    if n1 > 0 {
        for i in 0..=n1 {
            let t = tau * i as f64 / n1 as f64;
            grid.push(t);
            values.push(f_inverse(model, c_star * t)?);
        }
    }
    for (j, pv) in inner.path.iter().enumerate() {
        grid.push(tau + (1.0 - tau) * j as f64 * h);
        values.push(corner_level + pv);
    }

    // Residual in units of K/S0 (fixed) or kappa e^{f(1)} (floating).
    let constraint_residual = match kind {
        AverageKind::FixedAverage => (x_star / s0) * inner.constraint_residual.abs(),
        AverageKind::FloatingAverage => {
            (x_star / s0) * inner.constraint_residual.abs()
        }
    };

    // Corner condition: f'(tau-) = c sigma(x*) vs the inner one-sided slope.
    let corner_slope_gap = if tau > 0.0 {
        let left = c_star * model.sigma_at(x_star);
        let right =
            (-3.0 * inner.path[0] + 4.0 * inner.path[1] - inner.path[2]) / (2.0 * h) / (1.0 - tau);
        (left - right).abs()
    } else {
        0.0
    };

    Ok(LvRateResult {
        i_fwd,
        c_star,
        inner_value,
        path: PathSample {
            grid,
            values,
            corner: tau,
            constraint_residual,
        },
        outer_iterations,
        corner_slope_gap,
    })
}
