//! Shared numerical kernels: bracketed root finding, 1-D minimization, and
//! adaptive quadrature.
//!
//! All routines are pure functions of their inputs and safe to call
//! concurrently.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// An interval `[lo, hi]` with `lo < hi`.
///
/// For root finding the objective must change sign across the bracket; for
/// minimization the objective should be unimodal on it (callers'
/// responsibility — with a non-unimodal objective the minimizer returns *a*
/// local minimum inside the bracket).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bracket requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

/// Tolerances and iteration budget shared by the kernels.
///
/// `rel_tol`/`abs_tol` bound the solution localization as
/// `rel_tol * |x| + abs_tol`; `max_iter` caps iterations (root finding,
/// minimization) or recursion depth (quadrature).
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: lit(1e-12),
            abs_tol: lit(1e-14),
            max_iter: 200,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) || !(self.abs_tol >= T::zero()) || self.max_iter == 0 {
            return Err(Error::InvalidInput(
                "solver config requires rel_tol > 0, abs_tol >= 0, max_iter >= 1".into(),
            ));
        }
        Ok(())
    }

    fn xtol(&self, x: T) -> T {
        self.rel_tol * x.abs() + self.abs_tol
    }
}

/// Finds a root of `f` inside `bracket` by Brent's method (inverse
/// quadratic / secant steps accepted only while they stay inside the current
/// bracket, bisection otherwise).
///
/// Converges when `|f(x)| <= abs_tol` or the bracket width falls below
/// `rel_tol * |x| + abs_tol`.
pub fn find_root<T: Real>(
    mut f: impl FnMut(T) -> T,
    bracket: Bracket<T>,
    cfg: &SolverConfig<T>,
) -> Result<T> {
    cfg.validate()?;
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);

    let mut a = bracket.lo;
    let mut b = bracket.hi;
    let mut fa = f(a);
    let mut fb = f(b);

    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Convergence {
            what: "find_root (non-finite objective at bracket endpoint)",
            residual: f64::NAN,
            iterations: 0,
        });
    }
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa * fb > T::zero() {
        return Err(Error::NoSignChange {
            lo: a.to_f64().unwrap_or(f64::NAN),
            hi: b.to_f64().unwrap_or(f64::NAN),
            f_lo: fa.to_f64().unwrap_or(f64::NAN),
            f_hi: fb.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..cfg.max_iter {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::eps() * b.abs() + half * cfg.xtol(b);
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= cfg.abs_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Secant (a == c) or inverse quadratic interpolation.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * xm * s, T::one() - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (two * xm * q * (q - r) - (b - a) * (r - T::one())),
                    (q - T::one()) * (r - T::one()) * (s - T::one()),
                )
            };
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = lit::<T>(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b = b + if d.abs() > tol1 {
            d
        } else if xm > T::zero() {
            tol1
        } else {
            -tol1
        };
        fb = f(b);
        if fb == T::zero() {
            return Ok(b);
        }
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }

    Err(Error::MaxIterExceeded {
        what: "find_root",
        iterations: cfg.max_iter,
        residual: fb.abs().to_f64().unwrap_or(f64::NAN),
    })
}

/// Locates the minimum of `f` on `bracket` by Brent's method
/// (golden-section with parabolic acceleration). Returns `(argmin, min)`.
pub fn minimize_1d<T: Real>(
    mut f: impl FnMut(T) -> T,
    bracket: Bracket<T>,
    cfg: &SolverConfig<T>,
) -> Result<(T, T)> {
    cfg.validate()?;
    let golden = lit::<T>(0.381_966_011_250_105_2); // (3 - sqrt(5)) / 2
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);

    let mut a = bracket.lo;
    let mut b = bracket.hi;
    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d = T::zero();
    let mut e = T::zero();

    for _ in 0..cfg.max_iter {
        let xm = half * (a + b);
        let tol1 = cfg.xtol(x).max(T::eps() * x.abs() * lit(4.0));
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (b - a) {
            return Ok((x, fx));
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // Parabolic fit through (v, w, x).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (half * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm > x { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < xm { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Err(Error::MaxIterExceeded {
        what: "minimize_1d",
        iterations: cfg.max_iter,
        residual: (b - a).abs().to_f64().unwrap_or(f64::NAN),
    })
}

/// Integrates `f` over `[a, b]` by adaptive Simpson quadrature with estimated
/// error below `rel_tol * |result| + abs_tol`. `cfg.max_iter` bounds the
/// recursion depth.
pub fn integrate<T: Real>(
    mut f: impl FnMut(T) -> T,
    a: T,
    b: T,
    cfg: &SolverConfig<T>,
) -> Result<T> {
    cfg.validate()?;
    if a == b {
        return Ok(T::zero());
    }
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit::<T>(6.0);

    let fa = f(a);
    let fb = f(b);
    let m = half * (a + b);
    let fm = f(m);
    let whole = (b - a) * sixth * (fa + lit::<T>(4.0) * fm + fb);

    // First pass with the absolute tolerance; rescale once the magnitude of
    // the result is known.
    let tol0 = cfg.rel_tol * whole.abs() + cfg.abs_tol;
    let depth_limit = cfg.max_iter.min(64);
    simpson_rec(&mut f, a, b, fa, fm, fb, whole, tol0, depth_limit)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Real>(
    f: &mut impl FnMut(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
) -> Result<T> {
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit::<T>(6.0);
    let four = lit::<T>(4.0);

    let m = half * (a + b);
    let lm = half * (a + m);
    let rm = half * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) * sixth * (fa + four * flm + fm);
    let right = (b - m) * sixth * (fm + four * frm + fb);
    let delta = left + right - whole;

    if delta.abs() <= lit::<T>(15.0) * tol || tol <= T::eps() * whole.abs() {
        return Ok(left + right + delta / lit(15.0));
    }
    if depth == 0 {
        return Err(Error::MaxIterExceeded {
            what: "integrate",
            iterations: 0,
            residual: delta.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    let lv = simpson_rec(f, a, m, fa, flm, fm, left, half * tol, depth - 1)?;
    let rv = simpson_rec(f, m, b, fm, frm, fb, right, half * tol, depth - 1)?;
    Ok(lv + rv)
}
