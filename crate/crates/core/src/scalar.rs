//! Generic floating-point scalar used by the closed-form math kernels.
//!
//! Every transcendental-equation solver and series expansion in this crate is
//! written against [`Real`], so the same code instantiates at `f32` and `f64`.
//! The model/simulation layers ([`crate::domain`], [`crate::lv_rate`],
//! [`crate::mc`]) and the CLI work in `f64`; see the aliases at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar for the numerical kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Machine epsilon scaled order-of-magnitude guard for comparisons.
    fn eps() -> Self {
        Self::epsilon()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + std::fmt::Debug
        + std::fmt::Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for `T::lit` at call sites dense with constants.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}
