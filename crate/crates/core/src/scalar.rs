//! Scalar abstraction shared by every module.
//!
//! Weights, masses and costs are extended nonnegative reals: ordinary floats
//! plus `+inf`. IEEE infinity already absorbs addition and is neutral for
//! `min`; the one rule IEEE gets wrong for measures is `0 * inf`, which is
//! handled by [`Scalar::weighted`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumCast};

/// Floating point type usable as a weight, mass or cost.
pub trait Scalar: Float + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static {
    /// Tolerance for "sums to one" checks when a measure, coupling or kernel
    /// is constructed.
    const MASS_TOL: f64;

    /// Base step of the supply perturbation used by the transport solver.
    const PERTURBATION: f64;

    /// Literal conversion from `f64` (rounding for narrower types).
    fn lit(x: f64) -> Self;

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64;

    /// `mass * value` with the measure-theoretic convention `0 * inf = 0`.
    #[inline]
    fn weighted(mass: Self, value: Self) -> Self {
        if mass == Self::zero() {
            Self::zero()
        } else {
            mass * value
        }
    }

    /// Absolute difference between two extended reals; two equal infinities
    /// are at distance zero.
    #[inline]
    fn ext_diff(a: Self, b: Self) -> Self {
        if a == b {
            Self::zero()
        } else {
            (a - b).abs()
        }
    }

    /// `a <= b + tol` on extended reals.
    #[inline]
    fn ext_le(a: Self, b: Self, tol: Self) -> bool {
        b.is_infinite() || a <= b + tol
    }
}

impl Scalar for f64 {
    const MASS_TOL: f64 = 1e-12;
    const PERTURBATION: f64 = 1e-13;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const MASS_TOL: f64 = 1e-5;
    const PERTURBATION: f64 = 1e-6;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// `sum(values)` where `inf` absorbs everything.
pub fn ext_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}

/// Checks a scalar is a valid extended nonnegative real (not NaN, not negative).
pub(crate) fn is_ext_nonneg<T: Scalar>(x: T) -> bool {
    !x.is_nan() && x >= T::zero()
}
