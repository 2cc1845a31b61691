//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type through [`Scalar`]. `f64` is the working precision
//! (see the aliases at the crate root); `f32` is supported for cheap smoke
//! runs but cannot meet the tighter tolerances of the diagnostics.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar: f32 or f64.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Pull an `f64` literal into the generic scalar type.
#[inline]
pub fn real<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("literal representable in scalar type")
}

/// `usize` counter as a scalar (node counts, indices in weight formulas).
#[inline]
pub fn count<S: Scalar>(n: usize) -> S {
    S::from_usize(n).expect("count representable in scalar type")
}
