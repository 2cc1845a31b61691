//! Points of R^n stored as `[S; 3]`, with trailing coordinates zero when the
//! ambient dimension is 2. Keeping a fixed arity avoids per-point allocation
//! and lets 2d and 3d share every formula below.

use crate::scalar::Scalar;

pub type Point<S> = [S; 3];

#[inline]
pub fn zero<S: Scalar>() -> Point<S> {
    [S::zero(); 3]
}

/// First coordinate axis, the conventional fixed unit vector.
#[inline]
pub fn axis_x<S: Scalar>() -> Point<S> {
    [S::one(), S::zero(), S::zero()]
}

#[inline]
pub fn dot<S: Scalar>(a: Point<S>, b: Point<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm<S: Scalar>(a: Point<S>) -> S {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub<S: Scalar>(a: Point<S>, b: Point<S>) -> Point<S> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add<S: Scalar>(a: Point<S>, b: Point<S>) -> Point<S> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale<S: Scalar>(a: Point<S>, c: S) -> Point<S> {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// Rescale to unit length; `None` for the zero vector.
pub fn normalized<S: Scalar>(a: Point<S>) -> Option<Point<S>> {
    let n = norm(a);
    if n > S::zero() {
        Some(scale(a, S::one() / n))
    } else {
        None
    }
}
