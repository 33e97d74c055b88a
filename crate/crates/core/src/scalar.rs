//! Scalar abstractions shared by the closed-form and exact-oracle code.
//!
//! Anything that is a polynomial in `p` (moments, exact probability masses)
//! is written against [`Scalar`], so the same routine runs in `f32`, `f64`
//! or exactly in [`BigRational`](num_rational::BigRational). Routines that
//! need transcendental functions ask for [`Real`] instead.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num};

/// Field-like scalar: enough arithmetic to evaluate polynomials in `p`.
pub trait Scalar: Num + FromPrimitive + Clone + PartialOrd + Debug + Send + Sync {}

impl<T> Scalar for T where T: Num + FromPrimitive + Clone + PartialOrd + Debug + Send + Sync {}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts a count into the scalar type; every scalar we support
/// represents `u64` values (possibly rounded, for floats).
pub(crate) fn from_count<S: Scalar>(k: u64) -> S {
    S::from_u64(k).expect("scalar type cannot represent an integer count")
}

/// Integer power by repeated squaring; `num_traits::pow` needs `Copy` on some paths.
pub(crate) fn powi<S: Scalar>(base: &S, exp: u64) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        e >>= 1;
        if e > 0 {
            b = b.clone() * b;
        }
    }
    acc
}

/// `C(n, k)` as an exact `u128`; panics if an intermediate product overflows.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128).expect("binomial coefficient overflows u128") / (i + 1) as u128;
    }
    acc
}
