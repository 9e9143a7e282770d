//! Scalar abstraction for probability tables.
//!
//! Everything that is pure table arithmetic (sums, products, comparisons) is
//! written against [`Scalar`], so the same code runs in `f64`, `f32` and in
//! exact [`BigRational`](num_rational::BigRational) arithmetic. Numerical
//! linear algebra (rank, eigenproblems, LP) converts to `f64` at the boundary.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// A probability-valued scalar.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Nearest representable value of `x`. Exact for rationals (dyadic expansion).
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("small integer")
    }
}

impl<T> Scalar for T where
    T: Num + Signed + PartialOrd + Clone + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Largest of two partially ordered values; `a` wins ties and NaN comparisons.
pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// Exact rational with the same value as a finite `f64`.
pub fn exact_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

/// `a` and `b` agree to within `tol`.
pub(crate) fn within<S: Scalar>(a: &S, b: &S, tol: &S) -> bool {
    (a.clone() - b.clone()).abs() <= *tol
}
