//! Scalar backends for the whole calculus.
//!
//! Every layer (jets, the free coefficient algebra, symbols, trace germs) is
//! generic over a [`Scalar`]: a complex number type supporting exact or
//! floating arithmetic.
//!
//! - [`ExactC`] is a complex number with `BigRational` components. Closed
//!   under `+ - * /` (nonzero divisor); used for coefficient-exact identity
//!   checks.
//! - [`F64C`] is `Complex<f64>`; used by the circle model, whose trace germs
//!   involve transcendental constants.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::{Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

/// Complex rationals, the exact backend.
pub type ExactC = num_complex::Complex<BigRational>;

/// Double-precision complex floats, the numeric backend.
pub type F64C = Complex64;

/// Backend tag, used in configuration and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Exact => write!(f, "exact"),
            Backend::Float => write!(f, "float"),
        }
    }
}

/// A complex scalar the calculus can run on.
///
/// Arithmetic is by value (operands are cheap to clone: a pair of f64 or a
/// pair of big rationals). `checked_div` is the only fallible operation; the
/// float backend only rejects division by exact zero.
pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic carries no rounding.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    /// Exact rational embed. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn checked_div(&self, rhs: &Self) -> Option<Self>;
    /// Lossy view for reporting and float-side interop.
    fn to_c64(&self) -> Complex64;
    /// Recognise an exactly-representable integer (used to reconcile
    /// symbol orders that differ by an integer step).
    fn try_to_i64(&self) -> Option<i64>;
    /// Embed an f64 exactly (f64 values are dyadic rationals).
    fn from_f64_dyadic(x: f64) -> Self;
}

impl Scalar for ExactC {
    const EXACT: bool = true;

    fn zero() -> Self {
        <ExactC as Zero>::zero()
    }

    fn one() -> Self {
        <ExactC as One>::one()
    }

    fn from_int(n: i64) -> Self {
        ExactC::new(BigRational::from_integer(n.into()), Zero::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        ExactC::new(BigRational::new(num.into(), den.into()), Zero::zero())
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if Zero::is_zero(rhs) {
            None
        } else {
            Some(self.clone() / rhs.clone())
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn try_to_i64(&self) -> Option<i64> {
        if !Zero::is_zero(&self.im) || !self.re.is_integer() {
            return None;
        }
        self.re.to_integer().to_i64()
    }

    fn from_f64_dyadic(x: f64) -> Self {
        let r = BigRational::from_float(x).expect("finite f64");
        ExactC::new(r, Zero::zero())
    }
}

impl Scalar for F64C {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_int(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        Complex64::new(num as f64 / den as f64, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if Scalar::is_zero(rhs) {
            None
        } else {
            Some(self / rhs)
        }
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }

    fn try_to_i64(&self) -> Option<i64> {
        if self.im != 0.0 || self.re.fract() != 0.0 || self.re.abs() > 9.0e15 {
            return None;
        }
        Some(self.re as i64)
    }

    fn from_f64_dyadic(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// `base^exp` for non-negative integer exponents.
pub fn pow_u<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

/// Exact rational abs-magnitude proxy used by reports: |re| + |im| on the
/// exact backend is zero iff the value is zero.
pub fn report_abs<S: Scalar>(x: &S) -> f64 {
    if S::EXACT {
        if Scalar::is_zero(x) {
            return 0.0;
        }
        let c = x.to_c64();
        let n = c.norm();
        // exact nonzero must not round to a reported zero
        if n == 0.0 {
            f64::MIN_POSITIVE
        } else {
            n
        }
    } else {
        x.to_c64().norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = ExactC::from_ratio(1, 3);
        let b = ExactC::from_ratio(1, 6);
        let s = a.clone() + b.clone();
        assert_eq!(s, ExactC::from_ratio(1, 2));
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q, ExactC::from_int(2));
        assert!(Scalar::is_zero(&ExactC::from_int(0).checked_div(&b).unwrap()));
        assert!(b.checked_div(&<ExactC as Scalar>::zero()).is_none());
    }

    #[test]
    fn integer_recognition() {
        assert_eq!(ExactC::from_ratio(6, 3).try_to_i64(), Some(2));
        assert_eq!(ExactC::from_ratio(1, 3).try_to_i64(), None);
        assert_eq!(F64C::from_int(-4).try_to_i64(), Some(-4));
        assert_eq!(F64C::new(0.5, 0.0).try_to_i64(), None);
        assert_eq!(F64C::new(1.0, 0.25).try_to_i64(), None);
    }

    #[test]
    fn dyadic_embedding_is_exact() {
        let x = ExactC::from_f64_dyadic(-0.375);
        assert_eq!(x, ExactC::from_ratio(-3, 8));
    }
}
