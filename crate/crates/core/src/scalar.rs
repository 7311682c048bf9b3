//! Coefficient types.
//!
//! Polynomial arithmetic, derivations and linear algebra are written against
//! [`Scalar`], which any exact or floating field type from the `num` family
//! satisfies. The geometric engine itself only ever uses [`Rational`]:
//! every check it performs is an exact identity.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, Zero};

use crate::error::{Error, Result};

/// Field of coefficients.
pub trait Scalar: Num + Clone + Debug + FromPrimitive + std::ops::Neg<Output = Self> {}

impl<T> Scalar for T where T: Num + Clone + Debug + FromPrimitive + std::ops::Neg<Output = T> {}

/// Arbitrary-precision rational number, always in lowest terms.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Format(format!("invalid rational `{text}`"));
    if t.is_empty() {
        return Err(bad());
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(t).map_err(|_| bad())?,
        )),
    }
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

/// Sign as -1, 0, 1.
pub fn sign(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// `n!` in the scalar type.
pub(crate) fn factorial<S: Scalar>(n: usize) -> S {
    let mut acc = S::one();
    for k in 2..=n {
        acc = acc * S::from_usize(k).expect("factorial factor fits the scalar type");
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3").unwrap(), rat(3));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational(" 0/5 ").unwrap(), rat(0));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn canonical_text() {
        assert_eq!(fmt_rational(&ratio(4, -6)), "-2/3");
        assert_eq!(fmt_rational(&ratio(8, 4)), "2");
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial::<Rational>(5), rat(120));
        assert_eq!(factorial::<f64>(0), 1.0);
    }
}
