//! Scalar abstractions.
//!
//! Exact geometry is generic over [`ExactField`], implemented for
//! [`BigRational`] (the default everywhere) and [`Rational64`] (fast,
//! panics on overflow). Floating point code is generic over
//! [`num_traits::Float`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// An ordered field of exact rationals.
pub trait ExactField:
    Clone
    + Debug
    + Display
    + Hash
    + Ord
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    fn from_bigint(n: &BigInt) -> Self;

    fn from_fraction(numer: &BigInt, denom: &BigInt) -> Self {
        Self::from_bigint(numer) / Self::from_bigint(denom)
    }

    fn numer_big(&self) -> BigInt;
    fn denom_big(&self) -> BigInt;

    fn floor_big(&self) -> BigInt;
    fn ceil_big(&self) -> BigInt;

    fn is_integral(&self) -> bool {
        self.denom_big().is_one()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Round to the nearest integer, halves away from zero.
    fn round_big(&self) -> BigInt {
        let half = Self::one() / (Self::one() + Self::one());
        if self.is_negative() {
            -(self.abs() + half).floor_big()
        } else {
            (self.clone() + half).floor_big()
        }
    }
}

impl ExactField for BigRational {
    fn from_bigint(n: &BigInt) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn numer_big(&self) -> BigInt {
        self.numer().clone()
    }

    fn denom_big(&self) -> BigInt {
        self.denom().clone()
    }

    fn floor_big(&self) -> BigInt {
        self.floor().to_integer()
    }

    fn ceil_big(&self) -> BigInt {
        self.ceil().to_integer()
    }
}

impl ExactField for Rational64 {
    fn from_bigint(n: &BigInt) -> Self {
        Rational64::from_integer(n.to_i64().expect("integer does not fit in i64"))
    }

    fn numer_big(&self) -> BigInt {
        BigInt::from(*self.numer())
    }

    fn denom_big(&self) -> BigInt {
        BigInt::from(*self.denom())
    }

    fn floor_big(&self) -> BigInt {
        BigInt::from(self.floor().to_integer())
    }

    fn ceil_big(&self) -> BigInt {
        BigInt::from(self.ceil().to_integer())
    }
}

pub fn int<R: ExactField>(n: i64) -> R {
    R::from_i64(n).expect("small integer is representable")
}

pub fn frac<R: ExactField>(numer: i64, denom: i64) -> R {
    int::<R>(numer) / int::<R>(denom)
}

/// Parse `"p/q"`, `"p"` or a plain decimal such as `"-0.25"`.
pub fn parse_exact<R: ExactField>(s: &str) -> Option<R> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(R::from_fraction(&p, &q));
    }
    if let Some((whole, digits)) = s.split_once('.') {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let whole_abs: BigInt = if whole_abs.is_empty() {
            BigInt::zero()
        } else {
            whole_abs.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), digits.len());
        let frac_part: BigInt = digits.parse().ok()?;
        let mut numer = whole_abs * &scale + frac_part;
        if negative {
            numer = -numer;
        }
        return Some(R::from_fraction(&numer, &scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(R::from_bigint(&n))
}

/// Canonical `p/q` (or `p` when integral) string.
pub fn format_exact<R: ExactField>(x: &R) -> String {
    let (p, q) = (x.numer_big(), x.denom_big());
    if q.is_one() {
        p.to_string()
    } else {
        format!("{p}/{q}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let half: BigRational = parse_exact("1/2").unwrap();
        assert_eq!(half, frac(1, 2));
        let neg: BigRational = parse_exact("-0.25").unwrap();
        assert_eq!(neg, frac(-1, 4));
        let whole: Rational64 = parse_exact(" 7 ").unwrap();
        assert_eq!(whole, Rational64::from_integer(7));
        assert!(parse_exact::<BigRational>("1/0").is_none());
        assert!(parse_exact::<BigRational>("pi").is_none());
        assert!(parse_exact::<BigRational>("1.").is_none());
    }

    #[test]
    fn rounding_and_format() {
        let x: BigRational = frac(-5, 2);
        assert_eq!(x.round_big(), BigInt::from(-3));
        assert_eq!(x.floor_big(), BigInt::from(-3));
        assert_eq!(x.ceil_big(), BigInt::from(-2));
        assert_eq!(format_exact(&x), "-5/2");
        assert_eq!(format_exact(&int::<BigRational>(4)), "4");
        assert_eq!(frac::<Rational64>(7, 3).round_big(), BigInt::from(2));
    }
}
