//! Exact rational arithmetic for times, stretches and bound values.
//!
//! Every quantity in this crate that measures time or a ratio of times is a
//! [`Rational`]: a reduced fraction over arbitrary-precision integers. The
//! denominator is always positive and the fraction is always in lowest terms,
//! so equality and ordering are exact and arithmetic can never overflow or
//! round. Floating point never enters any computation; the decimal strings
//! produced by [`Rational::decimal`] come from long division.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Reduced fraction over big integers. See the module docs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(BigRational);

/// Alias used where a value means a point or length on the schedule
/// timeline, as opposed to a dimensionless ratio.
pub type Time = Rational;

impl Rational {
    /// Builds `num/den`. Panics if `den` is zero; use [`Rational::from_str`]
    /// for untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Renders the value in plain decimal with at most `sig` significant
    /// digits (display only; rounding is half away from zero on the last
    /// kept digit, and trailing fractional zeros are trimmed).
    pub fn decimal(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let a = self.0.numer().abs();
        let b = self.0.denom().clone();

        // Position of the leading significant digit: the value is
        // d1.d2... * 10^(exp-1) with exp digits before the decimal point
        // (exp <= 0 means leading zeros after the point).
        let int_part = &a / &b;
        let mut exp: i64 = if int_part.is_zero() {
            let mut scaled = a.clone();
            let mut e = 0i64;
            while scaled < b {
                scaled *= 10;
                e -= 1;
            }
            e + 1
        } else {
            int_part.to_string().len() as i64
        };

        // First sig+1 significant digits as one integer, then round.
        let shift = sig as i64 + 1 - exp;
        let pow10 = |e: u64| num_traits::pow(BigInt::from(10), e as usize);
        let mut digits = if shift >= 0 {
            (a * pow10(shift as u64)) / &b
        } else {
            a / (b * pow10((-shift) as u64))
        };
        let last = (&digits % 10i32).to_i64().unwrap();
        digits /= 10;
        if last >= 5 {
            digits += 1;
        }
        let mut s = digits.to_string();
        if s.len() > sig {
            // Rounding carried into a new leading digit (e.g. 9.99 -> 10.0).
            s.truncate(sig);
            exp += 1;
        }
        let s = s.trim_end_matches('0');
        let s = if s.is_empty() { "1" } else { s };

        let mut out = String::new();
        if negative {
            out.push('-');
        }
        if exp <= 0 {
            out.push_str("0.");
            for _ in 0..(-exp) {
                out.push('0');
            }
            out.push_str(s);
        } else if (exp as usize) >= s.len() {
            out.push_str(s);
            for _ in 0..(exp as usize - s.len()) {
                out.push('0');
            }
        } else {
            out.push_str(&s[..exp as usize]);
            out.push('.');
            out.push_str(&s[exp as usize..]);
        }
        out
    }
}

impl fmt::Display for Rational {
    /// Always the explicit `num/den` form, e.g. `4/1` or `-3/2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

/// Error for unparseable rational text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(pub String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cannot parse {:?} as a rational (expected an integer or \"num/den\")",
            self.0
        )
    }
}

impl std::error::Error for ParseRationalError {}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"7"`, `"-7"`, or `"num/den"` with a nonzero denominator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRationalError(s.to_string());
        let t = s.trim();
        let (num_s, den_s) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num = BigInt::from_str(num_s).map_err(|_| bad())?;
        let den = BigInt::from_str(den_s).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, v| acc + v)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, v| acc + v)
    }
}

impl Serialize for Rational {
    /// Whole values that fit an `i64` serialize as JSON integers, everything
    /// else as a `"num/den"` string.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            if let Some(v) = self.numer().to_i64() {
                return serializer.serialize_i64(v);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "an integer or a \"num/den\" string")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        Err(E::custom(format!(
            "refusing float {v}: times must be exact (integer or \"num/den\" string)"
        )))
    }

    fn visit_str<E: de::Error>(self, s: &str) -> Result<Rational, E> {
        Rational::from_str(s).map_err(|e| E::custom(e.to_string()))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

/// Serde adapter that always writes the `"num/den"` string form, for fields
/// whose wire format pins that shape (schedule segments).
pub mod ratio_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        Rational::from_str(&s).map_err(serde::de::Error::custom)
    }
}
