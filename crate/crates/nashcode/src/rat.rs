//! Exact rational arithmetic for probabilities and payoffs.
//!
//! Every numeric quantity in this crate is a [`Rat`]. Tie detection compares
//! products of probabilities for exact equality, so floating point is never
//! used in any verdict.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number in canonical reduced form (denominator > 0,
/// gcd of numerator and denominator equal to 1).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// Builds `num / den`. Fails on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn from_int(v: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// -1, 0, or 1.
    pub fn sign(&self) -> i8 {
        match self.0.cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    pub fn recip(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(self.0.recip()))
    }

    /// True for probabilities: 0 <= self <= 1.
    pub fn in_unit_interval(&self) -> bool {
        !self.is_negative() && self.0 <= BigRational::one()
    }

    /// `(numerator, denominator)` when the value is nonnegative and both
    /// parts fit in a u128.
    pub fn to_unsigned_parts(&self) -> Option<(u128, u128)> {
        use num::ToPrimitive;
        if self.is_negative() {
            return None;
        }
        Some((self.0.numer().to_u128()?, self.0.denom().to_u128()?))
    }

    pub fn from_unsigned_parts(num: u128, den: u128) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    /// Decimal rendering when the denominator is of the form 2^a * 5^b,
    /// e.g. 17/20 -> "0.85". Used by the human-readable tables.
    pub fn decimal(&self) -> Option<String> {
        let mut den = self.0.denom().clone();
        let mut twos = 0u32;
        let mut fives = 0u32;
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        while (&den % &two).is_zero() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if den != BigInt::one() {
            return None;
        }
        let digits = twos.max(fives);
        let scale = num::pow::pow(BigInt::from(10), digits as usize);
        let scaled = self.0.numer() * &scale / self.0.denom();
        let neg = scaled.is_negative();
        let mut body = scaled.abs().to_string();
        if digits == 0 {
            return Some(if neg { format!("-{body}") } else { body });
        }
        while body.len() <= digits as usize {
            body.insert(0, '0');
        }
        body.insert(body.len() - digits as usize, '.');
        Some(if neg { format!("-{body}") } else { body })
    }
}

/// Parses a rational from a fraction ("17/20"), a decimal literal ("0.85"),
/// or an integer ("3"). Decimals convert exactly.
pub fn parse_rational(text: &str) -> Result<Rat, Error> {
    text.parse()
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let text = s.trim();
        let malformed = || Error::MalformedRational(text.to_string());
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        if body.is_empty() {
            return Err(malformed());
        }
        let magnitude = if let Some((num, den)) = body.split_once('/') {
            let num: BigInt = num.parse().map_err(|_| malformed())?;
            let den: BigInt = den.parse().map_err(|_| malformed())?;
            if num.is_negative() || den.is_negative() {
                return Err(malformed());
            }
            if den.is_zero() {
                return Err(Error::ZeroDenominator);
            }
            BigRational::new(num, den)
        } else if let Some((int, frac)) = body.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            let int: BigInt = if int.is_empty() {
                BigInt::zero()
            } else {
                int.parse().map_err(|_| malformed())?
            };
            if int.is_negative() {
                return Err(malformed());
            }
            let frac_num: BigInt = frac.parse().map_err(|_| malformed())?;
            let scale = num::pow::pow(BigInt::from(10), frac.len());
            BigRational::from_integer(int) + BigRational::new(frac_num, scale)
        } else {
            let int: BigInt = body.parse().map_err(|_| malformed())?;
            if int.is_negative() {
                return Err(malformed());
            }
            BigRational::from_integer(int)
        };
        Ok(Rat(if neg { -magnitude } else { magnitude }))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom() == &BigInt::one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, v| acc + v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(num: i64, den: i64) -> Rat {
        Rat::new(num, den).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.85").unwrap(), rat(17, 20));
        assert_eq!(parse_rational("0.65").unwrap(), rat(13, 20));
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in ["", "a", "1/0", "1//2", "1.2.3", "1e3", "1.", "--1"] {
            assert!(parse_rational(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn canonical_display() {
        assert_eq!(rat(34, 40).to_string(), "17/20");
        assert_eq!(rat(4, 2).to_string(), "2");
        assert_eq!(rat(-3, 6).to_string(), "-1/2");
        assert_eq!(Rat::zero().to_string(), "0");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat(17, 20).decimal().as_deref(), Some("0.85"));
        assert_eq!(rat(89, 20).decimal().as_deref(), Some("4.45"));
        assert_eq!(rat(1, 3).decimal(), None);
        assert_eq!(rat(7, 1).decimal().as_deref(), Some("7"));
        assert_eq!(rat(-1, 4).decimal().as_deref(), Some("-0.25"));
    }

    #[test]
    fn exact_ordering_and_sign() {
        assert!(rat(1, 3) < rat(34, 100));
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(-1, 5).sign(), -1);
        assert_eq!(Rat::zero().sign(), 0);
        assert_eq!(rat(1, 5).sign(), 1);
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(num in -10_000i64..10_000, den in 1i64..10_000) {
            let v = rat(num, den);
            let round = parse_rational(&v.to_string()).unwrap();
            prop_assert_eq!(round, v);
        }

        #[test]
        fn decimal_agrees_with_fraction(num in -10_000i64..10_000, den in 1i64..10_000) {
            let v = rat(num, den);
            if let Some(text) = v.decimal() {
                prop_assert_eq!(parse_rational(&text).unwrap(), v);
            }
        }
    }
}
