use crate::error::{Error, Result};
use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use super::Real;

/// Exact rational input parameter, written and read as a decimal literal.
///
/// User-facing parameters (`alpha`, `t`, `tol`, ...) are kept exact so that
/// the same literal yields correctly rounded values at every precision.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal(Rational);

impl Decimal {
    pub fn from_int(v: i64) -> Self {
        Decimal(Rational::from(v))
    }

    pub fn from_rational(r: Rational) -> Self {
        Decimal(r)
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn to_real(&self, prec: u32) -> Real {
        Real::with_val(prec, &self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.cmp0().is_eq()
    }

    pub fn is_positive(&self) -> bool {
        self.0.cmp0().is_gt()
    }

    pub fn is_negative(&self) -> bool {
        self.0.cmp0().is_lt()
    }

    /// The value as a non-negative integer, if it is one.
    pub fn as_u32(&self) -> Option<u32> {
        if *self.0.denom() == 1 {
            self.0.numer().to_u32()
        } else {
            None
        }
    }

    pub fn is_integer(&self) -> bool {
        *self.0.denom() == 1
    }

    pub fn add(&self, other: &Decimal) -> Decimal {
        Decimal(Rational::from(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Decimal) -> Decimal {
        Decimal(Rational::from(&self.0 - &other.0))
    }

    pub fn mul(&self, other: &Decimal) -> Decimal {
        Decimal(Rational::from(&self.0 * &other.0))
    }

    pub fn mul_int(&self, k: i64) -> Decimal {
        Decimal(Rational::from(&self.0 * k))
    }

    pub fn div_int(&self, k: i64) -> Decimal {
        assert!(k != 0, "division by zero");
        Decimal(Rational::from(&self.0 / k))
    }
}

impl FromStr for Decimal {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(text.to_string());
        let t = text.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: Integer = num.trim().parse().map_err(|_| bad())?;
            let den: Integer = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Decimal(Rational::from((num, den))));
        }
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (negative, mantissa) = match mantissa.as_bytes().first() {
            Some(b'-') => (true, &mantissa[1..]),
            Some(b'+') => (false, &mantissa[1..]),
            _ => (false, mantissa),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut value = Rational::from(Integer::from_str_radix(&digits, 10).map_err(|_| bad())?);
        let scale = exp as i64 - frac_part.len() as i64;
        let pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs() as u32));
        if scale >= 0 {
            value *= pow;
        } else {
            value /= pow;
        }
        if negative {
            value = -value;
        }
        Ok(Decimal(value))
    }
}

impl fmt::Display for Decimal {
    /// Canonical form: equal values print identically.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut den = self.0.denom().clone();
        let twos = den.find_one(0).unwrap_or(0);
        den >>= twos;
        let mut fives = 0u32;
        while den.is_divisible_u(5) {
            den /= 5u32;
            fives += 1;
        }
        if den != 1 {
            return write!(f, "{}/{}", self.0.numer(), self.0.denom());
        }
        let p = twos.max(fives);
        let mut digits =
            (self.0.numer() * Integer::from(Integer::u_pow_u(10, p))) / self.0.denom();
        let mut exp = -(p as i64);
        while digits.is_divisible_u(10) {
            digits /= 10u32;
            exp += 1;
        }
        let sign = if digits < 0 { "-" } else { "" };
        let body = digits.abs().to_string();
        if (0..=6).contains(&exp) {
            write!(f, "{sign}{body}{}", "0".repeat(exp as usize))
        } else if (-12..0).contains(&exp) {
            let shift = (-exp) as usize;
            if body.len() > shift {
                let (a, b) = body.split_at(body.len() - shift);
                write!(f, "{sign}{a}.{b}")
            } else {
                write!(f, "{sign}0.{}{body}", "0".repeat(shift - body.len()))
            }
        } else {
            write!(f, "{sign}{body}e{exp}")
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(d("1.0").to_string(), "1");
        assert_eq!(d("1e4").to_string(), "10000");
        assert_eq!(d("1e-25").to_string(), "1e-25");
        assert_eq!(d("0.001").to_string(), "0.001");
        assert_eq!(d("-2.50").to_string(), "-2.5");
        assert_eq!(d("+.5").to_string(), "0.5");
        assert_eq!(d("1e8").to_string(), "1e8");
        assert_eq!(d("1/3").to_string(), "1/3");
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1.2.3", "1e", "--1", "1/0", "."] {
            assert!(bad.parse::<Decimal>().is_err(), "{bad}");
        }
    }

    #[test]
    fn exact_arithmetic() {
        let t = d("0.7");
        let h = d("1e-8");
        assert_eq!(t.add(&h).sub(&h), t);
        assert_eq!(d("0.5").mul_int(4), d("2"));
        assert!(d("3").is_integer());
        assert_eq!(d("3").as_u32(), Some(3));
        assert_eq!(d("2.5").as_u32(), None);
    }

    proptest! {
        #[test]
        fn display_parses_back(mant in -10_000_000i64..10_000_000, exp in -30i32..30) {
            let x = d(&format!("{mant}e{exp}"));
            prop_assert_eq!(d(&x.to_string()), x);
        }
    }
}
