//! Exact non-negative budgets and costs.
//!
//! Every comparison of the form `w(F) <= p` is decided on exact rationals;
//! decimal input such as `1.25` is converted to `5/4` without rounding.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A non-negative exact rational amount.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Budget(BigRational);

impl Budget {
    pub fn zero() -> Self {
        Budget(BigRational::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        Budget(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num/den`; fails when `den == 0`.
    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidNumber(format!("{num}/0")));
        }
        Ok(Budget(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn from_rational(r: BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::NegativeBudget(r.to_string()));
        }
        Ok(Budget(r))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Budget) -> Option<Budget> {
        if other.0 > self.0 {
            None
        } else {
            Some(Budget(&self.0 - &other.0))
        }
    }

    /// Parses `7`, `1.25`, `.5` or `9/2`. A leading `-` is rejected as a
    /// negative budget rather than a syntax error.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix('-') {
            if !rest.is_empty() {
                return Err(Error::NegativeBudget(t.to_string()));
            }
        }
        if let Some((n, d)) = t.split_once('/') {
            let num = parse_digits(n, t)?;
            let den = parse_digits(d, t)?;
            if den.is_zero() {
                return Err(Error::InvalidNumber(t.to_string()));
            }
            return Ok(Budget(BigRational::new(num, den)));
        }
        let (int_part, frac_part) = match t.split_once('.') {
            Some((i, f)) => (i, f),
            None => (t, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::InvalidNumber(t.to_string()));
        }
        let int = if int_part.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(int_part, t)?
        };
        if t.contains('.') && frac_part.is_empty() {
            return Err(Error::InvalidNumber(t.to_string()));
        }
        let mut value = BigRational::from_integer(int);
        if !frac_part.is_empty() {
            let frac = parse_digits(frac_part, t)?;
            let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
            value += BigRational::new(frac, scale);
        }
        Ok(Budget(value))
    }
}

fn parse_digits(s: &str, whole: &str) -> Result<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::InvalidNumber(whole.to_string()));
    }
    BigInt::from_str(s).map_err(|_| Error::InvalidNumber(whole.to_string()))
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Budget::parse(s)
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for Budget {
    type Output = Budget;

    fn add(self, rhs: Budget) -> Budget {
        Budget(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Budget> for &'a Budget {
    type Output = Budget;

    fn add(self, rhs: &'a Budget) -> Budget {
        Budget(&self.0 + &rhs.0)
    }
}

impl<'a> Add<&'a Budget> for Budget {
    type Output = Budget;

    fn add(self, rhs: &'a Budget) -> Budget {
        Budget(self.0 + &rhs.0)
    }
}

impl Sum for Budget {
    fn sum<I: Iterator<Item = Budget>>(iter: I) -> Budget {
        iter.fold(Budget::zero(), |acc, b| acc + b)
    }
}

impl<'a> Sum<&'a Budget> for Budget {
    fn sum<I: Iterator<Item = &'a Budget>>(iter: I) -> Budget {
        iter.fold(Budget::zero(), |acc, b| acc + b)
    }
}

impl Serialize for Budget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Budget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Budget::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// An attribute cost: an exact budget or `+inf` (not for sale).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtendedBudget {
    Finite(Budget),
    Infinite,
}

impl ExtendedBudget {
    pub fn zero() -> Self {
        ExtendedBudget::Finite(Budget::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedBudget::Finite(_))
    }

    pub fn finite(&self) -> Option<&Budget> {
        match self {
            ExtendedBudget::Finite(b) => Some(b),
            ExtendedBudget::Infinite => None,
        }
    }

    /// True when this cost fits in `budget`.
    pub fn le_budget(&self, budget: &Budget) -> bool {
        match self {
            ExtendedBudget::Finite(b) => b <= budget,
            ExtendedBudget::Infinite => false,
        }
    }

    /// Accepts everything [`Budget::parse`] does plus `inf`, `+inf`, `infinity`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Ok(ExtendedBudget::Infinite),
            _ => Budget::parse(t).map(ExtendedBudget::Finite),
        }
    }
}

impl From<Budget> for ExtendedBudget {
    fn from(b: Budget) -> Self {
        ExtendedBudget::Finite(b)
    }
}

impl PartialOrd for ExtendedBudget {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedBudget {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedBudget::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinite) => Ordering::Less,
            (Infinite, Finite(_)) => Ordering::Greater,
            (Infinite, Infinite) => Ordering::Equal,
        }
    }
}

impl Add for ExtendedBudget {
    type Output = ExtendedBudget;

    fn add(self, rhs: ExtendedBudget) -> ExtendedBudget {
        match (self, rhs) {
            (ExtendedBudget::Finite(a), ExtendedBudget::Finite(b)) => ExtendedBudget::Finite(a + b),
            _ => ExtendedBudget::Infinite,
        }
    }
}

impl Sum for ExtendedBudget {
    fn sum<I: Iterator<Item = ExtendedBudget>>(iter: I) -> ExtendedBudget {
        iter.fold(ExtendedBudget::zero(), |acc, b| acc + b)
    }
}

impl fmt::Display for ExtendedBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedBudget::Finite(b) => fmt::Display::fmt(b, f),
            ExtendedBudget::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for ExtendedBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for ExtendedBudget {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtendedBudget {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExtendedBudget::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Budget::parse("1.25").unwrap(), Budget::from_ratio(5, 4).unwrap());
        assert_eq!(Budget::parse(".5").unwrap(), Budget::from_ratio(1, 2).unwrap());
        assert_eq!(Budget::parse("9/2").unwrap().to_string(), "9/2");
        assert_eq!(Budget::parse("10/2").unwrap().to_string(), "5");
        assert_eq!(Budget::parse("0.1").unwrap(), Budget::from_ratio(1, 10).unwrap());
    }

    #[test]
    fn rejects_bad_numbers() {
        assert!(matches!(Budget::parse("-3"), Err(Error::NegativeBudget(_))));
        assert!(matches!(Budget::parse("1/0"), Err(Error::InvalidNumber(_))));
        assert!(Budget::parse("").is_err());
        assert!(Budget::parse("1.").is_err());
        assert!(Budget::parse("a").is_err());
        assert!(Budget::parse("1e3").is_err());
    }

    #[test]
    fn tenths_sum_exactly() {
        let tenth = Budget::parse("0.1").unwrap();
        let three: Budget = std::iter::repeat_n(tenth, 3).sum();
        assert_eq!(three, Budget::parse("0.3").unwrap());
    }

    #[test]
    fn infinity_absorbs() {
        let three = ExtendedBudget::from(Budget::from_integer(3));
        assert_eq!(three.clone() + ExtendedBudget::Infinite, ExtendedBudget::Infinite);
        assert!(three < ExtendedBudget::Infinite);
        assert!(!ExtendedBudget::Infinite.le_budget(&Budget::from_integer(1_000_000)));
        assert_eq!(ExtendedBudget::parse("inf").unwrap(), ExtendedBudget::Infinite);
    }

    #[test]
    fn checked_sub_refuses_negative() {
        let one = Budget::from_integer(1);
        let three = Budget::from_integer(3);
        assert_eq!(three.checked_sub(&one), Some(Budget::from_integer(2)));
        assert_eq!(one.checked_sub(&three), None);
    }
}
