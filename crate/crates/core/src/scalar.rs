//! Exact scalar values for merge-tree levels.
//!
//! Every function value in this crate is an arbitrary-precision rational.
//! Equality of levels is meaningful (augmentation inserts nodes at *exact*
//! values, candidate distances are *exact* midpoints), so floating point is
//! never used for anything except display approximations.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Why a scalar literal failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarParseError {
    #[error("empty scalar literal")]
    Empty,
    #[error("malformed scalar literal {0:?}")]
    Malformed(String),
    #[error("zero denominator in scalar literal {0:?}")]
    ZeroDenominator(String),
}

/// An exact rational number, kept in canonical reduced form
/// (numerator and denominator coprime, denominator positive).
///
/// Parses from plain integers (`"4"`, `"-17"`), decimal literals
/// (`"2.5"`, `"-0.125"`), and fraction literals (`"7/2"`, `"-1/3"`).
/// Displays as an integer when the denominator is 1 and as `p/q` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScalarValue(BigRational);

impl ScalarValue {
    pub fn zero() -> Self {
        ScalarValue(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        ScalarValue(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den` in reduced form. Fails on a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self, ScalarParseError> {
        if den.is_zero() {
            return Err(ScalarParseError::ZeroDenominator(format!("{num}/{den}")));
        }
        Ok(ScalarValue(BigRational::new(num, den)))
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        ScalarValue(self.0.abs())
    }

    /// Exact half, e.g. for midpoints of level differences.
    pub fn half(&self) -> Self {
        ScalarValue(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Exact double.
    pub fn double(&self) -> Self {
        ScalarValue(&self.0 * BigRational::from_integer(BigInt::from(2)))
    }

    /// `|self - other|`, exact.
    pub fn abs_diff(&self, other: &Self) -> Self {
        ScalarValue((&self.0 - &other.0).abs())
    }

    /// Display-only approximation; never used in comparisons.
    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &ScalarValue {
    type Output = ScalarValue;
    fn add(self, rhs: &ScalarValue) -> ScalarValue {
        ScalarValue(&self.0 + &rhs.0)
    }
}

impl Sub for &ScalarValue {
    type Output = ScalarValue;
    fn sub(self, rhs: &ScalarValue) -> ScalarValue {
        ScalarValue(&self.0 - &rhs.0)
    }
}

impl Neg for &ScalarValue {
    type Output = ScalarValue;
    fn neg(self) -> ScalarValue {
        ScalarValue(-&self.0)
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ScalarValue {
    type Err = ScalarParseError;

    /// Exact parse; no floating-point round trip. Decimal digits become a
    /// power-of-ten denominator, so `"0.1"` is exactly 1/10.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ScalarParseError::Empty);
        }
        let malformed = || ScalarParseError::Malformed(s.to_string());

        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = parse_int(num).ok_or_else(malformed)?;
            let den: BigInt = parse_int(den).ok_or_else(malformed)?;
            if den.is_zero() {
                return Err(ScalarParseError::ZeroDenominator(s.to_string()));
            }
            return Ok(ScalarValue(BigRational::new(num, den)));
        }

        if let Some((whole, frac)) = s.split_once('.') {
            // Sign belongs to the whole literal; "-0.5" has whole part "-0".
            let (sign, whole_digits) = match whole.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, whole),
            };
            if whole_digits.is_empty()
                || frac.is_empty()
                || !whole_digits.bytes().all(|b| b.is_ascii_digit())
                || !frac.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(malformed());
            }
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            let digits: BigInt = format!("{whole_digits}{frac}").parse().map_err(|_| malformed())?;
            return Ok(ScalarValue(BigRational::new(BigInt::from(sign) * digits, den)));
        }

        let n = parse_int(s).ok_or_else(malformed)?;
        Ok(ScalarValue(BigRational::from_integer(n)))
    }
}

/// Plain signed integer with no stray characters (rejects `"+3"`, `" 3"`, `"1e3"`).
fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl Serialize for ScalarValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScalarValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
