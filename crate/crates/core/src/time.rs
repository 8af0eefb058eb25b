//! Exact rational time values.
//!
//! Values stay in an `i64` ratio while the numbers are small and switch to
//! arbitrary precision on overflow. The representation is canonical, so two
//! equal values always compare, hash and print identically.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseTimeError {
    #[error("empty time value")]
    Empty,
    #[error("malformed time value `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

#[derive(Clone)]
enum Repr {
    Small(Ratio<i64>),
    Big(Box<BigRational>),
}

/// An exact rational number used for every instant, duration and speed.
#[derive(Clone)]
pub struct TimeValue(Repr);

impl TimeValue {
    pub fn zero() -> Self {
        TimeValue(Repr::Small(Ratio::zero()))
    }

    pub fn one() -> Self {
        TimeValue(Repr::Small(Ratio::one()))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_small(Ratio::from_integer(n))
    }

    /// `numer / denom`. Panics when `denom` is zero.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Self::from_big(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_bigs(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Self::from_big(BigRational::new(numer, denom))
    }

    fn from_small(r: Ratio<i64>) -> Self {
        if *r.numer() == i64::MIN || *r.denom() == i64::MIN {
            return Self::from_big(to_big(&r));
        }
        TimeValue(Repr::Small(r))
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                TimeValue(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => TimeValue(Repr::Big(Box::new(r))),
        }
    }

    fn big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => to_big(r),
            Repr::Big(r) => (**r).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        self.big().numer().clone()
    }

    pub fn denom(&self) -> BigInt {
        self.big().denom().clone()
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && !self.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn recip(&self) -> Self {
        Self::one() / self
    }

    /// Integer power.
    pub fn pow(&self, exp: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Nearest `f64`; only for reporting and statistics.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => {
                let scale = 60u32;
                let scaled = (r.numer() << scale) / r.denom();
                scaled.to_f64().unwrap_or(f64::NAN) / 2f64.powi(scale as i32)
            }
        }
    }

    /// Decimal rendering rounded half away from zero.
    pub fn to_decimal(&self, places: usize) -> String {
        let r = self.big();
        let neg = r.is_negative();
        let r = r.abs();
        let scale = BigInt::from(10u32).pow(places as u32);
        let (q, rem) = (r.numer() * &scale).div_rem(r.denom());
        let q = if rem * 2 >= *r.denom() { q + 1 } else { q };
        let digits = q.to_string();
        let body = if places == 0 {
            digits
        } else {
            let padded = format!("{:0>width$}", digits, width = places + 1);
            let (int, frac) = padded.split_at(padded.len() - places);
            format!("{int}.{frac}")
        };
        if neg && body.chars().any(|c| c != '0' && c != '.') {
            format!("-{body}")
        } else {
            body
        }
    }

    pub fn min_of<'a>(a: &'a Self, b: &'a Self) -> &'a Self {
        if a <= b {
            a
        } else {
            b
        }
    }
}

fn to_big(r: &Ratio<i64>) -> BigRational {
    BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

macro_rules! small_or_big {
    ($a:expr, $b:expr, $checked:ident, $op:tt) => {{
        if let (Repr::Small(x), Repr::Small(y)) = (&$a.0, &$b.0) {
            if let Some(r) = x.$checked(y) {
                return TimeValue::from_small(r);
            }
        }
        TimeValue::from_big($a.big() $op $b.big())
    }};
}

impl TimeValue {
    fn add_ref(&self, other: &Self) -> Self {
        small_or_big!(self, other, checked_add, +)
    }

    fn sub_ref(&self, other: &Self) -> Self {
        small_or_big!(self, other, checked_sub, -)
    }

    fn mul_ref(&self, other: &Self) -> Self {
        small_or_big!(self, other, checked_mul, *)
    }

    fn div_ref(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division of a time value by zero");
        small_or_big!(self, other, checked_div, /)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&TimeValue> for &TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: &TimeValue) -> TimeValue {
                self.$inner(rhs)
            }
        }
        impl $trait<TimeValue> for TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: TimeValue) -> TimeValue {
                self.$inner(&rhs)
            }
        }
        impl $trait<&TimeValue> for TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: &TimeValue) -> TimeValue {
                self.$inner(rhs)
            }
        }
        impl $trait<TimeValue> for &TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: TimeValue) -> TimeValue {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for TimeValue {
    type Output = TimeValue;
    fn neg(self) -> TimeValue {
        match self.0 {
            Repr::Small(r) => TimeValue::from_small(-r),
            Repr::Big(r) => TimeValue::from_big(-*r),
        }
    }
}

impl Neg for &TimeValue {
    type Output = TimeValue;
    fn neg(self) -> TimeValue {
        -self.clone()
    }
}

impl Sum for TimeValue {
    fn sum<I: Iterator<Item = TimeValue>>(iter: I) -> Self {
        iter.fold(TimeValue::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a TimeValue> for TimeValue {
    fn sum<I: Iterator<Item = &'a TimeValue>>(iter: I) -> Self {
        iter.fold(TimeValue::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for TimeValue {
    fn from(n: i64) -> Self {
        TimeValue::from_integer(n)
    }
}

impl From<u32> for TimeValue {
    fn from(n: u32) -> Self {
        TimeValue::from_integer(n as i64)
    }
}

impl From<usize> for TimeValue {
    fn from(n: usize) -> Self {
        TimeValue::from_big(BigRational::from_integer(BigInt::from(n)))
    }
}

impl Default for TimeValue {
    fn default() -> Self {
        TimeValue::zero()
    }
}

impl PartialEq for TimeValue {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a == b,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for TimeValue {}

impl PartialOrd for TimeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.big().cmp(&other.big()),
        }
    }
}

impl Hash for TimeValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(r) => {
                0u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
        }
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_integer(s: &str, whole: &str) -> Result<BigInt, ParseTimeError> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseTimeError::Malformed(whole.to_string()));
    }
    s.parse::<BigInt>()
        .map_err(|_| ParseTimeError::Malformed(whole.to_string()))
}

impl FromStr for TimeValue {
    type Err = ParseTimeError;

    /// Accepts `n`, `n/d` and plain decimals such as `17.75`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseTimeError::Empty);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_integer(n.trim(), s)?;
            let d = parse_integer(d.trim(), s)?;
            if d.is_zero() {
                return Err(ParseTimeError::ZeroDenominator(s.to_string()));
            }
            return Ok(TimeValue::from_bigs(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseTimeError::Malformed(s.to_string()));
            }
            let negative = int.starts_with('-');
            let int_part = match int {
                "" | "-" | "+" => BigInt::zero(),
                _ => parse_integer(int, s)?.abs(),
            };
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let frac_part: BigInt = frac.parse().map_err(|_| ParseTimeError::Malformed(s.to_string()))?;
            let mut numer = int_part * &scale + frac_part;
            if negative {
                numer = -numer;
            }
            return Ok(TimeValue::from_bigs(numer, scale));
        }
        Ok(TimeValue::from_bigs(parse_integer(s, s)?, BigInt::one()))
    }
}

impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match &self.0 {
            Repr::Small(r) if r.is_integer() => serializer.serialize_i64(*r.numer()),
            _ => serializer.serialize_str(&self.to_string()),
        }
    }
}

struct TimeVisitor;

impl<'de> Visitor<'de> for TimeVisitor {
    type Value = TimeValue;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string such as \"7/2\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<TimeValue, E> {
        Ok(TimeValue::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<TimeValue, E> {
        Ok(TimeValue::from_bigs(BigInt::from(v), BigInt::one()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<TimeValue, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite time value"));
        }
        format!("{v:?}").parse().map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<TimeValue, E> {
        v.parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(TimeVisitor)
    }
}
