//! Exact-or-float scalars.
//!
//! Every computation in this crate is generic over [`Scalar`], which has two
//! implementations: `f64` and [`Rational`] (arbitrary-precision fractions).
//! Inputs built entirely from integers and `p/q` literals stay exact; anything
//! that touches a decimal literal or a float constructor falls back to `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// Field operations shared by the exact and floating-point code paths.
pub trait Scalar:
    Num + Clone + PartialOrd + fmt::Debug + Send + Sync + 'static
{
    fn from_rational(q: &Rational) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn into_value(self) -> Value;

    fn from_usize(x: usize) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(x)))
    }
}

impl Scalar for f64 {
    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn into_value(self) -> Value {
        Value::Approx(self)
    }
    fn from_usize(x: usize) -> Self {
        x as f64
    }
}

impl Scalar for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn into_value(self) -> Value {
        Value::Exact(self)
    }
}

fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(q) {
        if x.is_finite() {
            return x;
        }
    }
    // Shift both parts into f64 range before dividing.
    let bits = q.numer().bits().max(q.denom().bits());
    let shift = bits.saturating_sub(1000);
    let n = ToPrimitive::to_f64(&(q.numer() >> shift)).unwrap_or(f64::NAN);
    let d = ToPrimitive::to_f64(&(q.denom() >> shift)).unwrap_or(f64::NAN);
    n / d
}

/// A number that is either an exact rational or an `f64` approximation.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => rational_to_f64(q),
            Value::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Approx(_) => None,
        }
    }

    /// `p/q` (or `p` for integers) when exact, `None` otherwise.
    pub fn exact_string(&self) -> Option<String> {
        self.as_exact().map(format_rational)
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Value::Exact(q) => q.is_positive(),
            Value::Approx(x) => *x > 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Value::Exact(_) => true,
            Value::Approx(x) => x.is_finite(),
        }
    }

    pub fn to_scalar<S: Scalar>(&self) -> S {
        match self {
            Value::Exact(q) => S::from_rational(q),
            Value::Approx(x) => S::from_f64(*x),
        }
    }

    pub fn recip(&self) -> Value {
        match self {
            Value::Exact(q) => Value::Exact(q.recip()),
            Value::Approx(x) => Value::Approx(1.0 / x),
        }
    }

    /// Compares exactly when both sides are exact, through `f64` otherwise.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => f.write_str(&format_rational(q)),
            Value::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Exact(Rational::from_integer(BigInt::from(x)))
    }
}

impl From<i32> for Value {
    fn from(x: i32) -> Self {
        Value::from(x as i64)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Approx(x)
    }
}

impl From<Rational> for Value {
    fn from(q: Rational) -> Self {
        Value::Exact(q)
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Shorthand for `p/q` as an exact rational.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse number `{0}`")]
pub struct ParseValueError(pub String);

/// Integers and `p/q` tokens parse exactly; decimal or exponent notation
/// parses as `f64`.
impl FromStr for Value {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ParseValueError(t.to_string());
        if let Some((p, q)) = t.split_once('/') {
            let p = BigInt::from_str_radix(p.trim(), 10).map_err(|_| err())?;
            let q = BigInt::from_str_radix(q.trim(), 10).map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Value::Exact(Rational::new(p, q)));
        }
        if let Ok(i) = BigInt::from_str_radix(t, 10) {
            return Ok(Value::Exact(Rational::from_integer(i)));
        }
        match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Approx(x)),
            _ => Err(err()),
        }
    }
}

/// Per-element storage that is exact when every element is exact.
#[derive(Clone, Debug, PartialEq)]
pub enum Numbers {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Numbers {
    pub fn from_values(values: Vec<Value>) -> Self {
        if values.iter().all(Value::is_exact) {
            Numbers::Exact(
                values
                    .into_iter()
                    .map(|v| match v {
                        Value::Exact(q) => q,
                        Value::Approx(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else {
            Numbers::Float(values.iter().map(Value::to_f64).collect())
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Numbers::Exact(v) => v.len(),
            Numbers::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Numbers::Exact(_))
    }

    pub fn get(&self, i: usize) -> Value {
        match self {
            Numbers::Exact(v) => Value::Exact(v[i].clone()),
            Numbers::Float(v) => Value::Approx(v[i]),
        }
    }

    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            Numbers::Exact(v) => rational_to_f64(&v[i]),
            Numbers::Float(v) => v[i],
        }
    }

    pub fn to_scalars<S: Scalar>(&self) -> Vec<S> {
        match self {
            Numbers::Exact(v) => v.iter().map(S::from_rational).collect(),
            Numbers::Float(v) => v.iter().map(|&x| S::from_f64(x)).collect(),
        }
    }

    pub fn values(&self) -> Vec<Value> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// Applies `f` in the storage's own scalar type.
    pub fn map(&self, f: impl Fn(&Value) -> Value) -> Numbers {
        Numbers::from_values(self.values().iter().map(f).collect())
    }
}

/// Values are emitted as a decimal plus an optional exact string.
impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
