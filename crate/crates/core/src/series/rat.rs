use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// Always stored in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Option<Self> {
        if denom.is_zero() {
            return None;
        }
        Some(Rat(BigRational::new(numer, denom)))
    }

    pub fn integer(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    /// Integer value if the number is an integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Huge numerator and denominator: divide after scaling down.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    /// Integer power (negative exponents allowed for nonzero values).
    pub fn pow(&self, exp: i32) -> Self {
        Rat(num_traits::Pow::pow(&self.0, exp))
    }

    /// Exact conversion of a finite `f64` (binary expansion, not the shortest decimal).
    pub fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rat)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::integer(n)
    }
}

impl From<u32> for Rat {
    fn from(n: u32) -> Self {
        Rat::integer(i64::from(n))
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `a`, `a/b` and finite decimals such as `-0.75` (converted exactly).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRatError(s.to_string());
        let s_trim = s.trim();
        if s_trim.is_empty() {
            return Err(err());
        }
        if let Some((n, d)) = s_trim.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            return Rat::from_bigints(n, d).ok_or_else(err);
        }
        if let Some((int_part, frac_part)) = s_trim.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let negative = int_part.starts_with('-');
            let int_digits = int_part.trim_start_matches(['-', '+']);
            if !int_digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits = format!("{int_digits}{frac_part}");
            let mut numer: BigInt = digits.parse().map_err(|_| err())?;
            if negative {
                numer = -numer;
            }
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            return Rat::from_bigints(numer, denom).ok_or_else(err);
        }
        let n: BigInt = s_trim.parse().map_err(|_| err())?;
        Ok(Rat::from(n))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

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

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

impl PartialEq<i64> for Rat {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && *self.0.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rat {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

fn big_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::String(n.to_string()),
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&big_to_json(self.numer()))?;
        tup.serialize_element(&big_to_json(self.denom()))?;
        tup.end()
    }
}

fn json_to_big<E: de::Error>(v: &serde_json::Value) -> Result<BigInt, E> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| E::custom(format!("non-integer component {n}"))),
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| E::custom(format!("bad integer string {s:?}"))),
        other => Err(E::custom(format!("expected integer, found {other}"))),
    }
}

impl<'de> Deserialize<'de> for Rat {
    /// Accepts `[num, den]` pairs, plain integers, or strings such as `"3/10"`.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        match &v {
            serde_json::Value::Array(items) if items.len() == 2 => {
                let n = json_to_big::<D::Error>(&items[0])?;
                let d = json_to_big::<D::Error>(&items[1])?;
                Rat::from_bigints(n, d).ok_or_else(|| de::Error::custom("zero denominator"))
            }
            serde_json::Value::Number(_) => Ok(Rat::from(json_to_big::<D::Error>(&v)?)),
            serde_json::Value::String(s) => s.parse().map_err(de::Error::custom),
            other => Err(de::Error::custom(format!("expected rational, found {other}"))),
        }
    }
}
