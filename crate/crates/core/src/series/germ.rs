use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gauss::GaussRat;
use super::parse::{self, ParseError};
use super::poly::write_term;

/// Vanishing order of a germ or of a difference of germs.
///
/// `Infinite` means "zero up to the known truncation" and orders above every
/// finite value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(k) => Some(k),
            Order::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Order::Infinite)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::Finite(k) => serializer.serialize_u32(*k),
            Order::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Truncated power series `sum c_k t^k + O(t^trunc)` with Gaussian rational
/// coefficients. Only exponents below `trunc` are stored and zero coefficients
/// are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GermRepr")]
pub struct Germ {
    coeffs: BTreeMap<u32, GaussRat>,
    trunc: u32,
}

#[derive(Deserialize)]
struct GermRepr {
    coeffs: BTreeMap<u32, GaussRat>,
    trunc: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GermError {
    #[error("truncation order must be positive")]
    ZeroTruncation,
    #[error("coefficient of t^{exponent} lies at or beyond the truncation order {trunc}")]
    BeyondTruncation { exponent: u32, trunc: u32 },
}

impl TryFrom<GermRepr> for Germ {
    type Error = GermError;
    fn try_from(r: GermRepr) -> Result<Self, GermError> {
        Germ::from_coefficients(r.coeffs, r.trunc)
    }
}

impl Germ {
    /// Strict constructor: rejects coefficients at or beyond `trunc`.
    pub fn from_coefficients<I>(coeffs: I, trunc: u32) -> Result<Self, GermError>
    where
        I: IntoIterator<Item = (u32, GaussRat)>,
    {
        if trunc == 0 {
            return Err(GermError::ZeroTruncation);
        }
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            if k >= trunc {
                return Err(GermError::BeyondTruncation { exponent: k, trunc });
            }
            if !c.is_zero() {
                map.insert(k, c);
            }
        }
        Ok(Germ { coeffs: map, trunc })
    }

    /// Truncating constructor: terms at or beyond `trunc` are dropped.
    pub fn truncated<I>(coeffs: I, trunc: u32) -> Self
    where
        I: IntoIterator<Item = (u32, GaussRat)>,
    {
        assert!(trunc > 0, "truncation order must be positive");
        let coeffs = coeffs
            .into_iter()
            .filter(|(k, c)| *k < trunc && !c.is_zero())
            .collect();
        Germ { coeffs, trunc }
    }

    /// Germ with integer coefficients `[c_0, c_1, ...]` (real parts only).
    pub fn from_ints(coeffs: &[i64], trunc: u32) -> Self {
        Germ::truncated(
            coeffs.iter().enumerate().map(|(k, c)| (k as u32, GaussRat::integer(*c))),
            trunc,
        )
    }

    pub fn zero(trunc: u32) -> Self {
        Germ::truncated(std::iter::empty(), trunc)
    }

    /// Parses `"t - t^4 + O(t^6)"`. Without an `O`-term the truncation order is
    /// one more than the largest exponent present.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        parse::parse_germ(text, None)
    }

    /// Like [`Germ::parse`] but uses `default_trunc` when the text has no
    /// `O`-term. Exponents at or beyond it are an error.
    pub fn parse_with_truncation(text: &str, default_trunc: u32) -> Result<Self, ParseError> {
        parse::parse_germ(text, Some(default_trunc))
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// Nonzero coefficients in increasing exponent order.
    pub fn coefficients(&self) -> impl Iterator<Item = (u32, &GaussRat)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Coefficient of `t^k`; zero when absent. Values at `k >= trunc` are unknown
    /// and reported as zero.
    pub fn coeff(&self, k: u32) -> GaussRat {
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    /// Coefficient of `t^k` if it is determined by the truncation.
    pub fn known_coeff(&self, k: u32) -> Option<GaussRat> {
        (k < self.trunc).then(|| self.coeff(k))
    }

    pub fn value_at_zero(&self) -> GaussRat {
        self.coeff(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Vanishing order; `Infinite` when every known coefficient is zero.
    pub fn ord(&self) -> Order {
        match self.coeffs.keys().next() {
            Some(k) => Order::Finite(*k),
            None => Order::Infinite,
        }
    }

    /// Order of vanishing of `self - other` inside the common truncation window.
    pub fn agree_order(&self, other: &Germ) -> Order {
        let window = self.trunc.min(other.trunc);
        for k in 0..window {
            if self.coeff(k) != other.coeff(k) {
                return Order::Finite(k);
            }
        }
        Order::Infinite
    }

    /// Restricts to a smaller truncation order.
    pub fn truncate(&self, trunc: u32) -> Germ {
        let t = trunc.min(self.trunc);
        Germ::truncated(self.coeffs.iter().map(|(k, c)| (*k, c.clone())), t)
    }

    pub fn scale(&self, k: &GaussRat) -> Germ {
        Germ::truncated(self.coeffs.iter().map(|(e, c)| (*e, c * k)), self.trunc)
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn evaluate(&self, t: Complex64) -> Complex64 {
        let top = match self.coeffs.keys().next_back() {
            Some(k) => *k,
            None => return Complex64::new(0.0, 0.0),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..=top).rev() {
            acc = acc * t;
            if let Some(c) = self.coeffs.get(&k) {
                acc += c.to_complex();
            }
        }
        acc
    }
}

impl Add<&Germ> for &Germ {
    type Output = Germ;
    fn add(self, rhs: &Germ) -> Germ {
        let trunc = self.trunc.min(rhs.trunc);
        let keys: std::collections::BTreeSet<u32> =
            self.coeffs.keys().chain(rhs.coeffs.keys()).copied().collect();
        Germ::truncated(keys.into_iter().map(|k| (k, self.coeff(k) + rhs.coeff(k))), trunc)
    }
}

impl Sub<&Germ> for &Germ {
    type Output = Germ;
    fn sub(self, rhs: &Germ) -> Germ {
        self + &(-rhs)
    }
}

impl Neg for &Germ {
    type Output = Germ;
    fn neg(self) -> Germ {
        Germ::truncated(self.coeffs.iter().map(|(k, c)| (*k, -c)), self.trunc)
    }
}

impl fmt::Display for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            let mono = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            write_term(&mut out, i == 0, c, &mono);
        }
        let o_term = if self.trunc == 1 { "O(t)".to_string() } else { format!("O(t^{})", self.trunc) };
        if out.is_empty() {
            out = o_term;
        } else {
            out.push_str(" + ");
            out.push_str(&o_term);
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
