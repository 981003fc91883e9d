use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rat::Rat;

/// Element of the Gaussian rationals `Q(i)`.
///
/// Serialised as `[[re_num, re_den], [im_num, im_den]]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn imag(im: Rat) -> Self {
        GaussRat { re: Rat::zero(), im }
    }

    pub fn integer(n: i64) -> Self {
        GaussRat::real(Rat::integer(n))
    }

    pub fn zero() -> Self {
        GaussRat::default()
    }

    pub fn one() -> Self {
        GaussRat::integer(1)
    }

    pub fn i() -> Self {
        GaussRat::imag(Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -&self.im)
    }

    /// Squared modulus `re^2 + im^2`.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "reciprocal of zero");
        GaussRat::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn scale(&self, k: &Rat) -> Self {
        GaussRat::new(&self.re * k, &self.im * k)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = GaussRat::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Serialize for GaussRat {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (&self.re, &self.im).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GaussRat {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (re, im) = <(Rat, Rat)>::deserialize(deserializer)?;
        Ok(GaussRat { re, im })
    }
}

impl From<Rat> for GaussRat {
    fn from(r: Rat) -> Self {
        GaussRat::real(r)
    }
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        GaussRat::integer(n)
    }
}

/// Renders real values bare (`-3/4`) and everything else as `(a+bi)`.
impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        let im_abs = self.im.abs();
        if im_abs.is_one() {
            write!(f, "({}{}i)", self.re, sign)
        } else {
            write!(f, "({}{}{}i)", self.re, sign, im_abs)
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add<&GaussRat> for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&GaussRat> for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&GaussRat> for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Div<&GaussRat> for &GaussRat {
    type Output = GaussRat;
    fn div(self, rhs: &GaussRat) -> GaussRat {
        self * &rhs.recip()
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-&self.re, -&self.im)
    }
}

macro_rules! owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<GaussRat> for GaussRat {
            type Output = GaussRat;
            fn $method(self, rhs: GaussRat) -> GaussRat {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a GaussRat> for GaussRat {
            type Output = GaussRat;
            fn $method(self, rhs: &'a GaussRat) -> GaussRat {
                (&self).$method(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        -&self
    }
}
