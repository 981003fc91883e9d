use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::gauss::GaussRat;
use super::germ::Germ;
use super::parse::{self, ParseError};
use super::rat::Rat;

/// Exponent data of one term: a rational power of `t` and a degree per variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Monomial {
    pub t_exp: Rat,
    pub degrees: Vec<u32>,
}

impl Monomial {
    pub fn new(t_exp: Rat, degrees: Vec<u32>) -> Self {
        Monomial { t_exp, degrees }
    }

    pub fn total_degree(&self) -> u32 {
        self.degrees.iter().sum()
    }

    /// Order used for rendering and normalisation: variable degrees compared
    /// from the last declared variable to the first, larger first; ties broken
    /// by ascending power of `t`.
    pub fn display_cmp(&self, other: &Monomial) -> Ordering {
        let a = self.degrees.iter().rev();
        let b = other.degrees.iter().rev();
        for (x, y) in a.zip(b) {
            match y.cmp(x) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.t_exp.cmp(&other.t_exp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable lists differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("{0}")]
    Parse(#[from] ParseError),
}

/// Polynomial in named variables whose coefficients are Gaussian rationals
/// times rational powers of the family parameter `t`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyFamily {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, GaussRat>,
}

impl PolyFamily {
    pub fn zero(vars: &[String]) -> Self {
        PolyFamily { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[String], c: GaussRat) -> Self {
        let mut p = PolyFamily::zero(vars);
        p.add_term(Monomial::new(Rat::zero(), vec![0; vars.len()]), c);
        p
    }

    pub fn one(vars: &[String]) -> Self {
        PolyFamily::constant(vars, GaussRat::one())
    }

    /// The single variable `vars[index]`.
    pub fn variable(vars: &[String], index: usize) -> Self {
        let mut degrees = vec![0; vars.len()];
        degrees[index] = 1;
        let mut p = PolyFamily::zero(vars);
        p.add_term(Monomial::new(Rat::zero(), degrees), GaussRat::one());
        p
    }

    /// `t^e` with no variable part.
    pub fn t_power(vars: &[String], e: Rat) -> Self {
        let mut p = PolyFamily::zero(vars);
        p.add_term(Monomial::new(e, vec![0; vars.len()]), GaussRat::one());
        p
    }

    /// Builds a family from explicit terms, summing duplicates and dropping zeros.
    pub fn from_terms<I>(vars: &[String], terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, GaussRat)>,
    {
        let mut p = PolyFamily::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.degrees.len(), vars.len(), "degree vector length mismatch");
            p.add_term(m, c);
        }
        p
    }

    /// The truncated germ viewed as a polynomial in `t` alone.
    pub fn from_germ(vars: &[String], germ: &Germ) -> Self {
        PolyFamily::from_terms(
            vars,
            germ.coefficients()
                .map(|(k, c)| (Monomial::new(Rat::from(k), vec![0; vars.len()]), c.clone())),
        )
    }

    /// Parses with the given variable list; any other identifier except `t` and `i` is an error.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        parse::parse_family(text, Some(&vars))
    }

    /// Parses, taking the variables in order of first appearance.
    pub fn parse_infer(text: &str) -> Result<Self, ParseError> {
        parse::parse_family(text, None)
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&GaussRat> {
        self.terms.get(m)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the family has no variable dependence and no `t` dependence.
    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.t_exp.is_zero() && m.total_degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// If the family is exactly `t^e`, returns `e`.
    pub fn as_t_power(&self) -> Option<Rat> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        (c.is_one() && m.total_degree() == 0).then(|| m.t_exp.clone())
    }

    fn add_term(&mut self, m: Monomial, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_vars(&self, other: &PolyFamily) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::VariableMismatch {
                left: self.vars.clone(),
                right: other.vars.clone(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &PolyFamily) -> Result<PolyFamily, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &PolyFamily) -> Result<PolyFamily, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &PolyFamily) -> Result<PolyFamily, PolyError> {
        self.check_vars(other)?;
        let mut out = PolyFamily::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let degrees = ma.degrees.iter().zip(&mb.degrees).map(|(a, b)| a + b).collect();
                out.add_term(Monomial::new(&ma.t_exp + &mb.t_exp, degrees), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> PolyFamily {
        self.scale(&GaussRat::integer(-1))
    }

    pub fn scale(&self, k: &GaussRat) -> PolyFamily {
        PolyFamily::from_terms(&self.vars, self.terms.iter().map(|(m, c)| (m.clone(), c * k)))
    }

    pub fn pow(&self, exp: u32) -> PolyFamily {
        let mut acc = PolyFamily::one(&self.vars);
        for _ in 0..exp {
            acc = acc.try_mul(self).expect("same variables");
        }
        acc
    }

    /// Multiplies by `t^e`.
    pub fn shift_t(&self, e: &Rat) -> PolyFamily {
        PolyFamily::from_terms(
            &self.vars,
            self.terms
                .iter()
                .map(|(m, c)| (Monomial::new(&m.t_exp + e, m.degrees.clone()), c.clone())),
        )
    }

    pub fn min_t_exponent(&self) -> Option<Rat> {
        self.terms.keys().map(|m| m.t_exp.clone()).min()
    }

    /// Terms whose `t` exponent is exactly zero.
    pub fn t0_part(&self) -> PolyFamily {
        PolyFamily::from_terms(
            &self.vars,
            self.terms
                .iter()
                .filter(|(m, _)| m.t_exp.is_zero())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Substitutes `x_j -> t^(c * w_j) x_j` for every variable.
    pub fn weighted_substitute(&self, weights: &[Rat], c: &Rat) -> PolyFamily {
        assert_eq!(weights.len(), self.vars.len(), "one weight per variable");
        PolyFamily::from_terms(
            &self.vars,
            self.terms.iter().map(|(m, coeff)| {
                let shift: Rat = m
                    .degrees
                    .iter()
                    .zip(weights)
                    .map(|(d, w)| w * Rat::from(*d))
                    .sum();
                (Monomial::new(&m.t_exp + &(c * &shift), m.degrees.clone()), coeff.clone())
            }),
        )
    }

    /// Terms in rendering order.
    pub fn ordered_terms(&self) -> Vec<(&Monomial, &GaussRat)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.display_cmp(b.0));
        v
    }

    /// Divides by the coefficient of the first term in rendering order.
    pub fn normalized(&self) -> PolyFamily {
        match self.ordered_terms().first() {
            Some((_, lead)) => {
                let inv = lead.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Drops every `t` dependence, keeping exponents; only meaningful when all
    /// `t` exponents are zero.
    pub fn with_variables(&self, vars: &[String]) -> Option<PolyFamily> {
        if vars.len() != self.vars.len() {
            return None;
        }
        Some(PolyFamily { vars: vars.to_vec(), terms: self.terms.clone() })
    }

    fn monomial_string(&self, m: &Monomial) -> String {
        let mut parts: Vec<String> = Vec::new();
        if !m.t_exp.is_zero() {
            parts.push(power_string("t", &m.t_exp));
        }
        for (name, d) in self.vars.iter().zip(&m.degrees) {
            if *d > 0 {
                parts.push(power_string(name, &Rat::from(*d)));
            }
        }
        parts.join("*")
    }
}

fn power_string(base: &str, e: &Rat) -> String {
    if e.is_one() {
        base.to_string()
    } else if e.is_integer() && e.is_positive() {
        format!("{base}^{e}")
    } else {
        format!("{base}^({e})")
    }
}

/// Appends one signed term; `first` controls whether a leading ` + ` is emitted.
pub(crate) fn write_term(out: &mut String, first: bool, coeff: &GaussRat, monomial: &str) {
    let (negative, magnitude) = if coeff.is_real() && coeff.re.is_negative() {
        (true, GaussRat::real(-&coeff.re))
    } else {
        (false, coeff.clone())
    };
    match (first, negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    if monomial.is_empty() {
        let _ = write!(out, "{magnitude}");
    } else if magnitude.is_one() {
        out.push_str(monomial);
    } else {
        let _ = write!(out, "{magnitude}*{monomial}");
    }
}

impl fmt::Display for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut out = String::new();
        for (i, (m, c)) in self.ordered_terms().into_iter().enumerate() {
            write_term(&mut out, i == 0, c, &self.monomial_string(m));
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for PolyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyFamily[{}]({})", self.vars.join(","), self)
    }
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    variables: Vec<String>,
    text: String,
}

impl Serialize for PolyFamily {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolyRepr { variables: self.vars.clone(), text: self.to_string() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolyFamily {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(deserializer)?;
        let vars: Vec<&str> = repr.variables.iter().map(String::as_str).collect();
        PolyFamily::parse(&repr.text, &vars).map_err(serde::de::Error::custom)
    }
}
