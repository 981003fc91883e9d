//! Recursive-descent reader shared by germs and polynomial families.
//!
//! Grammar (whitespace is insignificant except that `a/b` written without
//! spaces is read as a single rational literal):
//!
//! ```text
//! expr   := ['+'|'-']* term (('+'|'-')+ term)*
//! term   := power (('*' | '/' | <juxtaposition>) power)*
//! power  := atom ['^' exp]
//! exp    := INT | '(' ['+'|'-'] NUMBER ')'
//! atom   := NUMBER | ident | 'i' | 't' | '(' expr ')' | ('+'|'-') power
//! NUMBER := INT ['i'] | INT '/' INT ['i'] | DECIMAL ['i']
//! ```
//!
//! In germ mode a summand `O(t^N)` may appear once at the top level.

use std::fmt;

use super::gauss::GaussRat;
use super::germ::Germ;
use super::poly::PolyFamily;
use super::rat::Rat;

const MAX_POWER: u64 = 4096;

/// Parse failure with a 0-based character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError { position, message: message.into() }
    }

    /// 1-based column for messages.
    pub fn column(&self) -> usize {
        self.position + 1
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column(), self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: Rat, imag: bool, is_int: bool },
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_int = true;
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let digits: String = chars[start..i].iter().collect();
            let value: Rat = digits
                .parse()
                .map_err(|_| ParseError::new(start, format!("bad number '{digits}'")))?;
            let mut imag = false;
            let ident_char = |ch: &char| ch.is_alphanumeric() || *ch == '_';
            if chars.get(i) == Some(&'i') && !chars.get(i + 1).is_some_and(ident_char) {
                imag = true;
                i += 1;
            }
            out.push(Token { tok: Tok::Num { value, imag, is_int }, start, end: i });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(name), start, end: i });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Sym(c), start: i, end: i + 1 });
            i += 1;
        } else {
            return Err(ParseError::new(i, format!("unexpected character '{c}'")));
        }
    }
    out.push(Token { tok: Tok::End, start: chars.len(), end: chars.len() });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    idx: usize,
    vars: Vec<String>,
    germ_mode: bool,
    o_term: Option<u32>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.idx]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        if self.is_sym(c) {
            Ok(self.next())
        } else {
            Err(ParseError::new(self.peek().start, format!("expected '{c}'")))
        }
    }

    fn is_o_term_start(&self) -> bool {
        self.germ_mode
            && self.peek().tok == Tok::Ident("O".into())
            && self.toks.get(self.idx + 1).map(|t| &t.tok) == Some(&Tok::Sym('('))
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek().tok, Tok::Num { .. } | Tok::Ident(_) | Tok::Sym('('))
    }

    /// Reads a run of `+`/`-` signs; returns `true` for a net negative sign.
    fn signs(&mut self) -> (bool, usize) {
        let mut negative = false;
        let mut count = 0;
        while self.is_sym('+') || self.is_sym('-') {
            if self.is_sym('-') {
                negative = !negative;
            }
            self.next();
            count += 1;
        }
        (negative, count)
    }

    fn expr(&mut self, top: bool) -> Result<PolyFamily, ParseError> {
        let mut acc = PolyFamily::zero(&self.vars);
        let mut first = true;
        loop {
            let sign_pos = self.peek().start;
            let (negative, count) = self.signs();
            if !first && count == 0 {
                break;
            }
            first = false;
            if self.is_o_term_start() {
                if !top {
                    return Err(ParseError::new(self.peek().start, "O-term must be a top-level summand"));
                }
                if negative {
                    return Err(ParseError::new(sign_pos, "O-term must be added, not subtracted"));
                }
                self.o_term()?;
            } else {
                let term = self.term()?;
                let term = if negative { term.neg() } else { term };
                acc = acc.try_add(&term).expect("shared variables");
            }
            if !(self.is_sym('+') || self.is_sym('-')) {
                break;
            }
        }
        Ok(acc)
    }

    fn o_term(&mut self) -> Result<(), ParseError> {
        let start = self.next().start;
        self.expect_sym('(')?;
        let t_tok = self.next();
        if t_tok.tok != Tok::Ident("t".into()) {
            return Err(ParseError::new(t_tok.start, "expected 't' inside O-term"));
        }
        let mut order = 1u32;
        if self.is_sym('^') {
            self.next();
            let n_tok = self.next();
            order = match &n_tok.tok {
                Tok::Num { value, imag: false, is_int: true } => value
                    .to_i64()
                    .and_then(|v| u32::try_from(v).ok())
                    .filter(|v| *v > 0)
                    .ok_or_else(|| ParseError::new(n_tok.start, "O-term order must be a positive integer"))?,
                _ => return Err(ParseError::new(n_tok.start, "O-term order must be a positive integer")),
            };
        }
        self.expect_sym(')')?;
        if self.o_term.is_some() {
            return Err(ParseError::new(start, "duplicate O-term"));
        }
        self.o_term = Some(order);
        Ok(())
    }

    fn term(&mut self) -> Result<PolyFamily, ParseError> {
        let mut acc = self.power()?;
        loop {
            if self.is_sym('*') {
                self.next();
                let rhs = self.power()?;
                acc = acc.try_mul(&rhs).expect("shared variables");
            } else if self.is_sym('/') {
                self.next();
                let pos = self.peek().start;
                let rhs = self.power()?;
                let divisor = rhs
                    .as_constant()
                    .filter(|c| !c.is_zero())
                    .ok_or_else(|| ParseError::new(pos, "division only by a nonzero constant"))?;
                acc = acc.scale(&divisor.recip());
            } else if self.starts_atom() {
                if self.is_o_term_start() {
                    return Err(ParseError::new(self.peek().start, "O-term must be a top-level summand"));
                }
                let rhs = self.power()?;
                acc = acc.try_mul(&rhs).expect("shared variables");
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<PolyFamily, ParseError> {
        let base_pos = self.peek().start;
        let base = self.atom()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        self.next();
        let exp_pos = self.peek().start;
        let e = self.exponent()?;
        if e.is_integer() && !e.is_negative() {
            let n = e.to_i64().unwrap_or(i64::MAX);
            if n as u64 > MAX_POWER {
                return Err(ParseError::new(exp_pos, "exponent too large"));
            }
            return Ok(base.pow(n as u32));
        }
        match base.as_t_power() {
            Some(k) => Ok(PolyFamily::t_power(&self.vars, &k * &e)),
            None => Err(ParseError::new(
                base_pos,
                "fractional or negative exponents apply only to t",
            )),
        }
    }

    fn exponent(&mut self) -> Result<Rat, ParseError> {
        let tok = self.next();
        match tok.tok {
            Tok::Num { value, imag: false, is_int: true } => Ok(value),
            Tok::Sym('(') => {
                let (negative, _) = self.signs();
                let pos = self.peek().start;
                let (value, imag) = self.number()?;
                if imag {
                    return Err(ParseError::new(pos, "exponent must be real"));
                }
                self.expect_sym(')')?;
                Ok(if negative { -value } else { value })
            }
            _ => Err(ParseError::new(tok.start, "expected an exponent")),
        }
    }

    /// A numeric literal, composing adjacent `a/b` into one rational.
    fn number(&mut self) -> Result<(Rat, bool), ParseError> {
        let tok = self.next();
        let Tok::Num { value, imag, is_int } = tok.tok else {
            return Err(ParseError::new(tok.start, "expected a number"));
        };
        let slash = self.peek().clone();
        let denom = self.toks.get(self.idx + 1).cloned();
        if is_int && !imag && slash.tok == Tok::Sym('/') && slash.start == tok.end {
            if let Some(Token { tok: Tok::Num { value: d, imag: d_imag, is_int: true }, start, .. }) = denom {
                if start == slash.end {
                    if d.is_zero() {
                        return Err(ParseError::new(start, "division by zero"));
                    }
                    self.next();
                    self.next();
                    return Ok((&value / &d, d_imag));
                }
            }
        }
        Ok((value, imag))
    }

    fn atom(&mut self) -> Result<PolyFamily, ParseError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Num { .. } => {
                let (value, imag) = self.number()?;
                let c = if imag { GaussRat::imag(value) } else { GaussRat::real(value) };
                Ok(PolyFamily::constant(&self.vars, c))
            }
            Tok::Ident(name) => {
                if self.is_o_term_start() {
                    return Err(ParseError::new(tok.start, "O-term must be a top-level summand"));
                }
                self.next();
                if name == "t" {
                    Ok(PolyFamily::t_power(&self.vars, Rat::one()))
                } else if let Some(k) = self.vars.iter().position(|v| v == name) {
                    Ok(PolyFamily::variable(&self.vars, k))
                } else if name == "i" {
                    Ok(PolyFamily::constant(&self.vars, GaussRat::i()))
                } else {
                    Err(ParseError::new(tok.start, format!("unknown variable '{name}'")))
                }
            }
            Tok::Sym('(') => {
                self.next();
                let inner = self.expr(false)?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            Tok::Sym('-') | Tok::Sym('+') => {
                let negative = tok.tok == Tok::Sym('-');
                self.next();
                let inner = self.power()?;
                Ok(if negative { inner.neg() } else { inner })
            }
            Tok::End => Err(ParseError::new(tok.start, "unexpected end of input")),
            Tok::Sym(c) => Err(ParseError::new(tok.start, format!("unexpected '{c}'"))),
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        let tok = self.peek();
        match &tok.tok {
            Tok::End => Ok(()),
            Tok::Sym(c) => Err(ParseError::new(tok.start, format!("unexpected '{c}'"))),
            Tok::Ident(name) => Err(ParseError::new(tok.start, format!("unexpected '{name}'"))),
            Tok::Num { .. } => Err(ParseError::new(tok.start, "unexpected number")),
        }
    }
}

fn infer_variables(toks: &[Token]) -> Vec<String> {
    let mut vars: Vec<String> = Vec::new();
    for t in toks {
        if let Tok::Ident(name) = &t.tok {
            if name != "t" && name != "i" && !vars.contains(name) {
                vars.push(name.clone());
            }
        }
    }
    vars
}

pub(crate) fn parse_family(text: &str, vars: Option<&[String]>) -> Result<PolyFamily, ParseError> {
    let toks = lex(text)?;
    let vars = match vars {
        Some(v) => {
            for name in v {
                if name == "t" || name == "i" {
                    return Err(ParseError::new(0, format!("'{name}' is reserved and cannot be a variable")));
                }
            }
            v.to_vec()
        }
        None => infer_variables(&toks),
    };
    let mut p = Parser { toks, idx: 0, vars, germ_mode: false, o_term: None };
    let out = p.expr(true)?;
    p.finish()?;
    Ok(out)
}

pub(crate) fn parse_germ(text: &str, default_trunc: Option<u32>) -> Result<Germ, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, idx: 0, vars: Vec::new(), germ_mode: true, o_term: None };
    let poly = p.expr(true)?;
    p.finish()?;
    let mut coeffs = Vec::new();
    for (m, c) in poly.terms() {
        let k = m
            .t_exp
            .to_i64()
            .filter(|k| m.t_exp.is_integer() && *k >= 0)
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| {
                ParseError::new(0, format!("germ exponent t^{} is not a nonnegative integer", m.t_exp))
            })?;
        coeffs.push((k, c.clone()));
    }
    let max_exp = coeffs.iter().map(|(k, _)| *k).max();
    let trunc = match (p.o_term, default_trunc) {
        (Some(n), _) => n,
        (None, Some(d)) => {
            if let Some(m) = max_exp.filter(|m| *m >= d) {
                return Err(ParseError::new(
                    0,
                    format!("exponent {m} is not below the truncation order {d}"),
                ));
            }
            d
        }
        (None, None) => max_exp.map_or(1, |m| m + 1),
    };
    if trunc == 0 {
        return Err(ParseError::new(0, "truncation order must be positive"));
    }
    Ok(Germ::truncated(coeffs, trunc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals_bind_tightly() {
        let g = parse_germ("1/2t + O(t^3)", None).unwrap();
        assert_eq!(g.coeff(1), GaussRat::real(Rat::new(1, 2)));
        let g = parse_germ("3/4i t^2", None).unwrap();
        assert_eq!(g.coeff(2), GaussRat::imag(Rat::new(3, 4)));
    }

    #[test]
    fn terms_beyond_o_term_are_dropped() {
        let g = parse_germ("t + t^7 + O(t^6)", None).unwrap();
        assert_eq!(g.trunc(), 6);
        assert_eq!(g.coeff(7), GaussRat::zero());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_germ("t + O(t^3) + O(t^4)", None).unwrap_err();
        assert_eq!(e.position, 13);
        assert!(e.message.contains("duplicate"));
        let e = parse_germ("t * O(t^3)", None).unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_family("x + y + ", Some(&["x".into()])).unwrap_err();
        assert_eq!(e.position, 4);
        let e = parse_family("x^(1/2)", Some(&["x".into()])).unwrap_err();
        assert!(e.message.contains("only to t"));
        let e = parse_germ("t - O(t^2)", None).unwrap_err();
        assert_eq!(e.position, 2);
        let e = parse_germ("t $ 2", None).unwrap_err();
        assert_eq!(e.column(), 3);
    }

    #[test]
    fn imaginary_unit_and_decimals() {
        let g = parse_germ("(1 + i) t - 0.25 t^2", None).unwrap();
        assert_eq!(g.coeff(1), GaussRat::new(Rat::one(), Rat::one()));
        assert_eq!(g.coeff(2), GaussRat::real(Rat::new(-1, 4)));
    }

    #[test]
    fn inferred_variables_in_order_of_appearance() {
        let f = parse_family("u*v - z^2 + t", None).unwrap();
        assert_eq!(f.variables(), &["u".to_string(), "v".into(), "z".into()]);
    }

    #[test]
    fn t_powers() {
        let f = parse_family("t^(-3/2) * (t^2)^(1/2)", Some(&[])).unwrap();
        assert_eq!(f.as_t_power(), Some(Rat::new(-1, 2)));
    }
}
