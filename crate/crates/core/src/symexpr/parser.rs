//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := ['-'] term { ('+'|'-') term }
//! term     := factor { ('*'|'/') factor }
//! factor   := base [ '^' exponent ]
//! base     := integerLiteral | 'x' | 'y' | 'alpha' | 'hbar' | 'i'
//!           | 'p1' | 'p2' | '(' expr ')'
//! exponent := ['-'] digits | '(' ['-'] digits [ '/' digits ] ')'
//! ```
//!
//! The `p1`/`p2` atoms are only enabled for phase-space input; plain
//! expression parsing rejects them. Division is restricted to single-term
//! scalar divisors and fractional powers to unit-coefficient monomials.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::symexpr::Expression;

/// Momentum-graded value built during parsing: coefficient expressions
/// keyed by (p1 power, p2 power).
pub type MomentumMap = BTreeMap<(u32, u32), Expression>;

#[derive(Debug, Clone)]
struct PolyVal {
    map: MomentumMap,
}

impl PolyVal {
    fn zero() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }

    fn scalar(e: Expression) -> Self {
        let mut map = BTreeMap::new();
        if !e.is_zero() {
            map.insert((0, 0), e);
        }
        Self { map }
    }

    fn momentum(k: u32, l: u32) -> Self {
        let mut map = BTreeMap::new();
        map.insert((k, l), Expression::one());
        Self { map }
    }

    fn insert(&mut self, key: (u32, u32), e: Expression) {
        if e.is_zero() {
            return;
        }
        let entry = self.map.entry(key).or_insert_with(Expression::zero);
        *entry = &*entry + &e;
        if entry.is_zero() {
            self.map.remove(&key);
        }
    }

    fn add(mut self, rhs: Self) -> Self {
        for (k, e) in rhs.map {
            self.insert(k, e);
        }
        self
    }

    fn neg(self) -> Self {
        Self {
            map: self.map.into_iter().map(|(k, e)| (k, -e)).collect(),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for ((k1, l1), e1) in &self.map {
            for ((k2, l2), e2) in &rhs.map {
                out.insert((k1 + k2, l1 + l2), e1 * e2);
            }
        }
        out
    }

    fn as_scalar(&self) -> Option<Expression> {
        if self.map.is_empty() {
            return Some(Expression::zero());
        }
        if self.map.len() == 1 {
            if let Some(e) = self.map.get(&(0, 0)) {
                return Some(e.clone());
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token and its starting byte position; None at end of input.
    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let b = self.src[self.pos];
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                return Ok(Some((start, Tok::Num(text.parse().unwrap()))));
            }
            c if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                self.pos = end;
                return Ok(Some((start, Tok::Ident(text.to_string()))));
            }
            other => {
                return Err(Error::Parse {
                    position: start,
                    message: format!("unexpected character {:?}", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    cursor: usize,
    end_pos: usize,
    allow_momenta: bool,
}

impl Parser {
    fn new(text: &str, allow_momenta: bool) -> Result<Self> {
        let mut lexer = Lexer::new(text);
        let mut tokens = Vec::new();
        while let Some(t) = lexer.next()? {
            tokens.push(t);
        }
        Ok(Self {
            tokens,
            cursor: 0,
            end_pos: text.len(),
            allow_momenta,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map_or(self.end_pos, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.tokens.get(self.cursor).cloned();
        self.cursor += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.bump();
                Ok(())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn parse_expr(&mut self) -> Result<PolyVal> {
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            negate = true;
        }
        let mut acc = self.parse_term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = acc.add(t);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = acc.add(t.neg());
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<PolyVal> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let f = self.parse_factor()?;
                    acc = acc.mul(&f);
                }
                Some(Tok::Slash) => {
                    let at = self.pos();
                    self.bump();
                    let f = self.parse_factor()?;
                    let divisor = f.as_scalar().ok_or(Error::Parse {
                        position: at,
                        message: "cannot divide by an expression containing p1 or p2".into(),
                    })?;
                    let mut out = PolyVal::zero();
                    for (key, e) in &acc.map {
                        let q = e.div_monomial(&divisor).map_err(|e| Error::Parse {
                            position: at,
                            message: e.to_string(),
                        })?;
                        out.insert(*key, q);
                    }
                    acc = out;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<PolyVal> {
        let base = self.parse_base()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let at = self.pos();
        self.bump();
        let exp = self.parse_exponent()?;
        self.apply_power(base, exp, at)
    }

    fn apply_power(&self, base: PolyVal, exp: Rational, at: usize) -> Result<PolyVal> {
        let wrap = |e: Error| match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                position: at,
                message: other.to_string(),
            },
        };
        if exp.is_integer() {
            let n = exp.to_integer().to_i64().ok_or(Error::Parse {
                position: at,
                message: "exponent too large".into(),
            })?;
            if n >= 0 {
                let mut acc = PolyVal::scalar(Expression::one());
                for _ in 0..n {
                    acc = acc.mul(&base);
                }
                return Ok(acc);
            }
            let scalar = base.as_scalar().ok_or(Error::Parse {
                position: at,
                message: "negative power of an expression containing p1 or p2".into(),
            })?;
            return Ok(PolyVal::scalar(scalar.pow_int(n).map_err(wrap)?));
        }
        let scalar = base.as_scalar().ok_or(Error::Parse {
            position: at,
            message: "fractional power of an expression containing p1 or p2".into(),
        })?;
        Ok(PolyVal::scalar(scalar.pow_rational(&exp).map_err(wrap)?))
    }

    /// exponent := ['-'] digits | '(' ['-'] digits [ '/' digits ] ')'
    fn parse_exponent(&mut self) -> Result<Rational> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                if let Some(Tok::Num(_)) = self.peek() {
                    let Some((_, Tok::Num(n))) = self.bump() else {
                        unreachable!()
                    };
                    return Ok(-Rational::from_integer(n));
                }
                return self.err("expected digits after '-' in exponent");
            }
            Some(Tok::Num(_)) => {
                let Some((_, Tok::Num(n))) = self.bump() else {
                    unreachable!()
                };
                return Ok(Rational::from_integer(n));
            }
            Some(Tok::LParen) => {
                self.bump();
            }
            _ => return self.err("expected an exponent"),
        }
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            negate = true;
        }
        let numer = match self.bump() {
            Some((_, Tok::Num(n))) => n,
            _ => return self.err("expected digits in exponent"),
        };
        let mut value = Rational::from_integer(numer);
        if self.peek() == Some(&Tok::Slash) {
            self.bump();
            let at = self.pos();
            let denom = match self.bump() {
                Some((_, Tok::Num(n))) => n,
                _ => return self.err("expected denominator digits in exponent"),
            };
            if denom == BigInt::from(0) {
                return Err(Error::Parse {
                    position: at,
                    message: "zero denominator in exponent".into(),
                });
            }
            value /= Rational::from_integer(denom);
        }
        self.expect(Tok::RParen, "')' after exponent")?;
        if negate {
            value = -value;
        }
        Ok(value)
    }

    fn parse_base(&mut self) -> Result<PolyVal> {
        let at = self.pos();
        match self.bump() {
            Some((_, Tok::Num(n))) => Ok(PolyVal::scalar(Expression::from_rational(
                Rational::from_integer(n),
            ))),
            Some((_, Tok::Ident(name))) => match name.as_str() {
                "x" => Ok(PolyVal::scalar(Expression::var(crate::symexpr::Var::X))),
                "y" => Ok(PolyVal::scalar(Expression::var(crate::symexpr::Var::Y))),
                "alpha" => Ok(PolyVal::scalar(Expression::alpha())),
                "hbar" => Ok(PolyVal::scalar(Expression::hbar())),
                "i" => Ok(PolyVal::scalar(Expression::i())),
                "p1" | "p2" => {
                    if !self.allow_momenta {
                        return Err(Error::Parse {
                            position: at,
                            message: format!("momentum atom '{name}' not allowed here"),
                        });
                    }
                    Ok(if name == "p1" {
                        PolyVal::momentum(1, 0)
                    } else {
                        PolyVal::momentum(0, 1)
                    })
                }
                other => Err(Error::Parse {
                    position: at,
                    message: format!("unknown symbol '{other}'"),
                }),
            },
            Some((_, Tok::LParen)) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "closing ')'")?;
                Ok(inner)
            }
            _ => Err(Error::Parse {
                position: at,
                message: "expected a number, symbol, or '('".into(),
            }),
        }
    }

    fn finish(&mut self, value: PolyVal) -> Result<PolyVal> {
        if self.cursor != self.tokens.len() {
            return self.err("trailing input after expression");
        }
        Ok(value)
    }
}

pub fn parse_expression_str(text: &str) -> Result<Expression> {
    let mut p = Parser::new(text, false)?;
    let v = p.parse_expr()?;
    let v = p.finish(v)?;
    Ok(v.as_scalar().expect("momenta are rejected during parsing"))
}

pub fn parse_phase_polynomial_str(text: &str) -> Result<MomentumMap> {
    let mut p = Parser::new(text, true)?;
    let v = p.parse_expr()?;
    let v = p.finish(v)?;
    Ok(v.map)
}
