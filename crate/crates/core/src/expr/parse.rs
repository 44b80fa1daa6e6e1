//! Recursive-descent reader for the expression grammar
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' ['-'] integer)?
//! atom   := number | ident | '(' expr ')' | fn '(' expr ')'
//! number := integer ('/' positive-integer)?
//! fn     := log | exp | atan | sqrt
//! ```
//!
//! A literal `a/b` binds tighter than `^`, so `2/3^2` is `4/9`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Expr, FnKind, Rational, Symbols};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

pub fn parse_expr(src: &str, sym: &Symbols) -> Result<Expr, ParseError> {
    let mut p = Parser { s: src.as_bytes(), pos: 0, sym };
    let e = p.expr()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err(format!("unexpected '{}'", p.s[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    sym: &'a Symbols,
}

impl Parser<'_> {
    fn err(&self, message: String) -> ParseError {
        ParseError { offset: self.pos, message }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let neg = self.eat(b'-');
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.peek() == Some(b'/') {
                self.pos += 1;
                self.ws();
                let at = self.pos;
                let d = self.factor()?;
                acc = acc.div(&d).ok_or(ParseError { offset: at, message: "division by zero".into() })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let neg = self.eat(b'-');
        self.ws();
        let at = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return Err(self.err("expected integer exponent".into()));
        }
        let mut e: i32 = digits.parse().map_err(|_| ParseError { offset: at, message: "exponent too large".into() })?;
        if neg {
            e = -e;
        }
        base.pow(e).ok_or(ParseError { offset: at, message: "negative power of zero".into() })
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.err("expected operand, found end of input".into())),
        };
        if c.is_ascii_digit() {
            let n: BigInt = self.digits().parse().expect("digits");
            if self.pos + 1 < self.s.len() && self.s[self.pos] == b'/' && self.s[self.pos + 1].is_ascii_digit() {
                self.pos += 1;
                let at = self.pos;
                let d: BigInt = self.digits().parse().expect("digits");
                if d.is_zero() {
                    return Err(ParseError { offset: at, message: "zero denominator".into() });
                }
                return Ok(Expr::constant(Rational::new(n, d)));
            }
            return Ok(Expr::constant(Rational::from_integer(n)));
        }
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'".into()));
            }
            return Ok(e);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
            if let Some(kind) = FnKind::from_name(name) {
                if self.eat(b'(') {
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(self.err("expected ')'".into()));
                    }
                    return Ok(Expr::func(kind, arg));
                }
            }
            if let Some(i) = self.sym.vars.iter().position(|v| v == name) {
                return Ok(Expr::var(i));
            }
            if let Some(i) = self.sym.params.iter().position(|v| v == name) {
                return Ok(Expr::param(i));
            }
            return Err(ParseError { offset: start, message: format!("unknown identifier '{name}'") });
        }
        Err(self.err(format!("expected operand, found '{}'", c as char)))
    }
}
