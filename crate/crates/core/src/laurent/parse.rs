//! Recursive-descent parser for Laurent polynomial text.
//!
//! ```text
//! expr   := sign? term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number 'i'? | 'i' | var ('^' exp)? | '(' expr ')'
//! var    := 'z' digits | 'z'            (bare 'z' only when m = 1)
//! exp    := '-'? digits | '(' '-'? digits ')'
//! ```

use super::{LaurentPolynomial, Terms};
use crate::error::{Error, Result};
use num_complex::Complex64;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    m: usize,
}

pub(super) fn parse(text: &str, m: usize) -> Result<LaurentPolynomial> {
    if m == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, m };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(Error::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let terms = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    LaurentPolynomial::from_terms(m, terms)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Terms> {
        let mut acc = Terms::new();
        let mut sign = 1.0;
        if self.eat(b'-') {
            sign = -1.0;
        } else {
            self.eat(b'+');
        }
        loop {
            let t = self.term()?;
            for (e, c) in t {
                *acc.entry(e).or_insert(Complex64::new(0.0, 0.0)) += c * sign;
            }
            if self.eat(b'+') {
                sign = 1.0;
            } else if self.eat(b'-') {
                sign = -1.0;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Terms> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = multiply(&acc, &f);
        }
        Ok(acc)
    }

    fn constant(&self, c: Complex64) -> Terms {
        let mut t = Terms::new();
        t.insert(vec![0; self.m], c);
        t
    }

    fn factor(&mut self) -> Result<Terms> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(self.constant(Complex64::new(0.0, 1.0)))
            }
            Some(b'z') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let idx = if start == self.pos {
                    if self.m != 1 {
                        return Err(Error::Syntax { pos: start, msg: "bare `z` needs m = 1".into() });
                    }
                    1
                } else {
                    let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    s.parse::<usize>().map_err(|_| self.err("bad variable index"))?
                };
                if idx == 0 || idx > self.m {
                    return Err(Error::DimensionMismatch { expected: self.m, got: idx });
                }
                let e = if self.eat(b'^') { self.exponent()? } else { 1 };
                let mut exps = vec![0; self.m];
                exps[idx - 1] = e;
                let mut t = Terms::new();
                t.insert(exps, Complex64::new(1.0, 0.0));
                Ok(t)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let v = self.number()?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(self.constant(Complex64::new(0.0, v)))
                } else {
                    Ok(self.constant(Complex64::new(v, 0.0)))
                }
            }
            Some(_) => Err(self.err("expected a number, `i`, a variable or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| Error::Syntax { pos: start, msg: format!("bad number `{text}`") })
    }

    fn exponent(&mut self) -> Result<i32> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_alphanumeric() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        if text.is_empty() {
            return Err(self.err("expected exponent"));
        }
        let v: i32 = match text.parse() {
            Ok(v) => v,
            Err(_) => {
                return if text.parse::<f64>().is_ok() {
                    Err(Error::NonIntegerExponent(text.to_string()))
                } else {
                    Err(Error::Syntax { pos: start, msg: format!("bad exponent `{text}`") })
                };
            }
        };
        if paren && !self.eat(b')') {
            return Err(self.err("expected `)` after exponent"));
        }
        Ok(if neg { -v } else { v })
    }
}

fn multiply(a: &Terms, b: &Terms) -> Terms {
    let mut out = Terms::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<i32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
        }
    }
    out
}
