//! Recursive-descent parser for the expression grammar.
//!
//! Grammar: infix `+ - * /`, `^` for powers (integer or rational exponent),
//! function calls `exp(u)`, `ln(u)`, `sinh(u)`, `cosh(u)`, `sin(u)`,
//! `cos(u)`, `Ei1(u)`; identifiers must be declared coordinates or
//! parameters. Numbers are integers or decimal literals, stored as exact
//! rationals.

use super::{Expression, Rational};
use crate::error::{Error, Result};

/// Declared names the parser accepts.
#[derive(Clone, Debug, Default)]
pub struct ParseCtx {
    pub vars: Vec<String>,
    pub params: Vec<String>,
}

impl ParseCtx {
    pub fn new(vars: Vec<String>, params: Vec<String>) -> Self {
        ParseCtx { vars, params }
    }

    fn declared(&self) -> Vec<String> {
        self.vars.iter().chain(self.params.iter()).cloned().collect()
    }
}

pub fn parse(text: &str, ctx: &ParseCtx) -> Result<Expression> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        ctx,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    ctx: &'a ParseCtx,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut terms = vec![self.term()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    terms.push(self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    terms.push(Expression::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expression::add(terms))
    }

    fn term(&mut self) -> Result<Expression> {
        let mut acc = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    acc = Expression::mul(vec![acc, self.unary()?]);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    acc = Expression::div(acc, self.unary()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expression> {
        self.skip_ws();
        if self.eat(b'-') {
            self.skip_ws();
            return Ok(Expression::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let r = self.exponent()?;
            return Ok(Expression::pow(base, r));
        }
        Ok(base)
    }

    /// Exponent: integer, or a parenthesized signed integer / rational.
    fn exponent(&mut self) -> Result<Rational> {
        if self.eat(b'(') {
            self.skip_ws();
            let neg = self.eat(b'-');
            self.skip_ws();
            let num = self.integer()?;
            self.skip_ws();
            let r = if self.eat(b'/') {
                self.skip_ws();
                let den = self.integer()?;
                if den == 0 {
                    return Err(self.err("zero denominator in exponent"));
                }
                Rational::new(num, den)
            } else {
                Rational::int(num)
            };
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.err("expected `)` in exponent"));
            }
            Ok(if neg { r.neg() } else { r })
        } else {
            let neg = self.eat(b'-');
            let num = self.integer()?;
            let r = Rational::int(num);
            Ok(if neg { r.neg() } else { r })
        }
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn atom(&mut self) -> Result<Expression> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(b'0'..=b'9') | Some(b'.') => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.err("expected expression")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expression> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        let mut frac_digits: i64 = 0;
        if self.eat(b'.') {
            let fs = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            frac_digits = (self.pos - fs) as i64;
            if self.pos == fs && self.pos - 1 == start {
                return Err(self.err("malformed number"));
            }
        }
        let digits: String = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .chars()
            .filter(|c| *c != '.')
            .collect();
        let num: i64 = digits
            .parse()
            .map_err(|_| self.err("number out of range"))?;
        let den = 10i64
            .checked_pow(frac_digits as u32)
            .ok_or_else(|| self.err("number out of range"))?;
        Ok(Expression::constant(Rational::new(num, den)))
    }

    fn identifier(&mut self) -> Result<Expression> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = self.expr()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.err("expected `)` after function argument"));
            }
            return match name.as_str() {
                "exp" => Ok(Expression::exp(arg)),
                "ln" => Ok(Expression::ln(arg)),
                "sinh" => Ok(Expression::sinh(arg)),
                "cosh" => Ok(Expression::cosh(arg)),
                "sin" => Ok(Expression::sin(arg)),
                "cos" => Ok(Expression::cos(arg)),
                "Ei1" => Ok(Expression::expint1(arg)),
                _ => Err(Error::UnknownIdent {
                    name,
                    declared: vec![
                        "exp".into(),
                        "ln".into(),
                        "sinh".into(),
                        "cosh".into(),
                        "sin".into(),
                        "cos".into(),
                        "Ei1".into(),
                    ],
                }),
            };
        }
        if self.ctx.vars.iter().any(|v| *v == name) {
            Ok(Expression::var(&name))
        } else if self.ctx.params.iter().any(|p| *p == name) {
            Ok(Expression::param(&name))
        } else {
            Err(Error::UnknownIdent {
                name,
                declared: self.ctx.declared(),
            })
        }
    }
}
