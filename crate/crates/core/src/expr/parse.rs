//! Recursive-descent parser for scalar expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' number)*          -- chained exponents fold right
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ident  := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Functions: sin, cos, exp, log, sqrt. Every other identifier must be one
//! of the declared coordinate names. Errors carry the byte offset at which
//! parsing failed.

use std::sync::Arc;

use super::ast::Expr;
use crate::error::{GeomError, Result};

const FUNCTIONS: [&str; 5] = ["sin", "cos", "exp", "log", "sqrt"];

pub fn parse(text: &str, vars: &[String]) -> Result<Arc<Expr>> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: &str) -> GeomError {
        GeomError::Syntax {
            position: self.pos,
            message: msg.to_string(),
        }
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

    fn expr(&mut self) -> Result<Arc<Expr>> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Arc::new(Expr::Add(lhs, rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Arc::new(Expr::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Arc<Expr>> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Arc::new(Expr::Mul(lhs, rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = Arc::new(Expr::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Arc<Expr>> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Arc::new(Expr::Neg(inner)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Arc<Expr>> {
        let base = self.base()?;
        let mut exponents = Vec::new();
        while self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            exponents.push(self.number()?);
        }
        if exponents.is_empty() {
            return Ok(base);
        }
        // x^a^b = x^(a^b): fold the constant exponent chain from the right.
        let mut k = *exponents.last().unwrap();
        for e in exponents.iter().rev().skip(1) {
            k = e.powf(k);
        }
        Ok(Arc::new(Expr::Pow(base, k)))
    }

    fn base(&mut self) -> Result<Arc<Expr>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Arc::new(Expr::Const(self.number()?))),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.syntax("expected expression")),
        }
    }

    fn ident(&mut self) -> Result<Arc<Expr>> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("identifier bytes are ASCII")
            .to_string();
        if self.peek() == Some(b'(') {
            if !FUNCTIONS.contains(&name.as_str()) {
                return Err(GeomError::UnknownIdentifier {
                    name,
                    position: start,
                });
            }
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected `)`"));
            }
            let e = match name.as_str() {
                "sin" => Expr::Sin(arg),
                "cos" => Expr::Cos(arg),
                "exp" => Expr::Exp(arg),
                "log" => Expr::Log(arg),
                "sqrt" => Expr::Sqrt(arg),
                _ => unreachable!(),
            };
            Ok(Arc::new(e))
        } else {
            if !self.vars.iter().any(|v| v == &name) {
                return Err(GeomError::UnknownIdentifier {
                    name,
                    position: start,
                });
            }
            Ok(Arc::new(Expr::Var(name)))
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.syntax("expected number"));
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == fs {
                return Err(self.syntax("expected digits after decimal point"));
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E')
        {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            let ds = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == ds {
                // not an exponent after all (e.g. `2*exp(x)` scanning `2*e`)
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("number bytes are ASCII");
        text.parse::<f64>().map_err(|_| GeomError::Syntax {
            position: start,
            message: format!("invalid number `{text}`"),
        })
    }
}
