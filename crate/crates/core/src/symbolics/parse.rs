//! Recursive-descent parser for the symbol language.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] number)?
//! atom   := number | 'r' | func '(' expr ')' | 'chi' '(' ['-'] number ',' ['-'] number ')'
//!         | '(' expr ')'
//! func   := 'exp' | 'sin' | 'cos' | 'abs' | 'pos' | 'neg'
//! ```
//!
//! Positions in errors are byte offsets into the input.

use super::ast::{Expr, Func};
use crate::error::{Error, Result};

pub(crate) fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.syntax(&format!("unexpected '{}'", p.peek_char())));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.peek().map_or('?', char::from)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn syntax(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() {
            Err(self.syntax(&format!("expected '{}' before end of input", char::from(c))))
        } else {
            Err(self.syntax(&format!(
                "expected '{}', found '{}'",
                char::from(c),
                self.peek_char()
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            // A minus directly in front of a literal is part of the literal,
            // which keeps printed negative constants stable under reparsing.
            self.skip_ws();
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                let start = self.pos;
                let x = self.number()?;
                if self.peek_after_ws() == Some(b'^') {
                    // -2^2 means -(2^2).
                    self.pos = start;
                    return Ok(Expr::Neg(Box::new(self.power()?)));
                }
                return Ok(Expr::Num(-x));
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn peek_after_ws(&mut self) -> Option<u8> {
        self.skip_ws();
        self.peek()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            self.skip_ws();
            let p = self.number()?;
            return Ok(Expr::Pow(Box::new(base), if neg { -p } else { p }));
        }
        Ok(base)
    }

    fn signed_number(&mut self) -> Result<f64> {
        let neg = self.eat(b'-');
        self.skip_ws();
        let x = self.number()?;
        Ok(if neg { -x } else { x })
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("expected a number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // Not an exponent; leave the `e` for the caller to reject.
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::Syntax {
                pos: start,
                msg: format!("number '{text}' is not a finite literal"),
            }),
        }
    }

    fn identifier(&mut self) -> &str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice")
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Num(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.identifier().to_string();
                if name == "r" {
                    return Ok(Expr::R);
                }
                if name == "chi" {
                    self.expect(b'(')?;
                    let lo = self.signed_number()?;
                    self.expect(b',')?;
                    let hi = self.signed_number()?;
                    self.expect(b')')?;
                    if !(0.0 <= lo && lo < hi && hi.is_finite()) {
                        return Err(Error::InvalidIndicator { a: lo, b: hi });
                    }
                    return Ok(Expr::Chi(lo, hi));
                }
                match Func::from_name(&name) {
                    Some(f) => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { pos: start, name }),
                }
            }
            Some(_) => Err(self.syntax(&format!("unexpected '{}'", self.peek_char()))),
        }
    }
}
