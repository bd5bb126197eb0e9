//! Parser for the polynomial expression grammar used in JSON files and on
//! the command line.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr     := [sign] term (sign term)*
//! term     := factor ('*' factor)*
//! factor   := base ('^' integer)?
//! base     := variable | rational | 'i' | '(' expr ')'
//! rational := integer ('/' integer)?
//! variable := x<k> | xi<k> | th<k> | v<k> | t
//! ```
//!
//! Variable indices are validated against the target [`VarUniverse`];
//! errors carry the byte offset of the offending token.

use crate::poly::MultiPoly;
use crate::scalar::GaussianRational;
use crate::vars::{Var, VarUniverse};
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    universe: VarUniverse,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos, msg: msg.into() })
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

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut negate = false;
        if let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                negate = c == b'-';
            }
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        while let Some(c) = self.peek() {
            if c == b'+' || c == b'-' {
                self.pos += 1;
                let t = self.term()?;
                acc = if c == b'+' { acc.add(&t) } else { acc.sub(&t) };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let exp = self.integer()?;
            let exp: u32 = exp
                .try_into()
                .map_err(|_| ParseError { pos: at, msg: "exponent out of range".into() })?;
            Ok(base.pow(exp))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<MultiPoly, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.bump() != Some(b')') {
                    return self.err(self.pos.saturating_sub(1), "expected ')'");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let r = self.rational()?;
                Ok(MultiPoly::constant(self.universe, GaussianRational::from_real(r)))
            }
            Some(c) if c.is_ascii_lowercase() => self.identifier(),
            Some(c) => self.err(self.pos, format!("unexpected character '{}'", c as char)),
            None => self.err(self.pos, "unexpected end of input"),
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err(start, "expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError { pos: start, msg: "number out of range".into() })
    }

    fn rational(&mut self) -> Result<BigRational, ParseError> {
        let numer = self.integer()?;
        let mut denom: u64 = 1;
        // Lookahead: '/' only binds a denominator when directly followed by digits.
        if self.peek() == Some(b'/') {
            let save = self.pos;
            self.pos += 1;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let at = self.pos;
                denom = self.integer()?;
                if denom == 0 {
                    return self.err(at, "zero denominator");
                }
            } else {
                self.pos = save;
            }
        }
        Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    fn identifier(&mut self) -> Result<MultiPoly, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_lowercase() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        let digit_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let index: Option<u32> = if digit_start == self.pos {
            None
        } else {
            Some(
                std::str::from_utf8(&self.src[digit_start..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| ParseError { pos: digit_start, msg: "index out of range".into() })?,
            )
        };
        let var = match (name.as_str(), index) {
            ("i", None) => {
                return Ok(MultiPoly::constant(self.universe, GaussianRational::i()));
            }
            ("t", None) => Var::t(),
            ("x", Some(k)) => Var::x(k),
            ("xi", Some(k)) => Var::xi(k),
            ("th", Some(k)) => Var::th(k),
            ("v", Some(k)) => Var::v(k),
            _ => {
                return self.err(start, format!("unknown symbol '{name}'"));
            }
        };
        if let Some(0) = index {
            return self.err(digit_start, "variable indices start at 1");
        }
        MultiPoly::var(self.universe, var).map_err(|_| ParseError {
            pos: start,
            msg: format!("variable {var} does not exist in universe {}", self.universe),
        })
    }
}

/// Parses an expression into a polynomial over `universe`.
pub fn parse_poly(src: &str, universe: VarUniverse) -> Result<MultiPoly, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, universe };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError {
            pos: p.pos,
            msg: format!("trailing input '{}'", &src[p.pos..]),
        });
    }
    Ok(poly)
}

/// Parses a constant expression (no variables, `i` allowed).
pub fn parse_scalar(src: &str) -> Result<GaussianRational, ParseError> {
    let poly = parse_poly(src, VarUniverse::scalar())?;
    if !poly.is_constant() {
        return Err(ParseError { pos: 0, msg: format!("'{src}' is not a constant") });
    }
    Ok(poly.constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::VarUniverse;

    fn u() -> VarUniverse {
        VarUniverse::new(2, 3)
    }

    #[test]
    fn parses_basic_forms() {
        let p = parse_poly("x1^2-xi2*x1+1/2", u()).unwrap();
        assert_eq!(p.to_string(), "x1^2-x1*xi2+1/2");
        let q = parse_poly(" - th1 * th2 + 3/4 * v2 ", u()).unwrap();
        assert_eq!(q.to_string(), "-th1*th2+3/4*v2");
        let r = parse_poly("i*t^2", u()).unwrap();
        assert_eq!(r.to_string(), "i*t^2");
    }

    #[test]
    fn parses_parentheses() {
        let p = parse_poly("(x1+xi1)*(x1-xi1)", u()).unwrap();
        assert_eq!(p.to_string(), "x1^2-xi1^2");
    }

    #[test]
    fn display_round_trips(){
        for src in ["x1^2-x1*xi2+1/2", "-th1*th2+3/4*v2", "(1/2+i)*x1-i", "0", "2-1/3*i"] {
            let p = parse_poly(src, u()).unwrap();
            let q = parse_poly(&p.to_string(), u()).unwrap();
            assert_eq!(p, q, "round trip through display for {src}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_poly("x1 + x9", u()).unwrap_err();
        assert_eq!(e.pos, 5);
        assert!(e.msg.contains("x9"));
        let e = parse_poly("x1 $ 2", u()).unwrap_err();
        assert_eq!(e.pos, 3);
        let e = parse_poly("1/0", u()).unwrap_err();
        assert!(e.msg.contains("zero denominator"));
        let e = parse_poly("2x1", u()).unwrap_err();
        assert!(e.msg.contains("trailing"));
        assert!(parse_poly("w3", u()).is_err());
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(parse_scalar("3/4").unwrap(), GaussianRational::from_ratio(3, 4));
        assert_eq!(parse_scalar("-i").unwrap(), -GaussianRational::i());
        assert!(parse_scalar("x1").is_err());
    }
}
