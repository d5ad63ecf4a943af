//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar: decimal literals, identifiers, binary `+ - *`, `^` with a
//! nonnegative integer exponent, unary minus and parentheses.

use super::{PolyError, Polynomial};

/// Parses `src`, rejecting identifiers outside `allowed`.
pub fn parse_polynomial<S: AsRef<str>>(src: &str, allowed: &[S]) -> Result<Polynomial, PolyError> {
    let mut parser = Parser::new(
        src,
        Some(allowed.iter().map(|s| s.as_ref().to_string()).collect()),
    );
    parser.parse()
}

/// Parses `src` accepting any identifier as a variable.
pub fn parse_unchecked(src: &str) -> Result<Polynomial, PolyError> {
    Parser::new(src, None).parse()
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    allowed: Option<Vec<String>>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, allowed: Option<Vec<String>>) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            allowed,
        }
    }

    fn parse(&mut self) -> Result<Polynomial, PolyError> {
        let p = self.expr()?;
        self.skip_ws();
        if self.pos < self.bytes.len() {
            return Err(self.error(format!("unexpected '{}'", self.peek_char())));
        }
        Ok(p)
    }

    fn error(&self, msg: String) -> PolyError {
        PolyError::Syntax { pos: self.pos, msg }
    }

    fn peek_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc * self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("exponent must be a nonnegative integer".into()));
            }
            let e: u32 = self.src[start..self.pos]
                .parse()
                .map_err(|_| PolyError::Syntax {
                    pos: start,
                    msg: "exponent too large".into(),
                })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.error(format!("unexpected '{}'", self.peek_char()))),
            None => Err(self.error("unexpected end of input".into())),
        }
    }

    fn number(&mut self) -> Result<Polynomial, PolyError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(PolyError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            });
        }
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let v: f64 = self.src[start..self.pos]
            .parse()
            .map_err(|_| PolyError::Syntax {
                pos: start,
                msg: "malformed number".into(),
            })?;
        Ok(Polynomial::constant(v))
    }

    fn ident(&mut self) -> Result<Polynomial, PolyError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if let Some(allowed) = &self.allowed {
            if !allowed.iter().any(|a| a == name) {
                return Err(PolyError::UnknownVariable(name.to_string()));
            }
        }
        Ok(Polynomial::var(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vehicle_position_update() {
        let p = parse_polynomial("s + 1*v + 0.5*w", &["s", "v", "w"]).unwrap();
        assert_eq!(p.coefficient(&[("s", 1)]), 1.0);
        assert_eq!(p.coefficient(&[("v", 1)]), 1.0);
        assert_eq!(p.coefficient(&[("w", 1)]), 0.5);
        assert_eq!(p.num_terms(), 3);
    }

    #[test]
    fn zero_literal() {
        let p = parse_polynomial::<&str>("0", &[]).unwrap();
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    #[test]
    fn square_expansion() {
        let p = parse_unchecked("(v__1 - v__2)^2").unwrap();
        assert_eq!(p.coefficient(&[("v__1", 2)]), 1.0);
        assert_eq!(p.coefficient(&[("v__1", 1), ("v__2", 1)]), -2.0);
        assert_eq!(p.coefficient(&[("v__2", 2)]), 1.0);
        assert_eq!(p.num_terms(), 3);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(
            parse_unchecked("-x^2").unwrap(),
            parse_unchecked("-(x^2)").unwrap()
        );
        assert_eq!(
            parse_unchecked("2 - -x").unwrap(),
            parse_unchecked("2 + x").unwrap()
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(
            parse_unchecked("1e-3*x").unwrap().coefficient(&[("x", 1)]),
            1e-3
        );
    }

    #[test]
    fn errors_carry_position_and_name() {
        match parse_polynomial("s + q", &["s"]) {
            Err(PolyError::UnknownVariable(v)) => assert_eq!(v, "q"),
            other => panic!("{other:?}"),
        }
        match parse_unchecked("x + * y") {
            Err(PolyError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_unchecked("x^y"),
            Err(PolyError::Syntax { .. })
        ));
        assert!(matches!(
            parse_unchecked("(x + 1"),
            Err(PolyError::Syntax { .. })
        ));
        assert!(matches!(parse_unchecked(""), Err(PolyError::Syntax { .. })));
    }
}
