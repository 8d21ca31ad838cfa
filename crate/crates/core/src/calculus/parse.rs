//! Infix grammar for scalar expressions.
//!
//! Precedence, tightest first: `^` (integer exponents only), unary `-`,
//! `*` and `/`, binary `+` and `-`. Functions are `sin`, `cos`, `exp`.

use num_rational::Ratio;

use super::expr::{Coeff, Expr};
use crate::error::{Error, Result};

/// Parses `src` over the coordinates `x1..x{dim}`.
pub fn parse_expr(src: &str, dim: usize) -> Result<Expr> {
    parse_with_aliases(src, dim, &[])
}

/// As [`parse_expr`], additionally accepting `aliases[i]` as a name for
/// coordinate `i`.
pub fn parse_with_aliases(src: &str, dim: usize, aliases: &[&str]) -> Result<Expr> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        dim,
        aliases,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error(format!("unexpected `{}`", &src[p.pos..p.pos + 1])));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
    aliases: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
        }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).map_err(|_| Error::Parse {
                        position: at,
                        message: "division by an expression that is identically zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.pos;
        let n = self.exponent()?;
        base.pow(n).map_err(|_| Error::Parse {
            position: at,
            message: "negative power of an expression that is identically zero".into(),
        })
    }

    fn exponent(&mut self) -> Result<i32> {
        let at = self.pos;
        let e = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.primary()?.neg()
            }
            _ => self.primary()?,
        };
        let bad = || Error::Parse {
            position: at,
            message: "exponent must be an integer constant".into(),
        };
        let v = e.as_constant().ok_or_else(bad)?;
        if v.fract() != 0.0 || v.abs() > 64.0 {
            return Err(bad());
        }
        Ok(v as i32)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        let mantissa = &self.src[start..self.pos];
        let mut scientific = false;
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            } else {
                scientific = true;
            }
        }
        let text = &self.src[start..self.pos];
        let bad = || Error::Parse {
            position: start,
            message: format!("malformed number `{text}`"),
        };
        if scientific {
            let v: f64 = text.parse().map_err(|_| bad())?;
            return Ok(Expr::real(v));
        }
        Ok(Expr::constant(decimal(mantissa).ok_or_else(bad)?))
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let ident = &self.src[start..self.pos];
        if let Some(i) = self.aliases.iter().position(|a| *a == ident) {
            return Ok(Expr::var(i));
        }
        match ident {
            "sin" | "cos" | "exp" => {
                self.expect(b'(')?;
                let arg = self.sum()?;
                self.expect(b')')?;
                Ok(match ident {
                    "sin" => arg.sin(),
                    "cos" => arg.cos(),
                    _ => arg.exp(),
                })
            }
            _ => {
                let index = ident
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&k| k >= 1 && k <= self.dim);
                match index {
                    Some(k) => Ok(Expr::var(k - 1)),
                    None => Err(Error::Parse {
                        position: start,
                        message: format!("unknown identifier `{ident}` (chart has dimension {})", self.dim),
                    }),
                }
            }
        }
    }
}

/// Exact value of a plain decimal literal, or a real once it exceeds i64.
fn decimal(text: &str) -> Option<Coeff> {
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    if digits.len() <= 18 {
        let numer: i64 = digits.parse().ok()?;
        let denom = 10i64.pow(frac.len() as u32);
        Some(Coeff::Exact(Ratio::new(numer, denom)))
    } else {
        text.parse::<f64>().ok().map(Coeff::Real)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expr(s, 3).unwrap()
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-x1^2").eval(&[3.0, 0.0, 0.0]).unwrap(), -9.0);
        assert_eq!(p("1 + 2*x2 - x3/4").eval(&[0.0, 1.0, 2.0]).unwrap(), 2.5);
        assert_eq!(p("2^-1"), Expr::rational(1, 2));
        assert_eq!(p("x1^(-1)"), p("1/x1"));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(p("0.5 + 0.5"), Expr::one());
        assert_eq!(p("1e-3").as_constant(), Some(1e-3));
    }

    #[test]
    fn grammar_example() {
        let e = parse_expr("x1^2*exp(x2) - 0.5", 2).unwrap();
        assert_eq!(e.eval(&[1.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(
            parse_expr("x1 + x4", 3),
            Err(Error::Parse { position: 5, .. })
        ));
        assert!(matches!(parse_expr("x1^x2", 3), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("sin(x1", 3), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("(x1 - x1)^-1", 3), Err(Error::Parse { .. })));
    }

    #[test]
    fn aliases() {
        let e = parse_with_aliases("t^2 + x1", 1, &["t"]).unwrap();
        assert_eq!(e.eval(&[2.0]).unwrap(), 6.0);
    }

    #[test]
    fn display_round_trips() {
        for s in ["x1^2*exp(x2) - 0.5", "sin(x1 + x2)/(1 + x3^2)", "3/2*x1 - x2^(-2)"] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s} -> {e}");
        }
    }
}
