//! Recursive-descent parser for the ASCII expression syntax.
//!
//! ```text
//! expr    = term (("+" | "-") term)*
//! term    = unary (("*" | "/") unary)*
//! unary   = "-" unary | power
//! power   = primary ("^" unary)?
//! primary = number | ident | "(" expr ")"
//! ```
//!
//! Exponents must reduce to a rational constant. Numbers may carry a decimal
//! point and are read exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Zero};

use super::{Expr, Var};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { pos: usize, name: String },
    #[error("division by zero at {pos}")]
    ZeroDenominator { pos: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    End,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &src[start..i];
            out.push((start, Tok::Num(parse_number(text, start)?)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                pos: i,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

fn parse_number(text: &str, pos: usize) -> Result<BigRational, ParseError> {
    let bad = || ParseError::Syntax {
        pos,
        msg: format!("malformed number {text:?}"),
    };
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if frac.contains('.') || (whole.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let n = BigInt::from_str_radix(&digits, 10).map_err(|_| bad())?;
    let d = num_traits::pow::pow(BigInt::from(10), frac.len());
    Ok(BigRational::new(n, d))
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    if d.is_zero() {
                        return Err(ParseError::ZeroDenominator { pos });
                    }
                    factors.push(d.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::product(factors))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Op('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() != &Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let k = self.unary()?;
        let k = k.as_const().cloned().ok_or_else(|| ParseError::Syntax {
            pos,
            msg: "exponent must be a rational constant".into(),
        })?;
        if base.is_zero() && k < BigRational::zero() {
            return Err(ParseError::ZeroDenominator { pos });
        }
        Ok(base.pow(k))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(Expr::constant(n)),
            Tok::Ident(name) => Var::from_name(&name)
                .map(Expr::var)
                .ok_or(ParseError::UnknownVariable { pos, name }),
            Tok::Op('(') => {
                let e = self.expr()?;
                match self.bump() {
                    Tok::Op(')') => Ok(e),
                    _ => Err(ParseError::Syntax {
                        pos: self.toks[self.at.saturating_sub(1)].0,
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Tok::End => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected `{c}`"),
            }),
        }
    }
}

/// Parse an expression in the jet variables `x y p q r s`.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(ParseError::Syntax {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rat, Assignment};

    #[test]
    fn precedence_and_associativity() {
        let a = Assignment::from_pairs(&[(Var::Q, 2.0), (Var::R, 3.0)]);
        let cases = [
            ("q + r*q", 8.0),
            ("-q^2", -4.0),
            ("r/q/q", 0.75),
            ("q - r - q", -3.0),
            ("2.5*q", 5.0),
            ("q^-1", 0.5),
        ];
        for (src, want) in cases {
            assert_eq!(parse(src).unwrap().eval(&a).unwrap(), want, "{src}");
        }
        assert!(parse("q^2^(1/2)").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse("q + z"),
            Err(ParseError::UnknownVariable {
                pos: 4,
                name: "z".into()
            })
        );
        assert_eq!(parse("q/0"), Err(ParseError::ZeroDenominator { pos: 2 }));
        assert!(matches!(parse("q +"), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(matches!(parse("(q"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("q^r"), Err(ParseError::Syntax { pos: 2, .. })));
        assert!(matches!(parse("q $"), Err(ParseError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.125").unwrap().as_const(), Some(&rat(1, 8)));
    }
}
