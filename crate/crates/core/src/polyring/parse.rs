//! Recursive-descent parser for the polynomial grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ('^' INT)?
//! atom  := INT ('/' INT)? | IDENT | '(' expr ')'
//! ```
//!
//! Juxtaposition is not multiplication; `2x` is a syntax error.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{is_identifier, Poly, Vars};
use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("'{n}'"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = text[start..i].parse().expect("digits");
                out.push((start, Tok::Int(n)));
                continue;
            }
            b'a'..=b'z' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase()
                        || bytes[i].is_ascii_digit()
                        || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &text[start..i];
                debug_assert!(is_identifier(name));
                out.push((start, Tok::Ident(name.to_string())));
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!(
                        "unexpected character '{}'",
                        text[start..].chars().next().unwrap_or('?')
                    ),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self) -> Error {
        Error::Syntax {
            pos: self.pos(),
            msg: format!("unexpected token {}", self.peek().describe()),
        }
    }

    fn expr(&mut self) -> Result<Poly<Rational>> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly<Rational>> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly<Rational>> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly<Rational>> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e: u32 = n.try_into().map_err(|_| Error::Syntax {
                    pos,
                    msg: "exponent too large".into(),
                })?;
                Ok(base.pow(e))
            }
            _ => {
                self.at -= 1;
                Err(Error::Syntax {
                    pos,
                    msg: format!(
                        "expected integer exponent, found {}",
                        self.peek().describe()
                    ),
                })
            }
        }
    }

    fn atom(&mut self) -> Result<Poly<Rational>> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Tok::Int(d) if !d.is_zero() => Ok(Poly::constant(Rational::new(n, d))),
                        Tok::Int(_) => Err(Error::Syntax {
                            pos: dpos,
                            msg: "zero denominator".into(),
                        }),
                        _ => {
                            self.at -= 1;
                            Err(Error::Syntax {
                                pos: dpos,
                                msg: format!(
                                    "expected denominator, found {}",
                                    self.peek().describe()
                                ),
                            })
                        }
                    }
                } else {
                    Ok(Poly::constant(Rational::from_integer(n)))
                }
            }
            Tok::Ident(name) => {
                self.bump();
                let i = self
                    .vars
                    .index_of(&name)
                    .ok_or(Error::UnknownVariable(name))?;
                Ok(Poly::var(i))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(Error::Syntax {
                        pos: self.pos(),
                        msg: format!("expected ')', found {}", self.peek().describe()),
                    });
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {}", self.peek().describe()),
            }),
        }
    }
}

/// Parses `text` into canonical form over the generators `vars`.
pub fn parse_poly(text: &str, vars: &Vars) -> Result<Poly<Rational>> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        vars,
    };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected());
    }
    Ok(out)
}
