//! Pratt parser for the infix expression grammar.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary minus, `^`.
//! `^` is right-associative and its exponent must be an integer literal,
//! optionally signed or parenthesized (`x^-2`, `x^(-2)`).

use thiserror::Error;

use super::{raw, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("exponent at position {pos} must be an integer literal")]
    NonIntegerExponent { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::NonIntegerExponent { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    i: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            i: 0,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.chars.get(self.i).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.i).map_or(self.src.len(), |&(p, _)| p)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.peek_char().is_some_and(char::is_whitespace) {
                self.i += 1;
            }
            let start = self.pos();
            let Some(c) = self.peek_char() else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            if c.is_ascii_digit() || c == '.' {
                out.push((self.number()?, start));
            } else if c.is_alphabetic() || c == '_' {
                while self
                    .peek_char()
                    .is_some_and(|c| c.is_alphanumeric() || c == '_')
                {
                    self.i += 1;
                }
                let text = &self.src[start..self.pos()];
                out.push((Tok::Ident(text.to_string()), start));
            } else {
                self.i += 1;
                let tok = match c {
                    '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: start,
                            message: format!("unexpected character `{c}`"),
                        })
                    }
                };
                out.push((tok, start));
            }
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos();
        let mut integer = true;
        while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        if self.peek_char() == Some('.') {
            integer = false;
            self.i += 1;
            while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                self.i += 1;
            }
        }
        if matches!(self.peek_char(), Some('e' | 'E')) {
            let save = self.i;
            self.i += 1;
            if matches!(self.peek_char(), Some('+' | '-')) {
                self.i += 1;
            }
            if self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                integer = false;
                while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                    self.i += 1;
                }
            } else {
                self.i = save;
            }
        }
        let text = &self.src[start..self.pos()];
        text.parse::<f64>()
            .map(|v| Tok::Num(v, integer))
            .map_err(|_| ParseError::Syntax {
                pos: start,
                message: format!("malformed number `{text}`"),
            })
    }
}

const ADD_BP: u8 = 10;
const MUL_BP: u8 = 20;
const NEG_BP: u8 = 30;
const POW_BP: u8 = 40;

struct Parser<'p> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    params: &'p [&'p str],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.pos(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        while let Tok::Op(c) = self.peek() {
            let op = *c;
            let (lbp, rbp) = match op {
                '+' | '-' => (ADD_BP, ADD_BP + 1),
                '*' | '/' => (MUL_BP, MUL_BP + 1),
                '^' => (POW_BP, POW_BP),
                _ => unreachable!(),
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            if op == '^' {
                let n = self.exponent()?;
                lhs = raw::pow(lhs, n);
            } else {
                let rhs = self.expr(rbp)?;
                lhs = raw::binary(op, lhs, rhs);
            }
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v, _) => Ok(raw::constant(v)),
            Tok::Op('-') => Ok(raw::neg(self.expr(NEG_BP)?)),
            Tok::Op('+') => self.expr(NEG_BP),
            Tok::LParen => {
                let inner = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            Tok::End => Err(ParseError::Syntax {
                pos,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                pos,
                message: format!("unexpected token {}", describe(&other)),
            }),
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(&name) {
            if *self.peek() != Tok::LParen {
                return Err(ParseError::Syntax {
                    pos: self.pos(),
                    message: format!("expected `(` after function `{name}`"),
                });
            }
            self.bump();
            let arg = self.expr(0)?;
            self.expect(Tok::RParen, "`)` closing function call")?;
            return Ok(raw::call(f, arg));
        }
        if let Some(v) = Var::from_name(&name) {
            return Ok(raw::var(v));
        }
        if self.params.contains(&name.as_str()) {
            return Ok(raw::param(&name));
        }
        Err(ParseError::UnknownIdentifier { name, pos })
    }

    /// Signed integer literal, possibly parenthesized, possibly itself raised
    /// to a further literal power (right associativity).
    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.pos();
        let parenthesized = *self.peek() == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let mut sign = 1i64;
        while let Tok::Op(c @ ('-' | '+')) = *self.peek() {
            if c == '-' {
                sign = -sign;
            }
            self.bump();
        }
        let (tok, pos) = self.bump();
        let base = match tok {
            Tok::Num(v, true) if v <= i32::MAX as f64 => sign * v as i64,
            Tok::Num(..) | Tok::Ident(_) | Tok::LParen => {
                return Err(ParseError::NonIntegerExponent { pos })
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    message: "expected integer exponent".into(),
                })
            }
        };
        if parenthesized {
            if *self.peek() != Tok::RParen {
                return Err(ParseError::NonIntegerExponent { pos: start });
            }
            self.bump();
        }
        let mut value = base;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let e = self.exponent()?;
            if e < 0 {
                return Err(ParseError::NonIntegerExponent { pos: start });
            }
            value = base
                .checked_pow(e as u32)
                .ok_or(ParseError::NonIntegerExponent { pos: start })?;
        }
        i32::try_from(value).map_err(|_| ParseError::NonIntegerExponent { pos: start })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v, _) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parse `text` into an expression. Identifiers other than `x`, `t`, `tau`,
/// the function names and `params` are rejected.
pub fn parse(text: &str, params: &[&str]) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, i: 0, params };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        other => Err(ParseError::Syntax {
            pos: p.pos(),
            message: format!("unexpected {} after expression", describe(other)),
        }),
    }
}
