//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence, tightest first: unary operators, `u`/`U`, `&`, `|`, `->`,
//! `<->`. `u`, `U`, `&`, `|` and `<->` associate to the left, `->` to the
//! right.

use thiserror::Error;

use super::{Formula, VarId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind} at byte {pos}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("unbalanced parenthesis")]
    UnbalancedParen,
    #[error("operator `{0}` is missing an operand")]
    DanglingOperator(String),
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("empty formula")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Var(u32),
    True,
    False,
    Not,
    Next1,
    NextW,
    LocalEventually,
    LocalAlways,
    Eventually,
    Always,
    LocalUntil,
    Until,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Var(i) => format!("p{i}"),
            Tok::True => "true".into(),
            Tok::False => "false".into(),
            Tok::Not => "!".into(),
            Tok::Next1 => "[1]".into(),
            Tok::NextW => "[w]".into(),
            Tok::LocalEventually => "f".into(),
            Tok::LocalAlways => "g".into(),
            Tok::Eventually => "F".into(),
            Tok::Always => "G".into(),
            Tok::LocalUntil => "u".into(),
            Tok::Until => "U".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::Implies => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    const SYMBOLS: &[(&str, Tok)] = &[
        ("[omega]", Tok::NextW),
        ("<->", Tok::Iff),
        ("[1]", Tok::Next1),
        ("[w]", Tok::NextW),
        ("->", Tok::Implies),
        ("!", Tok::Not),
        ("&", Tok::And),
        ("|", Tok::Or),
        ("(", Tok::LParen),
        (")", Tok::RParen),
    ];
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    'outer: while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == b'_' {
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                pos += 1;
            }
            let word = &text[start..pos];
            let tok = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "f" => Tok::LocalEventually,
                "g" => Tok::LocalAlways,
                "F" => Tok::Eventually,
                "G" => Tok::Always,
                "u" => Tok::LocalUntil,
                "U" => Tok::Until,
                _ => match word.parse::<VarId>() {
                    Ok(v) => Tok::Var(v.0),
                    Err(_) => {
                        return Err(ParseError {
                            pos: start,
                            kind: ParseErrorKind::UnknownToken(word.to_string()),
                        })
                    }
                },
            };
            out.push((start, tok));
            continue;
        }
        for (sym, tok) in SYMBOLS {
            if text[pos..].starts_with(sym) {
                out.push((pos, tok.clone()));
                pos += sym.len();
                continue 'outer;
            }
        }
        let ch = text[pos..].chars().next().unwrap();
        return Err(ParseError {
            pos,
            kind: ParseErrorKind::UnknownToken(ch.to_string()),
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    /// Parses an operand that must follow the operator token just consumed.
    fn operand<F>(&mut self, op: &Tok, op_pos: usize, sub: F) -> Result<Formula, ParseError>
    where
        F: FnOnce(&mut Self) -> Result<Formula, ParseError>,
    {
        match self.peek() {
            None => Err(ParseError {
                pos: op_pos,
                kind: ParseErrorKind::DanglingOperator(op.text()),
            }),
            Some(Tok::RParen)
            | Some(Tok::And)
            | Some(Tok::Or)
            | Some(Tok::Implies)
            | Some(Tok::Iff)
            | Some(Tok::LocalUntil)
            | Some(Tok::Until) => Err(ParseError {
                pos: op_pos,
                kind: ParseErrorKind::DanglingOperator(op.text()),
            }),
            Some(_) => sub(self),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while self.peek() == Some(&Tok::Iff) {
            let p = self.pos();
            self.at += 1;
            let rhs = self.operand(&Tok::Iff, p, Self::imp)?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            let p = self.pos();
            self.at += 1;
            let rhs = self.operand(&Tok::Implies, p, Self::imp)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            let p = self.pos();
            self.at += 1;
            let rhs = self.operand(&Tok::Or, p, Self::and)?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.bin()?;
        while self.peek() == Some(&Tok::And) {
            let p = self.pos();
            self.at += 1;
            let rhs = self.operand(&Tok::And, p, Self::bin)?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bin(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let tok = match self.peek() {
                Some(t @ (Tok::LocalUntil | Tok::Until)) => t.clone(),
                _ => return Ok(lhs),
            };
            let p = self.pos();
            self.at += 1;
            let rhs = self.operand(&tok, p, Self::unary)?;
            lhs = match tok {
                Tok::LocalUntil => Formula::local_until(lhs, rhs),
                _ => Formula::until(lhs, rhs),
            };
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let p = self.pos();
        let tok = match self.peek() {
            Some(
                t @ (Tok::Not
                | Tok::Next1
                | Tok::NextW
                | Tok::LocalEventually
                | Tok::LocalAlways
                | Tok::Eventually
                | Tok::Always),
            ) => t.clone(),
            _ => return self.atom(),
        };
        self.at += 1;
        let inner = self.operand(&tok, p, Self::unary)?;
        Ok(match tok {
            Tok::Not => Formula::not(inner),
            Tok::Next1 => Formula::next1(inner),
            Tok::NextW => Formula::next_w(inner),
            Tok::LocalEventually => Formula::local_eventually(inner),
            Tok::LocalAlways => Formula::local_always(inner),
            Tok::Eventually => Formula::eventually(inner),
            _ => Formula::always(inner),
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let p = self.pos();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => {
                return Err(ParseError {
                    pos: p,
                    kind: ParseErrorKind::Empty,
                })
            }
        };
        self.at += 1;
        match tok {
            Tok::Var(i) => Ok(Formula::var(i)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::LParen => {
                if self.peek().is_none() {
                    return Err(ParseError {
                        pos: p,
                        kind: ParseErrorKind::UnbalancedParen,
                    });
                }
                let inner = self.iff()?;
                if self.eat(&Tok::RParen) {
                    Ok(inner)
                } else if self.peek().is_none() {
                    Err(ParseError {
                        pos: p,
                        kind: ParseErrorKind::UnbalancedParen,
                    })
                } else {
                    Err(ParseError {
                        pos: self.pos(),
                        kind: ParseErrorKind::Unexpected(self.peek().unwrap().text()),
                    })
                }
            }
            Tok::RParen => Err(ParseError {
                pos: p,
                kind: ParseErrorKind::UnbalancedParen,
            }),
            other => Err(ParseError {
                pos: p,
                kind: ParseErrorKind::Unexpected(other.text()),
            }),
        }
    }
}

/// Parses a formula. Abbreviations are kept; see [`super::desugar`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(ParseError {
            pos: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let f = p.iff()?;
    match p.peek() {
        None => Ok(f),
        Some(Tok::RParen) => Err(ParseError {
            pos: p.pos(),
            kind: ParseErrorKind::UnbalancedParen,
        }),
        Some(t) => Err(ParseError {
            pos: p.pos(),
            kind: ParseErrorKind::Unexpected(t.text()),
        }),
    }
}
