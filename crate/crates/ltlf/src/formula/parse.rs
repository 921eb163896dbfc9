use std::num::NonZeroU32;

use num_bigint::BigUint;

use super::{Comparator, Formula, Op};
use crate::model::RESERVED_WORDS;
use crate::prob::Probability;

/// A parse failure, pointing at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("bad probability `{text}` at position {position}: index must be in [0, 1]")]
    BadProbability { position: usize, text: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::SyntaxError { position, .. } | ParseError::BadProbability { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Slash,
    Caret,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Bang,
    Amp,
    Bar,
    Cmp(Comparator),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(s) => format!("number `{s}`"),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LBrack => "`[`".into(),
        Tok::RBrack => "`]`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Bar => "`|`".into(),
        Tok::Cmp(c) => format!("`{}`", c.symbol()),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'[' => Tok::LBrack,
            b']' => Tok::RBrack,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'!' => Tok::Bang,
            b'&' => Tok::Amp,
            b'|' => Tok::Bar,
            b'=' => Tok::Cmp(Comparator::Eq),
            b'>' if two(b'=') => {
                i += 1;
                Tok::Cmp(Comparator::Geq)
            }
            b'<' if two(b'=') => {
                i += 1;
                Tok::Cmp(Comparator::Leq)
            }
            b'>' => Tok::Cmp(Comparator::Gt),
            b'<' => Tok::Cmp(Comparator::Lt),
            b'0'..=b'9' => {
                while i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                }
                Tok::Int(text[start..=i].to_string())
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len() && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_') {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::SyntaxError {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError {
            position: self.offset(),
            message: format!("expected {expected}, found {}", describe(self.peek())),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            f = f.or(self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::LParen => {
                self.bump();
                let f = self.disj()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(word) => {
                let op = match word.as_str() {
                    "box" => Some(Op::WhiteBox),
                    "bbox" => Some(Op::BlackBox),
                    "circ" => Some(Op::Circle),
                    "star" => Some(Op::Star),
                    "next" => Some(Op::NEXT),
                    _ => None,
                };
                self.bump();
                match op {
                    None => Ok(Formula::Atom(word)),
                    Some(op) => self.modal(op),
                }
            }
            _ => self.fail("a formula"),
        }
    }

    fn modal(&mut self, mut op: Op) -> Result<Formula, ParseError> {
        if op == Op::NEXT && *self.peek() == Tok::Caret {
            self.bump();
            let at = self.offset();
            let Tok::Int(digits) = self.peek().clone() else {
                return self.fail("a step count after `^`");
            };
            self.bump();
            let steps = digits.parse::<u32>().ok().and_then(NonZeroU32::new).ok_or(ParseError::SyntaxError {
                position: at,
                message: format!("step count `{digits}` must be a positive integer"),
            })?;
            op = Op::Next(steps);
        }
        self.expect(Tok::LBrack, "`[`")?;
        let cmp = match self.bump() {
            Tok::Cmp(c) => c,
            Tok::Ident(w) if w == "max" => Comparator::Max,
            _ => {
                self.pos -= 1;
                return self.fail("a comparator (>=, <, <=, =, >, max)");
            }
        };
        let q = self.probability()?;
        self.expect(Tok::RBrack, "`]`")?;
        let arg = self.unary()?;
        Ok(Formula::modal(op, cmp, q, arg))
    }

    fn probability(&mut self) -> Result<Probability, ParseError> {
        let at = self.offset();
        let Tok::Int(num) = self.peek().clone() else {
            return self.fail("an index like `1/2` or `1`");
        };
        self.bump();
        let mut text = num.clone();
        let mut den = "1".to_string();
        if *self.peek() == Tok::Slash {
            self.bump();
            let Tok::Int(d) = self.peek().clone() else {
                return self.fail("a denominator");
            };
            self.bump();
            text = format!("{num}/{d}");
            den = d;
        }
        let num: BigUint = num.parse().expect("lexed digits");
        let den: BigUint = den.parse().expect("lexed digits");
        Probability::new(num, den).map_err(|_| ParseError::BadProbability { position: at, text })
    }
}

/// Parses the concrete formula syntax.
///
/// ```
/// use ltlf::formula::{parse, ParseError};
///
/// let f = parse("box[>=1/2] box[>=1] Head").unwrap();
/// assert_eq!(f.to_string(), "box[>=1/2] box[>=1] Head");
/// assert!(matches!(parse("box[>=3/2] Head"), Err(ParseError::BadProbability { position: 6, .. })));
/// assert_eq!(parse("Head &").unwrap_err().position(), 6);
/// ```
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.disj()?;
    if *p.peek() != Tok::End {
        return p.fail("an operator or end of input");
    }
    debug_assert!(f.atoms().iter().all(|a| !RESERVED_WORDS.contains(&a.as_str())));
    Ok(f)
}
