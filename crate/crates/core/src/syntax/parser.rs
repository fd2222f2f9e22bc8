//! Lexer and recursive-descent parser for event formulas.
//!
//! Precedence, tightest first: `~`; `&` and `&&`; `|` and `||`; then
//! `given` / `pgiven`, which do not associate.

use std::fmt;

use thiserror::Error;

use super::formula::Formula;
use crate::model::Atom;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, " (expected {expected})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Tilde,
    Amp,
    AmpAmp,
    Bar,
    BarBar,
    LParen,
    RParen,
    At,
    Ident(String),
    Int(String),
    Given,
    PGiven,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Tilde => f.write_str("`~`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::AmpAmp => f.write_str("`&&`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::BarBar => f.write_str("`||`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::At => f.write_str("`@`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(s) => write!(f, "number `{s}`"),
            Tok::Given => f.write_str("`given`"),
            Tok::PGiven => f.write_str("`pgiven`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn lex(text: &str, first_line: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (first_line, 1);

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            '~' => {
                bump(&mut chars);
                Tok::Tilde
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '@' => {
                bump(&mut chars);
                Tok::At
            }
            '&' | '|' => {
                bump(&mut chars);
                let doubled = chars.peek() == Some(&c);
                if doubled {
                    bump(&mut chars);
                }
                match (c, doubled) {
                    ('&', false) => Tok::Amp,
                    ('&', true) => Tok::AmpAmp,
                    ('|', false) => Tok::Bar,
                    _ => Tok::BarBar,
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    s.push(d);
                    bump(&mut chars);
                }
                Tok::Int(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    s.push(d);
                    bump(&mut chars);
                }
                match s.as_str() {
                    "given" => Tok::Given,
                    "pgiven" => Tok::PGiven,
                    _ => Tok::Ident(s),
                }
            }
            other => {
                return Err(ParseError {
                    line: start_line,
                    column: start_col,
                    message: format!("unexpected character `{other}`"),
                    expected: None,
                })
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>, expected: Option<&str>) -> ParseError {
        let at = &self.toks[self.pos];
        ParseError {
            line: at.line,
            column: at.column,
            message: message.into(),
            expected: expected.map(str::to_string),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let event = self.disjunction()?;
        let make: fn(Formula, Formula) -> Formula = match self.peek() {
            Tok::Given => Formula::given,
            Tok::PGiven => Formula::pgiven,
            _ => return Ok(event),
        };
        self.advance();
        let condition = self.disjunction()?;
        if matches!(self.peek(), Tok::Given | Tok::PGiven) {
            return Err(self.error("conditionals do not chain; add parentheses", Some("end of formula")));
        }
        Ok(make(event, condition))
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        loop {
            let make: fn(Formula, Formula) -> Formula = match self.peek() {
                Tok::Bar => Formula::choice_or,
                Tok::BarBar => Formula::par_or,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.conjunction()?;
            left = make(left, right);
        }
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        loop {
            let make: fn(Formula, Formula) -> Formula = match self.peek() {
                Tok::Amp => Formula::choice_and,
                Tok::AmpAmp => Formula::par_and,
                _ => return Ok(left),
            };
            self.advance();
            let right = self.unary()?;
            left = make(left, right);
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.formula()?;
                match self.peek() {
                    Tok::RParen => {
                        self.advance();
                        Ok(inner)
                    }
                    other => Err(self.error(format!("unbalanced parentheses, found {other}"), Some("`)`"))),
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let outcome = match self.peek().clone() {
            Tok::Ident(s) | Tok::Int(s) => s,
            Tok::Given | Tok::PGiven if *self.peek_at(1) == Tok::At => keyword_text(self.peek()),
            other => return Err(self.error(format!("unexpected {other}"), Some("an event"))),
        };
        let bare_predicate = matches!(self.peek(), Tok::Ident(s) if super::formula::is_predicate_name(s));
        self.advance();
        if *self.peek() != Tok::At {
            if bare_predicate {
                return Ok(Formula::Atom(Atom::predicate(outcome.as_str())));
            }
            return Err(self.error(format!("outcome `{outcome}` needs an experiment tag"), Some("`@`")));
        }
        self.advance();
        let experiment = match self.peek().clone() {
            Tok::Ident(s) => s,
            t @ (Tok::Given | Tok::PGiven) => keyword_text(&t),
            other => return Err(self.error(format!("unexpected {other} after `@`"), Some("experiment name"))),
        };
        self.advance();
        Ok(Formula::atom(&outcome, &experiment))
    }
}

fn keyword_text(tok: &Tok) -> String {
    match tok {
        Tok::Given => "given".to_string(),
        _ => "pgiven".to_string(),
    }
}

/// Parses a complete event formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_at(text, 1)
}

pub(crate) fn parse_formula_at(text: &str, line: usize) -> Result<Formula, ParseError> {
    let toks = lex(text, line)?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.formula()?;
    match parser.peek() {
        Tok::Eof => Ok(f),
        Tok::RParen => Err(parser.error("unbalanced parentheses", Some("end of formula"))),
        other => Err(parser.error(format!("unexpected {other}"), Some("an operator"))),
    }
}
