//! Recursive-descent parser for the concrete formula grammar.
//!
//! ```text
//! phi  := "true" | "false" | IDENT | "~" phi | "(" phi BIN phi ")"
//!       | "K" IDENT phi | "C" "{" agents "}" phi
//!       | "[" "ann" phi "]" phi | "<" "ann" phi ">" phi
//!       | "[!]" phi | "<!>" phi
//!       | "[" "grp" "{" agents "}" "]" phi | "<" "grp" "{" agents "}" ">" phi
//!       | "[" "coa" "{" agents "}" "]" phi | "<" "coa" "{" agents "}" ">" phi
//! BIN  := "&" | "|" | "->"      agents := [ IDENT { "," IDENT } ]
//! ```
//!
//! Whitespace is insignificant. Duals and the derived connectives are
//! expanded on the spot, so the result is always in the primitive basis.

use std::fmt;

use thiserror::Error;

use super::{AgentSet, Formula};
use crate::kripke::AgentId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(String),
    Syntax(String),
    UnknownOperator(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(m) => write!(f, "lexical error: {m}"),
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownOperator(m) => write!(f, "unknown operator `{m}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tilde,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Tilde => write!(f, "`~`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

type Spanned = (Tok, u32, u32);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(c) = self.src[self.pos..].chars().next() {
            let (line, col) = (self.line, self.col);
            if c.is_whitespace() {
                self.bump(c);
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = self.pos;
                while let Some(c) = self.src[self.pos..].chars().next() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        self.bump(c);
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(self.src[start..self.pos].to_owned()), line, col));
                continue;
            }
            let tok = match c {
                '~' => Tok::Tilde,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                ',' => Tok::Comma,
                '-' => {
                    self.bump('-');
                    match self.src[self.pos..].chars().next() {
                        Some('>') => {
                            self.bump('>');
                            out.push((Tok::Arrow, line, col));
                            continue;
                        }
                        _ => {
                            return Err(ParseError {
                                line,
                                col,
                                kind: ParseErrorKind::Lexical("expected `>` after `-`".into()),
                            })
                        }
                    }
                }
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Lexical(format!("unexpected character `{other}`")),
                    })
                }
            };
            self.bump(c);
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (u32, u32),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|&(_, l, c)| (l, c))
            .unwrap_or(self.end)
    }

    fn syntax_err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            kind: ParseErrorKind::Syntax(msg.into()),
        })
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some((t, _, _)) => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            None => self.syntax_err(format!("expected {what}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let got = self.next(&tok.to_string())?;
        if got == tok {
            Ok(())
        } else {
            self.pos -= 1;
            self.syntax_err(format!("expected {tok}, found {got}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            Tok::Ident(s) => Ok(s),
            got => {
                self.pos -= 1;
                self.syntax_err(format!("expected {what}, found {got}"))
            }
        }
    }

    fn agents(&mut self) -> Result<AgentSet, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut out = AgentSet::new();
        if self.peek() == Some(&Tok::RBrace) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.insert(AgentId::new(self.ident("an agent name")?));
            match self.next("`,` or `}`")? {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(out),
                got => {
                    self.pos -= 1;
                    return self.syntax_err(format!("expected `,` or `}}`, found {got}"));
                }
            }
        }
    }

    fn phi(&mut self) -> Result<Formula, ParseError> {
        match self.next("a formula")? {
            Tok::Ident(word) => match word.as_str() {
                "true" => Ok(Formula::Top),
                "false" => Ok(Formula::bottom()),
                "K" => {
                    let agent = self.ident("an agent name")?;
                    Ok(Formula::know(AgentId::new(agent), self.phi()?))
                }
                "C" => {
                    let group = self.agents()?;
                    Ok(Formula::common(group, self.phi()?))
                }
                _ => Ok(Formula::atom(word)),
            },
            Tok::Tilde => Ok(self.phi()?.not()),
            Tok::LParen => {
                let lhs = self.phi()?;
                let op = self.next("`&`, `|` or `->`")?;
                let rhs = self.phi()?;
                self.expect(Tok::RParen)?;
                match op {
                    Tok::Amp => Ok(lhs.and(rhs)),
                    Tok::Pipe => Ok(lhs.or(rhs)),
                    Tok::Arrow => Ok(lhs.implies(rhs)),
                    got => {
                        self.pos -= 3;
                        self.syntax_err(format!("expected `&`, `|` or `->`, found {got}"))
                    }
                }
            }
            Tok::LBracket => match self.next("`!`, `ann`, `grp` or `coa`")? {
                Tok::Bang => {
                    self.expect(Tok::RBracket)?;
                    Ok(Formula::apal_box(self.phi()?))
                }
                Tok::Ident(word) => match word.as_str() {
                    "ann" => {
                        let ann = self.phi()?;
                        self.expect(Tok::RBracket)?;
                        Ok(Formula::announce(ann, self.phi()?))
                    }
                    "grp" => {
                        let group = self.agents()?;
                        self.expect(Tok::RBracket)?;
                        Ok(Formula::gal_box(group, self.phi()?))
                    }
                    "coa" => {
                        let group = self.agents()?;
                        self.expect(Tok::RBracket)?;
                        Ok(Formula::cal_box(group, self.phi()?))
                    }
                    other => {
                        self.pos -= 1;
                        let (line, col) = self.here();
                        Err(ParseError {
                            line,
                            col,
                            kind: ParseErrorKind::UnknownOperator(format!("[{other}")),
                        })
                    }
                },
                got => {
                    self.pos -= 1;
                    self.syntax_err(format!("expected `!`, `ann`, `grp` or `coa`, found {got}"))
                }
            },
            Tok::Lt => match self.next("`!`, `ann`, `grp` or `coa`")? {
                Tok::Bang => {
                    self.expect(Tok::Gt)?;
                    Ok(Formula::apal_dia(self.phi()?))
                }
                Tok::Ident(word) => match word.as_str() {
                    "ann" => {
                        let ann = self.phi()?;
                        self.expect(Tok::Gt)?;
                        Ok(Formula::announce_dia(ann, self.phi()?))
                    }
                    "grp" => {
                        let group = self.agents()?;
                        self.expect(Tok::Gt)?;
                        Ok(Formula::gal_dia(group, self.phi()?))
                    }
                    "coa" => {
                        let group = self.agents()?;
                        self.expect(Tok::Gt)?;
                        Ok(Formula::cal_dia(group, self.phi()?))
                    }
                    other => {
                        self.pos -= 1;
                        let (line, col) = self.here();
                        Err(ParseError {
                            line,
                            col,
                            kind: ParseErrorKind::UnknownOperator(format!("<{other}")),
                        })
                    }
                },
                got => {
                    self.pos -= 1;
                    self.syntax_err(format!("expected `!`, `ann`, `grp` or `coa`, found {got}"))
                }
            },
            got => {
                self.pos -= 1;
                self.syntax_err(format!("expected a formula, found {got}"))
            }
        }
    }
}

/// Parses a formula, expanding duals and derived connectives.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let lines = text.lines().count().max(1) as u32;
    let last_len = text.lines().last().map(|l| l.len()).unwrap_or(0) as u32;
    let mut p = Parser {
        toks,
        pos: 0,
        end: (lines, last_len + 1),
    };
    let f = p.phi()?;
    if p.pos != p.toks.len() {
        return p.syntax_err("trailing input after formula");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_positions() {
        let err = parse("K a $").unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
        assert!(matches!(err.kind, ParseErrorKind::Lexical(_)));

        let err = parse("(p &").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));

        let err = parse("[frob p] q").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownOperator(_)));
        assert_eq!((err.line, err.col), (1, 2));
    }

    #[test]
    fn multiline_position() {
        let err = parse("K a\n  %").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
    }

    #[test]
    fn trailing_input_rejected() {
        assert!(parse("p q").is_err());
    }

    #[test]
    fn missing_parens_on_binary() {
        // Binary connectives require explicit parentheses.
        assert!(parse("p & q").is_err());
    }
}
