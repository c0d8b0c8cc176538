//! Recursive-descent parser for the ASCII formula grammar.
//!
//! Precedence, loosest first: `lor`, `\/`, `/\`, then the prefix operators
//! `~`, `dia`, `!`. Binary connectives associate to the left. A quantifier
//! body extends as far to the right as possible; the `.` after the binder
//! list is optional. Inside a binder list `R(x)` is an atom while `y (..)`
//! binds `y`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use super::{Atom, DepAtom, Formula, Literal, Term, Var};
use crate::dependency::DependencyRegistry;

const KEYWORDS: &[&str] = &[
    "exists", "forall", "lor", "dia", "top", "bot", "atom", "const", "all", "ind", "inc", "exc",
];

/// Dependency families written with their own keyword; `dep` is written `=(..)`.
pub(crate) const KEYWORD_DEPENDENCIES: &[&str] = &["const", "all", "ind", "inc", "exc"];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    /// Identifiers parsed as constant symbols rather than variables.
    pub constants: BTreeSet<String>,
    /// Only allow `~` directly in front of literals and dependency atoms.
    pub tilde0: bool,
}

impl ParseOptions {
    pub fn with_constants<I: IntoIterator<Item = S>, S: Into<String>>(constants: I) -> ParseOptions {
        ParseOptions { constants: constants.into_iter().map(Into::into).collect(), tilde0: false }
    }

    pub fn tilde0() -> ParseOptions {
        ParseOptions { tilde0: true, ..ParseOptions::default() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(src: &str, offset: usize, message: impl Into<String>) -> ParseError {
        let before = &src[..offset.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
        ParseError { offset, line, column, message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Dot,
    At,
    Eq,
    Neq,
    Bang,
    Tilde,
    Wedge,
    Vee,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::At => f.write_str("`@`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Neq => f.write_str("`!=`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Wedge => f.write_str("`/\\`"),
            Tok::Vee => f.write_str("`\\/`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
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
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b';' => Tok::Semi,
            b'.' => Tok::Dot,
            b'@' => Tok::At,
            b'=' => Tok::Eq,
            b'~' => Tok::Tilde,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Bang,
            b'/' if bytes.get(i + 1) == Some(&b'\\') => {
                i += 1;
                Tok::Wedge
            }
            b'\\' if bytes.get(i + 1) == Some(&b'/') => {
                i += 1;
                Tok::Vee
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::at(src, i, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    registry: &'a DependencyRegistry,
    opts: &'a ParseOptions,
}

/// Parses a formula, resolving dependency atoms against `registry`.
pub fn parse_formula(text: &str, registry: &DependencyRegistry) -> Result<Formula, ParseError> {
    parse_formula_with(text, registry, &ParseOptions::default())
}

pub fn parse_formula_with(text: &str, registry: &DependencyRegistry, opts: &ParseOptions) -> Result<Formula, ParseError> {
    let mut p = Parser { src: text, toks: lex(text)?, pos: 0, registry, opts };
    let f = p.global_or()?;
    if p.peek() != &Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> ParseError {
        ParseError::at(self.src, offset, message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error(self.offset(), format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn global_or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.tensor_or()?;
        while self.is_word("lor") {
            self.bump();
            f = Formula::global_or(f, self.tensor_or()?);
        }
        Ok(f)
    }

    fn tensor_or(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Vee {
            self.bump();
            f = Formula::or(f, self.conj()?);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Wedge {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                let inner = self.unary()?;
                if self.opts.tilde0 && !matches!(inner, Formula::Lit(_) | Formula::Dep(_)) {
                    return Err(self.error(start, "`~` may only precede a literal or dependency atom"));
                }
                Ok(Formula::tilde(inner))
            }
            Tok::Bang => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(w) if w == "atom" || KEYWORD_DEPENDENCIES.contains(&w.as_str()) => {
                        Ok(Formula::Dep(self.dep_atom(start)?.complement()))
                    }
                    Tok::Ident(w) if !is_keyword(&w) => match self.relation_atom()? {
                        Formula::Lit(l) => Ok(Formula::Lit(l.negated())),
                        _ => unreachable!("relation_atom builds literals"),
                    },
                    _ => Err(self.unexpected("a relation or dependency atom after `!`")),
                }
            }
            Tok::Neq if *self.peek_at(1) == Tok::LParen => {
                // `!=(xs;ys)`: complemented dependence atom
                self.toks[self.pos].0 = Tok::Eq;
                Ok(Formula::Dep(self.dep_atom(start)?.complement()))
            }
            Tok::Ident(w) if w == "dia" => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Ident(w) if w == "exists" || w == "forall" => {
                self.bump();
                let binders = self.binders()?;
                let body = self.global_or()?;
                Ok(if w == "exists" { Formula::exists(binders, body) } else { Formula::forall(binders, body) })
            }
            _ => self.primary(),
        }
    }

    /// `R(..)` (no space before the parenthesis), `x = ..` or `x != ..`
    /// ends a binder list; `exists y (..)` binds `y`.
    fn starts_atom(&self, w: &str) -> bool {
        match self.peek_at(1) {
            Tok::Eq | Tok::Neq => true,
            Tok::LParen => self.toks[(self.pos + 1).min(self.toks.len() - 1)].1 == self.offset() + w.len(),
            _ => false,
        }
    }

    fn binders(&mut self) -> Result<Vec<Var>, ParseError> {
        let mut out: Vec<Var> = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Dot => {
                    self.bump();
                    break;
                }
                Tok::Ident(w)
                    if !is_keyword(&w)
                        && !self.opts.constants.contains(&w)
                        && !self.starts_atom(&w) =>
                {
                    let at = self.offset();
                    self.bump();
                    let v = Var::new(&w);
                    if out.contains(&v) {
                        return Err(self.error(at, format!("variable `{w}` bound twice by one quantifier")));
                    }
                    out.push(v);
                }
                _ => break,
            }
        }
        if out.is_empty() && !matches!(self.toks[self.pos - 1].0, Tok::Dot) {
            return Err(self.unexpected("a variable to bind"));
        }
        Ok(out)
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let start = self.offset();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.global_or()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Eq => Ok(Formula::Dep(self.dep_atom(start)?)),
            Tok::Ident(w) if w == "top" => {
                self.bump();
                Ok(Formula::top())
            }
            Tok::Ident(w) if w == "bot" => {
                self.bump();
                Ok(Formula::bot())
            }
            Tok::Ident(w) if w == "atom" || KEYWORD_DEPENDENCIES.contains(&w.as_str()) => {
                Ok(Formula::Dep(self.dep_atom(start)?))
            }
            Tok::Ident(w) if is_keyword(&w) => Err(self.unexpected("a formula")),
            Tok::Ident(_) if *self.peek_at(1) == Tok::LParen => self.relation_atom(),
            Tok::Ident(_) => {
                let a = self.term()?;
                let positive = match self.bump() {
                    Tok::Eq => true,
                    Tok::Neq => false,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("`=` or `!=`"));
                    }
                };
                let b = self.term()?;
                Ok(Formula::lit(positive, Atom::Eq(a, b)))
            }
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                Ok(if self.opts.constants.contains(&w) { Term::Const(w) } else { Term::Var(Var::new(&w)) })
            }
            _ => Err(self.unexpected("a variable or constant")),
        }
    }

    fn relation_atom(&mut self) -> Result<Formula, ParseError> {
        let name = match self.bump() {
            Tok::Ident(w) => w,
            _ => unreachable!("caller checked for an identifier"),
        };
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(Formula::Lit(Literal { positive: true, atom: Atom::Rel { name, args } }))
    }

    /// `=(..)`, `KEYWORD(..)` or `atom NAME(..)`, with optional `@P` suffix.
    fn dep_atom(&mut self, start: usize) -> Result<DepAtom, ParseError> {
        let name = match self.bump() {
            Tok::Eq => "dep".to_string(),
            Tok::Ident(w) if w == "atom" => match self.bump() {
                Tok::Ident(n) if !is_keyword(&n) || KEYWORD_DEPENDENCIES.contains(&n.as_str()) => n,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("a dependency name after `atom`"));
                }
            },
            Tok::Ident(w) => w,
            _ => unreachable!("caller checked the atom head"),
        };
        self.expect(Tok::LParen)?;
        let mut split = Vec::new();
        let mut args = Vec::new();
        let mut group = 0;
        loop {
            match self.peek().clone() {
                Tok::RParen => {
                    self.bump();
                    split.push(group);
                    break;
                }
                Tok::Semi => {
                    self.bump();
                    split.push(group);
                    group = 0;
                }
                Tok::Ident(w) if !is_keyword(&w) => {
                    if self.opts.constants.contains(&w) {
                        return Err(self.error(self.offset(), format!("dependency atoms take variables only, `{w}` is a constant")));
                    }
                    self.bump();
                    args.push(Var::new(&w));
                    group += 1;
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                            if !matches!(self.peek(), Tok::Ident(_)) {
                                return Err(self.unexpected("a variable"));
                            }
                        }
                        Tok::Semi | Tok::RParen => {}
                        _ => return Err(self.unexpected("`,`, `;` or `)`")),
                    }
                }
                _ => return Err(self.unexpected("a variable, `;` or `)`")),
            }
        }
        let mut atom = DepAtom::new(&name, split, args);
        if *self.peek() == Tok::At {
            self.bump();
            match self.bump() {
                Tok::Ident(p) if !is_keyword(&p) => atom.relativized = Some(p),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("a unary predicate after `@`"));
                }
            }
        }
        self.registry.check_atom(&atom).map_err(|msg| self.error(start, msg))?;
        Ok(atom)
    }
}
