//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula := imp
//! imp     := or ("=>" imp)?
//! or      := and ("|" and)*
//! and     := lit ("&" lit)*
//! lit     := "!" lit | "(" formula ")" | atom
//! atom    := set "|" number set
//! set     := "{" (ident ("," ident)*)? "}"
//! ```
//!
//! A `|` immediately followed by a digit or `.` opens a budget; any other `|`
//! is disjunction. So `{a} |3 {b}` is an atom and `{a} | {b}` is rejected.

use super::attrs::is_ident_char;
use super::{Atom, AttrSet, AttributeUniverse, Formula};
use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBrace,
    RBrace,
    Comma,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Ident(String),
    Budget(Budget),
}

fn describe(t: Option<&(usize, Tok)>) -> String {
    match t {
        None => "end of input".to_string(),
        Some((_, tok)) => match tok {
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Budget(b) => format!("budget `|{b}`"),
        },
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' | '}' | ',' | '(' | ')' | '!' | '&' => {
                toks.push((
                    pos,
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        ',' => Tok::Comma,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '!' => Tok::Not,
                        _ => Tok::And,
                    },
                ));
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1).map(|&(_, c)| c) == Some('>') {
                    toks.push((pos, Tok::Implies));
                    i += 2;
                } else {
                    return Err(Error::syntax(pos, "expected `=>`"));
                }
            }
            '|' => {
                let next = bytes.get(i + 1).map(|&(_, c)| c);
                match next {
                    Some(d) if d.is_ascii_digit() || d == '.' || d == '-' => {
                        let start = i + 1;
                        let mut j = start + 1;
                        while j < bytes.len() && (bytes[j].1.is_ascii_digit() || matches!(bytes[j].1, '.' | '/')) {
                            j += 1;
                        }
                        let end = bytes.get(j).map(|&(p, _)| p).unwrap_or(text.len());
                        let lit = &text[bytes[start].0..end];
                        let budget = Budget::parse(lit).map_err(|e| match e {
                            Error::NegativeBudget(_) => e,
                            _ => Error::syntax(bytes[start].0, format!("invalid budget `{lit}`")),
                        })?;
                        toks.push((pos, Tok::Budget(budget)));
                        i = j;
                    }
                    _ => {
                        toks.push((pos, Tok::Or));
                        i += 1;
                    }
                }
            }
            c if is_ident_char(c) => {
                let mut j = i;
                while j < bytes.len() && is_ident_char(bytes[j].1) {
                    j += 1;
                }
                let end = bytes.get(j).map(|&(p, _)| p).unwrap_or(text.len());
                toks.push((pos, Tok::Ident(text[pos..end].to_string())));
                i = j;
            }
            other => return Err(Error::syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    universe: &'a AttributeUniverse,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(Error::syntax(
                self.pos(),
                format!("expected {what}, found {}", describe(self.toks.get(self.at))),
            ))
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut acc = self.conjunction()?;
        while self.eat(&Tok::Or) {
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut acc = self.literal()?;
        while self.eat(&Tok::And) {
            let rhs = self.literal()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn literal(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Formula::not(self.literal()?))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::LBrace) => self.atom().map(Formula::Atom),
            _ => Err(Error::syntax(
                self.pos(),
                format!(
                    "expected `!`, `(` or an attribute set, found {}",
                    describe(self.toks.get(self.at))
                ),
            )),
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let lhs = self.set()?;
        let budget = match self.toks.get(self.at) {
            Some((_, Tok::Budget(b))) => b.clone(),
            other => {
                return Err(Error::syntax(
                    self.pos(),
                    format!(
                        "missing budget: expected `|<number>` directly after the set, found {}",
                        describe(other)
                    ),
                ))
            }
        };
        self.at += 1;
        let rhs = self.set()?;
        Ok(Atom::new(lhs, rhs, budget))
    }

    fn set(&mut self) -> Result<AttrSet> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut s = self.universe.empty_set();
        if self.eat(&Tok::RBrace) {
            return Ok(s);
        }
        loop {
            match self.toks.get(self.at) {
                Some((_, Tok::Ident(name))) => {
                    let i = self
                        .universe
                        .position(name)
                        .ok_or_else(|| Error::UnknownAttribute(name.clone()))?;
                    s.insert(i);
                    self.at += 1;
                }
                other => {
                    return Err(Error::syntax(
                        self.pos(),
                        format!("expected attribute name, found {}", describe(other)),
                    ))
                }
            }
            if self.eat(&Tok::RBrace) {
                return Ok(s);
            }
            self.expect(Tok::Comma, "`,` or `}`")?;
        }
    }
}

/// Parses formula text over a declared universe.
pub fn parse_formula(text: &str, universe: &AttributeUniverse) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
        universe,
    };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return Err(Error::syntax(
            p.pos(),
            format!("unexpected {}", describe(p.toks.get(p.at))),
        ));
    }
    Ok(f)
}
