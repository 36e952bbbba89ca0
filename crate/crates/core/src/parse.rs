//! Recursive-descent parser for expressions, equations and rule-file terms.
//!
//! ```text
//! expr     := term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := atom ("^" factor)?
//! atom     := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")" | "-" atom
//!           | "[" expr "]"                      (quotes; rule files only)
//! equation := "Eq(" expr "," expr ")" | expr "=" expr
//! ```
//!
//! `**` is accepted as a synonym of `^`. Identifiers outside the function table
//! become parameters unless declared as variables.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::number::parse_decimal;
use crate::term::{Equation, Sym, Term, Var, VarKind};

#[derive(Clone, Debug, Default)]
pub struct ParseOptions {
    pub vars: HashMap<String, VarKind>,
    pub allow_quotes: bool,
}

impl ParseOptions {
    pub fn rule_file(vars: HashMap<String, VarKind>) -> Self {
        ParseOptions { vars, allow_quotes: true }
    }

    pub fn declare(mut self, name: &str, kind: VarKind) -> Self {
        self.vars.insert(normalize_ident(name), kind);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Gt,
}

/// `m1` becomes `m_1`; greek letters are spelled out.
pub fn normalize_ident(raw: &str) -> String {
    let letters: String = raw.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let rest = &raw[letters.len()..];
    if !letters.is_empty() && !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
        format!("{letters}_{rest}")
    } else {
        raw.to_string()
    }
}

fn greek(c: char) -> Option<&'static str> {
    Some(match c {
        'θ' => "theta",
        'φ' | 'ϕ' => "phi",
        'π' => "pi",
        'α' => "alpha",
        'β' => "beta",
        _ => return None,
    })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '0'..='9' | '.' => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Num(s), i));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else if let Some(g) = greek(d) {
                        s.push_str(g);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), i));
            }
            c if greek(c).is_some() => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if let Some(g) = greek(d) {
                        s.push_str(g);
                    } else if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                    } else {
                        break;
                    }
                    it.next();
                }
                out.push((Tok::Ident(s), i));
            }
            _ => {
                it.next();
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' | '−' => Tok::Minus,
                    '*' | '×' | '·' => {
                        if matches!(it.peek(), Some(&(_, '*'))) {
                            it.next();
                            Tok::Caret
                        } else {
                            Tok::Star
                        }
                    }
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' | '⟦' => Tok::LBracket,
                    ']' | '⟧' => Tok::RBracket,
                    ',' => Tok::Comma,
                    '=' => Tok::Eq,
                    '>' | '≻' => Tok::Gt,
                    other => {
                        return Err(Error::Syntax {
                            offset: i,
                            message: format!("unexpected character `{other}`"),
                        })
                    }
                };
                out.push((tok, i));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    opts: &'a ParseOptions,
}

impl<'a> Parser<'a> {
    fn new(src: &str, opts: &'a ParseOptions) -> Result<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, end: src.len(), opts })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), message: message.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expr(&mut self) -> Result<Term> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Term::add(lhs, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Term::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Term::mul(lhs, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Term::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Term> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Term::pow(base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Term> {
        let start = self.offset();
        match self.bump() {
            Some(Tok::Num(s)) => match parse_decimal(&s) {
                Some(n) => Ok(Term::Num(n)),
                None => Err(Error::Syntax { offset: start, message: format!("bad number `{s}`") }),
            },
            Some(Tok::Minus) => {
                if let Some(Tok::Num(s)) = self.peek().cloned() {
                    self.pos += 1;
                    return match parse_decimal(&s) {
                        Some(n) => Ok(Term::Num(-n)),
                        None => {
                            Err(Error::Syntax { offset: start, message: format!("bad number `{s}`") })
                        }
                    };
                }
                Ok(Term::neg(self.atom()?))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::LBracket) if self.opts.allow_quotes => {
                let e = self.expr()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Term::quote(e))
            }
            Some(Tok::Ident(raw)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let Some(sym) = Sym::from_call_name(&raw) else {
                        return Err(Error::Syntax {
                            offset: start,
                            message: format!("unknown function `{raw}`"),
                        });
                    };
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != sym.arity() {
                        return Err(Error::Arity {
                            offset: start,
                            symbol: raw,
                            expected: sym.arity(),
                            found: args.len(),
                        });
                    }
                    return Ok(Term::App(sym, args));
                }
                let name = normalize_ident(&raw);
                Ok(match self.opts.vars.get(&name) {
                    Some(kind) => Term::Var(Var { name, kind: *kind }),
                    None => Term::Param(name),
                })
            }
            Some(_) => Err(Error::Syntax { offset: start, message: "unexpected token".into() }),
            None => Err(Error::Syntax { offset: start, message: "unexpected end of input".into() }),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Term> {
    parse_expr_with(text, &ParseOptions::default())
}

pub fn parse_expr_with(text: &str, opts: &ParseOptions) -> Result<Term> {
    let mut p = Parser::new(text, opts)?;
    let t = p.expr()?;
    if !p.at_end() {
        return p.err("trailing input");
    }
    Ok(t)
}

pub fn parse_equation(text: &str) -> Result<Equation> {
    parse_equation_with(text, &ParseOptions::default())
}

pub fn parse_equation_with(text: &str, opts: &ParseOptions) -> Result<Equation> {
    let mut p = Parser::new(text, opts)?;
    if let (Some(Tok::Ident(id)), Some(Tok::LParen)) =
        (p.toks.first().map(|t| &t.0), p.toks.get(1).map(|t| &t.0))
    {
        if id == "Eq" {
            p.pos = 2;
            let lhs = p.expr()?;
            p.expect(Tok::Comma, "`,`")?;
            let rhs = p.expr()?;
            p.expect(Tok::RParen, "`)`")?;
            if !p.at_end() {
                return p.err("trailing input");
            }
            return Ok(Equation::new(lhs, rhs));
        }
    }
    let lhs = p.expr()?;
    p.expect(Tok::Eq, "`=`")?;
    let rhs = p.expr()?;
    if !p.at_end() {
        return p.err("trailing input");
    }
    Ok(Equation::new(lhs, rhs))
}

/// Splits `lhs -> rhs` at the first arrow.
pub(crate) fn split_arrow(text: &str) -> Option<(&str, &str)> {
    text.split_once("->").or_else(|| text.split_once('→'))
}
