//! Printers. [`print_exact`] uses minimal parentheses and parses back to the
//! same tree; the `Display` form flattens `+` and `*` chains for reading.

use std::fmt;

use num_traits::Signed;

use crate::number::format_number;
use crate::term::{Equation, Number, Sym, Term};

const ADD: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;
const ATOM: u8 = 4;

fn level(t: &Term) -> u8 {
    match t {
        Term::App(Sym::Add | Sym::Sub, _) => ADD,
        Term::App(Sym::Mul | Sym::Div, _) => MUL,
        Term::App(Sym::Pow, _) => POW,
        Term::Num(n) if !n.is_integer() && format_number(n).contains('/') => MUL,
        _ => ATOM,
    }
}

fn number(n: &Number) -> String {
    format_number(n)
}

/// Round-trippable rendering.
pub fn print_exact(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, false, &mut out);
    out
}

/// Reading-oriented rendering, also used by `Display`.
pub fn print_pretty(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, true, &mut out);
    out
}

fn write_at(t: &Term, min: u8, pretty: bool, out: &mut String) {
    if level(t) < min {
        out.push('(');
        write_term(t, pretty, out);
        out.push(')');
    } else {
        write_term(t, pretty, out);
    }
}

fn flatten<'a>(t: &'a Term, sym: Sym, acc: &mut Vec<&'a Term>) {
    match t {
        Term::App(s, args) if *s == sym => {
            flatten(&args[0], sym, acc);
            flatten(&args[1], sym, acc);
        }
        _ => acc.push(t),
    }
}

fn write_term(t: &Term, pretty: bool, out: &mut String) {
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::Param(p) => out.push_str(p),
        Term::Num(n) => out.push_str(&number(n)),
        Term::Quote(inner) => {
            out.push('[');
            write_term(inner, pretty, out);
            out.push(']');
        }
        Term::App(sym @ (Sym::Add | Sym::Mul), args) if pretty => {
            let mut items = Vec::new();
            flatten(t, *sym, &mut items);
            let (sep, min) = if *sym == Sym::Add { (" + ", MUL) } else { ("*", POW) };
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                // A chain element of the same level is a `-` or `/` node.
                let min = if i == 0 { min - 1 } else { min };
                write_at(item, min, pretty, out);
            }
        }
        Term::App(sym, args) if sym.is_infix() => {
            let (lv, op) = match sym {
                Sym::Add => (ADD, " + "),
                Sym::Sub => (ADD, " - "),
                Sym::Mul => (MUL, "*"),
                Sym::Div => (MUL, "/"),
                _ => (POW, "^"),
            };
            let (lmin, rmin) = if lv == POW { (lv + 1, lv) } else { (lv, lv + 1) };
            write_at(&args[0], lmin, pretty, out);
            out.push_str(op);
            write_at(&args[1], rmin, pretty, out);
        }
        Term::App(Sym::Neg, args) => {
            out.push('-');
            let a = &args[0];
            // `-3` would re-parse as a literal, so a positive literal is bracketed.
            let needs = level(a) < ATOM || matches!(a, Term::Num(n) if !n.is_negative());
            if needs {
                out.push('(');
                write_term(a, pretty, out);
                out.push(')');
            } else {
                write_term(a, pretty, out);
            }
        }
        Term::App(sym, args) => {
            out.push_str(sym.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(a, pretty, out);
            }
            out.push(')');
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_pretty(self))
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}
