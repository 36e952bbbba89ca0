use std::cell::RefCell;
use std::collections::HashMap;

use crate::term::{Sym, Term, Var};

use super::dominance::{prove_dominance, Dominance};
use super::weight::{weight_with, WeightExpr};
use super::{OrderingContext, QuoteCase, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    GT,
    LT,
    EQ,
    Incomparable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Evidence {
    ByWeightStrict,
    ByWeightEqThenLPO,
    Syntactic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompareResult {
    pub order: Order,
    pub evidence: Option<Evidence>,
}

/// A term as seen by the ordering. The inside of a quote is an atomic
/// constant, as is a bare number.
#[derive(Clone, Copy, Debug, PartialEq)]
enum View<'a> {
    Const(&'a Term),
    Quote(&'a Term),
    App(Sym, &'a [Term]),
    Param(&'a str),
    Var(&'a Var),
}

fn view(t: &Term) -> View<'_> {
    match t {
        Term::Num(_) => View::Const(t),
        Term::Quote(inner) => View::Quote(inner),
        Term::App(s, args) => View::App(*s, args),
        Term::Param(p) => View::Param(p),
        Term::Var(v) => View::Var(v),
    }
}

fn sym_rank(s: Sym) -> u8 {
    match s {
        Sym::SinN => 20,
        Sym::CosN => 19,
        Sym::PwrN => 18,
        Sym::Sin => 17,
        Sym::Cos => 16,
        Sym::Pow => 15,
        Sym::Mul => 14,
        Sym::Add => 13,
        Sym::Normalize => 12,
        Sym::ToSucc => 11,
        Sym::Div => 10,
        Sym::Sub => 9,
        Sym::Neg => 8,
        Sym::Sqrt => 7,
        Sym::Succ => 6,
    }
}

struct Cmp<'c> {
    ctx: &'c OrderingContext,
    dom: RefCell<HashMap<(WeightExpr, WeightExpr, bool), Dominance>>,
}

impl<'c> Cmp<'c> {
    fn weight(&self, v: View<'_>) -> WeightExpr {
        match v {
            View::Const(_) | View::Quote(_) | View::Param(_) => WeightExpr::c(1),
            View::Var(x) => WeightExpr::Var(x.clone()),
            View::App(s, args) => weight_with(&Term::App(s, args.to_vec()), self.ctx.scheme),
        }
    }

    fn dominates(&self, a: &WeightExpr, b: &WeightExpr, strict: bool) -> bool {
        let key = (a.clone(), b.clone(), strict);
        if let Some(d) = self.dom.borrow().get(&key) {
            return *d == Dominance::Proved;
        }
        let d = prove_dominance(a, b, strict, self.ctx);
        self.dom.borrow_mut().insert(key, d);
        d == Dominance::Proved
    }

    fn x_index(&self, v: &Var) -> Option<usize> {
        self.ctx.x.iter().position(|x| x == v)
    }

    /// Strict precedence between the heads of two views.
    fn head_gt(&self, s: View<'_>, t: View<'_>) -> bool {
        use View::*;
        let not_quote = |v: &crate::term::Var| self.ctx.quote_case_of(v) == QuoteCase::NotQuote;
        match (s, t) {
            (App(f, _), App(g, _)) => sym_rank(f) > sym_rank(g),
            (App(..), Param(_) | Quote(_) | Const(_)) => true,
            (Param(p), Param(q)) => p > q,
            (Param(_), Quote(_) | Const(_)) => true,
            (Quote(_), Const(_)) => true,
            (Const(a), Const(b)) => match (a, b) {
                (Term::Num(x), Term::Num(y)) => self.ctx.ground_total && x > y,
                // Quoted background variables ranked by a confluence case.
                (Term::Var(x), Term::Var(y)) => {
                    matches!((self.x_index(x), self.x_index(y)), (Some(i), Some(j)) if i < j)
                }
                _ => false,
            },
            (Var(x), Var(y)) => matches!((self.x_index(x), self.x_index(y)), (Some(i), Some(j)) if i < j),
            (Var(x), Quote(_) | Const(_)) => not_quote(x),
            _ => false,
        }
    }

    fn same_head(&self, s: View<'_>, t: View<'_>) -> bool {
        match (s, t) {
            (View::App(f, a), View::App(g, b)) => f == g && a.len() == b.len(),
            (View::Quote(_), View::Quote(_)) => true,
            _ => false,
        }
    }

    fn args<'a>(&self, v: View<'a>) -> Vec<View<'a>> {
        match v {
            View::App(s, args) => {
                let mut out: Vec<View<'a>> = args.iter().map(view).collect();
                if self.ctx.status_of(s) == Status::RightToLeft {
                    out.reverse();
                }
                out
            }
            View::Quote(inner) => vec![View::Const(inner)],
            _ => Vec::new(),
        }
    }

    fn eq(&self, s: View<'_>, t: View<'_>) -> bool {
        s == t
    }

    fn ge(&self, s: View<'_>, t: View<'_>) -> bool {
        self.eq(s, t) || self.gt(s, t).is_some()
    }

    fn gt(&self, s: View<'_>, t: View<'_>) -> Option<Evidence> {
        if self.eq(s, t) {
            return None;
        }
        // Plain variables are never greater than anything; X-variables and
        // annotated ones act as constants.
        if let View::Var(x) = s {
            let constant = self.x_index(x).is_some() || self.ctx.quote_case_of(x) == QuoteCase::NotQuote;
            if !constant {
                return None;
            }
        }
        let (ws, wt) = (self.weight(s), self.weight(t));
        if self.dominates(&ws, &wt, true) {
            return Some(Evidence::ByWeightStrict);
        }
        if !self.dominates(&ws, &wt, false) {
            return None;
        }
        let s_args = self.args(s);
        if s_args.iter().any(|si| self.ge(*si, t)) {
            return Some(Evidence::ByWeightEqThenLPO);
        }
        let t_args = self.args(t);
        let dominates_args = || t_args.iter().all(|tj| self.gt(s, *tj).is_some());
        if self.head_gt(s, t) && dominates_args() {
            return Some(Evidence::ByWeightEqThenLPO);
        }
        if self.same_head(s, t) && dominates_args() {
            for (a, b) in s_args.iter().zip(&t_args) {
                if !self.eq(*a, *b) {
                    return self.gt(*a, *b).map(|_| Evidence::ByWeightEqThenLPO);
                }
            }
        }
        None
    }
}

/// `s ≻ t` under `ctx`, with the deciding evidence.
pub fn gt(s: &Term, t: &Term, ctx: &OrderingContext) -> Option<Evidence> {
    let cmp = Cmp { ctx, dom: RefCell::new(HashMap::new()) };
    cmp.gt(view(s), view(t))
}

pub fn compare(s: &Term, t: &Term, ctx: &OrderingContext) -> CompareResult {
    if s == t {
        return CompareResult { order: Order::EQ, evidence: Some(Evidence::Syntactic) };
    }
    let cmp = Cmp { ctx, dom: RefCell::new(HashMap::new()) };
    if let Some(e) = cmp.gt(view(s), view(t)) {
        return CompareResult { order: Order::GT, evidence: Some(e) };
    }
    if let Some(e) = cmp.gt(view(t), view(s)) {
        return CompareResult { order: Order::LT, evidence: Some(e) };
    }
    CompareResult { order: Order::Incomparable, evidence: None }
}
