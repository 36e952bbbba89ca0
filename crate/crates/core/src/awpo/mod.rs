//! The ARI weighted path ordering.

mod compare;
pub mod dominance;
pub mod weight;

use std::collections::BTreeMap;

pub use compare::{compare, gt, CompareResult, Evidence, Order};
pub use dominance::{dominance_obligation, prove_dominance, Dominance};
pub use weight::{weight_of, weight_with, WeightExpr, WeightScheme};

use crate::term::{Sym, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    LeftToRight,
    RightToLeft,
}

/// What a confluence case says about a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuoteCase {
    IsQuote,
    NotQuote,
    Unknown,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrderingContext {
    /// Variables treated as constants, in decreasing precedence.
    pub x: Vec<Var>,
    pub quote_case: BTreeMap<Var, QuoteCase>,
    pub status: BTreeMap<Sym, Status>,
    /// Quoted numbers compare by value.
    pub ground_total: bool,
    pub scheme: WeightScheme,
}

impl OrderingContext {
    pub fn with_x(x: Vec<Var>) -> Self {
        OrderingContext { x, ..Default::default() }
    }

    /// Ordering used by the Canon system.
    pub fn canon() -> Self {
        OrderingContext { ground_total: true, ..Default::default() }
    }

    /// Ordering used by the Simp system: products compare right to left.
    pub fn simp() -> Self {
        let mut ctx = Self::canon();
        ctx.status.insert(Sym::Mul, Status::RightToLeft);
        ctx
    }

    pub fn ground_total(mut self, on: bool) -> Self {
        self.ground_total = on;
        self
    }

    pub fn status_of(&self, sym: Sym) -> Status {
        self.status.get(&sym).copied().unwrap_or(Status::LeftToRight)
    }

    pub fn quote_case_of(&self, v: &Var) -> QuoteCase {
        self.quote_case.get(v).copied().unwrap_or(QuoteCase::Unknown)
    }
}
