//! Terms over the arithmetic signature: variables, parameters, exact numbers,
//! function applications and quoted (built-in arithmetic) subterms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Exact number literal.
pub type Number = BigRational;

pub fn int(n: i64) -> Number {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Number {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Foreground,
    Background,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
}

impl Var {
    pub fn fg(name: impl Into<String>) -> Self {
        Var { name: name.into(), kind: VarKind::Foreground }
    }

    pub fn bg(name: impl Into<String>) -> Self {
        Var { name: name.into(), kind: VarKind::Background }
    }
}

/// The closed set of function symbols. `Quote` is represented by [`Term::Quote`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    Add,
    Mul,
    Pow,
    Div,
    Sub,
    Neg,
    Sin,
    Cos,
    Sqrt,
    SinN,
    CosN,
    PwrN,
    Succ,
    ToSucc,
    Normalize,
}

impl Sym {
    pub fn arity(self) -> usize {
        match self {
            Sym::Add | Sym::Mul | Sym::Pow | Sym::Div | Sym::Sub => 2,
            Sym::SinN | Sym::CosN | Sym::PwrN => 2,
            Sym::Neg | Sym::Sin | Sym::Cos | Sym::Sqrt | Sym::Succ | Sym::ToSucc => 1,
            Sym::Normalize => 1,
        }
    }

    /// Name used for prefix (call-style) notation.
    pub fn name(self) -> &'static str {
        match self {
            Sym::Add => "+",
            Sym::Mul => "*",
            Sym::Pow => "^",
            Sym::Div => "/",
            Sym::Sub => "-",
            Sym::Neg => "uminus",
            Sym::Sin => "sin",
            Sym::Cos => "cos",
            Sym::Sqrt => "sqrt",
            Sym::SinN => "sin_n",
            Sym::CosN => "cos_n",
            Sym::PwrN => "pwr_n",
            Sym::Succ => "s",
            Sym::ToSucc => "to_succ",
            Sym::Normalize => "normalize",
        }
    }

    /// Looks up a call-style function name.
    pub fn from_call_name(name: &str) -> Option<Sym> {
        Some(match name {
            "sin" => Sym::Sin,
            "cos" => Sym::Cos,
            "sqrt" => Sym::Sqrt,
            "sin_n" => Sym::SinN,
            "cos_n" => Sym::CosN,
            "pwr_n" => Sym::PwrN,
            "s" => Sym::Succ,
            "to_succ" => Sym::ToSucc,
            "normalize" | "norm" => Sym::Normalize,
            "uminus" => Sym::Neg,
            _ => return None,
        })
    }

    pub fn is_infix(self) -> bool {
        matches!(self, Sym::Add | Sym::Mul | Sym::Pow | Sym::Div | Sym::Sub)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Param(String),
    Num(Number),
    App(Sym, Vec<Term>),
    Quote(Box<Term>),
}

/// Path of child indices from the root; the root is the empty path.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "]")
    }
}

impl Term {
    pub fn num(n: i64) -> Term {
        Term::Num(int(n))
    }

    pub fn param(name: impl Into<String>) -> Term {
        Term::Param(name.into())
    }

    pub fn fg(name: impl Into<String>) -> Term {
        Term::Var(Var::fg(name))
    }

    pub fn bg(name: impl Into<String>) -> Term {
        Term::Var(Var::bg(name))
    }

    pub fn quote(t: Term) -> Term {
        Term::Quote(Box::new(t))
    }

    pub fn qnum(n: i64) -> Term {
        Term::quote(Term::num(n))
    }

    pub fn app(sym: Sym, args: Vec<Term>) -> Term {
        debug_assert_eq!(sym.arity(), args.len(), "arity of {sym:?}");
        Term::App(sym, args)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::App(Sym::Add, vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::App(Sym::Mul, vec![a, b])
    }

    pub fn pow(a: Term, b: Term) -> Term {
        Term::App(Sym::Pow, vec![a, b])
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::App(Sym::Div, vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::App(Sym::Sub, vec![a, b])
    }

    pub fn neg(a: Term) -> Term {
        Term::App(Sym::Neg, vec![a])
    }

    pub fn sin(a: Term) -> Term {
        Term::App(Sym::Sin, vec![a])
    }

    pub fn cos(a: Term) -> Term {
        Term::App(Sym::Cos, vec![a])
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            Term::Quote(inner) => std::slice::from_ref(inner.as_ref()),
            _ => &[],
        }
    }

    pub fn head(&self) -> Option<Sym> {
        match self {
            Term::App(s, _) => Some(*s),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&Number> {
        match self {
            Term::Num(n) => Some(n),
            _ => None,
        }
    }

    /// Number wrapped in a quote, `[n]`.
    pub fn as_quoted_num(&self) -> Option<&Number> {
        match self {
            Term::Quote(inner) => inner.as_num(),
            _ => None,
        }
    }

    pub fn is_quote(&self) -> bool {
        matches!(self, Term::Quote(_))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term> {
        let mut cur = self;
        for &i in &p.0 {
            cur = cur.args().get(i).ok_or_else(|| Error::InvalidPosition(p.clone()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, u: Term) -> Result<Term> {
        fn go(t: &Term, path: &[usize], u: Term, full: &Position) -> Result<Term> {
            let Some((&i, rest)) = path.split_first() else {
                return Ok(u);
            };
            match t {
                Term::App(s, args) if i < args.len() => {
                    let mut args = args.clone();
                    args[i] = go(&args[i], rest, u, full)?;
                    Ok(Term::App(*s, args))
                }
                Term::Quote(inner) if i == 0 => Ok(Term::quote(go(inner, rest, u, full)?)),
                _ => Err(Error::InvalidPosition(full.clone())),
            }
        }
        go(self, &p.0, u, p)
    }

    /// All positions in pre-order (root first, children left to right).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        fn go(t: &Term, cur: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(cur.clone()));
            for (i, a) in t.args().iter().enumerate() {
                cur.push(i);
                go(a, cur, out);
                cur.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.args().iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variables in order of first occurrence (left to right).
    pub fn vars_ordered(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        fn go(t: &Term, out: &mut Vec<Var>) {
            match t {
                Term::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                _ => t.args().iter().for_each(|a| go(a, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Param(p) => {
                    out.insert(p.clone());
                }
                _ => t.args().iter().for_each(|a| go(a, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            _ => self.args().iter().all(Term::is_ground),
        }
    }

    pub fn contains_param(&self, name: &str) -> bool {
        match self {
            Term::Param(p) => p == name,
            _ => self.args().iter().any(|a| a.contains_param(name)),
        }
    }

    pub fn is_param_free(&self) -> bool {
        match self {
            Term::Param(_) => false,
            _ => self.args().iter().all(Term::is_param_free),
        }
    }

    pub fn is_quote_free(&self) -> bool {
        match self {
            Term::Quote(_) => false,
            _ => self.args().iter().all(Term::is_quote_free),
        }
    }

    /// Quote subterms together with their positions, pre-order.
    pub fn quote_positions(&self) -> Vec<(Position, &Term)> {
        self.positions()
            .into_iter()
            .filter_map(|p| {
                let t = self.subterm_at(&p).ok()?;
                t.is_quote().then_some((p, t))
            })
            .collect()
    }

    /// Rebuilds the term bottom-up with `f` applied at every node.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| a.map_bottom_up(f)).collect()),
            Term::Quote(inner) => Term::quote(inner.map_bottom_up(f)),
            other => other.clone(),
        };
        f(rebuilt)
    }

    pub fn is_zero_num(&self) -> bool {
        self.as_num().is_some_and(Zero::is_zero)
    }

    pub fn is_one_num(&self) -> bool {
        self.as_num().is_some_and(One::is_one)
    }
}

/// A mapping from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn bind(&mut self, v: Var, t: Term) {
        self.bindings.insert(v, t);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| self.apply(a)).collect()),
            Term::Quote(inner) => Term::quote(self.apply(inner)),
            _ => t.clone(),
        }
    }

    /// `self` followed by `other`: `t(self∘other) = (t self) other`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), other.apply(t));
        }
        for (v, t) in &other.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        out.bindings.retain(|v, t| *t != Term::Var(v.clone()));
        out
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution { bindings: iter.into_iter().collect() }
    }
}

pub fn apply_subst(t: &Term, sigma: &Substitution) -> Term {
    sigma.apply(t)
}

/// An equation `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Equation { lhs, rhs }
    }

    pub fn map(&self, mut f: impl FnMut(&Term) -> Term) -> Equation {
        Equation { lhs: f(&self.lhs), rhs: f(&self.rhs) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Term {
        Term::add(Term::param("a"), Term::mul(Term::param("b"), Term::param("c")))
    }

    #[test]
    fn subterm_and_replace() {
        let t = abc();
        assert_eq!(
            t.subterm_at(&Position(vec![1])).unwrap(),
            &Term::mul(Term::param("b"), Term::param("c"))
        );
        let ab = Term::add(Term::param("a"), Term::param("b"));
        assert_eq!(ab.replace_at(&Position::root(), Term::param("c")).unwrap(), Term::param("c"));
        assert!(matches!(t.subterm_at(&Position(vec![0, 0])), Err(Error::InvalidPosition(_))));
        assert!(t.replace_at(&Position(vec![2]), Term::num(1)).is_err());
    }

    #[test]
    fn replace_with_own_subterm_is_identity() {
        let t = Term::sin(Term::add(Term::quote(Term::num(3)), abc()));
        for p in t.positions() {
            let u = t.subterm_at(&p).unwrap().clone();
            assert_eq!(t.replace_at(&p, u).unwrap(), t);
        }
    }

    #[test]
    fn parameters_are_ground() {
        assert!(Term::mul(Term::param("m_1"), Term::param("v_0")).is_ground());
        assert!(!Term::add(Term::fg("x"), Term::num(1)).is_ground());
    }

    #[test]
    fn subst_basics() {
        let x = Var::fg("x");
        let y = Var::fg("y");
        let t = Term::add(Term::Var(x.clone()), Term::Var(y.clone()));
        let s: Substitution =
            [(x.clone(), Term::qnum(1)), (y, Term::qnum(2))].into_iter().collect();
        assert_eq!(s.apply(&t), Term::add(Term::qnum(1), Term::qnum(2)));
        assert_eq!(Substitution::new().apply(&Term::Var(x.clone())), Term::Var(x));

        let a = Var::bg("a");
        let b = Var::bg("b");
        let q = Term::add(Term::quote(Term::Var(a.clone())), Term::quote(Term::Var(b.clone())));
        let s: Substitution = [(a, Term::num(1)), (b, Term::num(2))].into_iter().collect();
        assert_eq!(s.apply(&q), Term::add(Term::qnum(1), Term::qnum(2)));
    }

    #[test]
    fn compose_applies_in_sequence() {
        let x = Var::fg("x");
        let y = Var::fg("y");
        let s1: Substitution = [(x.clone(), Term::Var(y.clone()))].into_iter().collect();
        let s2: Substitution = [(y.clone(), Term::param("p"))].into_iter().collect();
        let t = Term::add(Term::Var(x), Term::Var(y));
        assert_eq!(s1.compose(&s2).apply(&t), s2.apply(&s1.apply(&t)));
    }
}
