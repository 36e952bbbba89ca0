//! Symbolic weights over natural numbers.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::term::{Sym, Term, Var};

/// Which weight to give `pwr_n`. The printed `(2^w(n)+1)^w(x)` leaves the
/// unfolding rule `pwr_n(x,s(n)) -> x*pwr_n(x,n)` unoriented at `x = 1`, so
/// the default doubles the inner exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum WeightScheme {
    Printed,
    #[default]
    Adjusted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightExpr {
    Var(Var),
    Const(BigUint),
    Add(Box<WeightExpr>, Box<WeightExpr>),
    Mul(Box<WeightExpr>, Box<WeightExpr>),
    Pow(Box<WeightExpr>, Box<WeightExpr>),
}

impl WeightExpr {
    pub fn c(n: u64) -> Self {
        WeightExpr::Const(BigUint::from(n))
    }

    pub fn add(a: WeightExpr, b: WeightExpr) -> Self {
        WeightExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: WeightExpr, b: WeightExpr) -> Self {
        WeightExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: WeightExpr, b: WeightExpr) -> Self {
        WeightExpr::Pow(Box::new(a), Box::new(b))
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        fn go(e: &WeightExpr, out: &mut Vec<Var>) {
            match e {
                WeightExpr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                WeightExpr::Const(_) => {}
                WeightExpr::Add(a, b) | WeightExpr::Mul(a, b) | WeightExpr::Pow(a, b) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        go(self, &mut out);
        out
    }

    /// Exact value under `env`; `None` when a variable is unbound or the
    /// value exceeds [`MAX_WEIGHT_BITS`].
    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<BigUint>) -> Option<BigUint> {
        let v = match self {
            WeightExpr::Var(v) => env(v)?,
            WeightExpr::Const(c) => c.clone(),
            WeightExpr::Add(a, b) => a.eval(env)? + b.eval(env)?,
            WeightExpr::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            WeightExpr::Pow(a, b) => big_pow(&a.eval(env)?, &b.eval(env)?)?,
        };
        (v.bits() <= MAX_WEIGHT_BITS).then_some(v)
    }

    pub fn eval_ground(&self) -> Option<BigUint> {
        self.eval(&|_| None)
    }

    /// SMT-LIB2 rendering over `Int`.
    pub fn to_smtlib(&self) -> String {
        match self {
            WeightExpr::Var(v) => smt_name(v),
            WeightExpr::Const(c) => c.to_string(),
            WeightExpr::Add(a, b) => format!("(+ {} {})", a.to_smtlib(), b.to_smtlib()),
            WeightExpr::Mul(a, b) => format!("(* {} {})", a.to_smtlib(), b.to_smtlib()),
            WeightExpr::Pow(a, b) => format!("(^ {} {})", a.to_smtlib(), b.to_smtlib()),
        }
    }
}

pub(crate) fn smt_name(v: &Var) -> String {
    format!("w_{}", v.name)
}

/// Ground weights above this many bits are treated as unknown.
pub const MAX_WEIGHT_BITS: u64 = 1 << 22;

fn big_pow(base: &BigUint, exp: &BigUint) -> Option<BigUint> {
    if base.is_one() || exp.bits() == 0 {
        return Some(BigUint::one());
    }
    if base.bits() == 0 {
        return Some(BigUint::default());
    }
    let e = exp.to_u64()?;
    if (base.bits() - 1).saturating_mul(e) > MAX_WEIGHT_BITS {
        return None;
    }
    Some(base.pow(e as u32))
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Var(v) => write!(f, "{}", v.name),
            WeightExpr::Const(c) => write!(f, "{c}"),
            WeightExpr::Add(a, b) => write!(f, "({a} + {b})"),
            WeightExpr::Mul(a, b) => write!(f, "{a}*{b}"),
            WeightExpr::Pow(a, b) => write!(f, "({a})^({b})"),
        }
    }
}

pub fn weight_of(t: &Term) -> WeightExpr {
    weight_with(t, WeightScheme::default())
}

pub fn weight_with(t: &Term, scheme: WeightScheme) -> WeightExpr {
    use WeightExpr as W;
    let w = |u: &Term| weight_with(u, scheme);
    match t {
        Term::Var(v) => W::Var(v.clone()),
        Term::Param(_) | Term::Num(_) | Term::Quote(_) => W::c(1),
        Term::App(sym, args) => match sym {
            Sym::Add => W::add(W::c(1), W::add(w(&args[0]), w(&args[1]))),
            Sym::Mul => W::mul(W::c(2), W::mul(w(&args[0]), w(&args[1]))),
            Sym::Pow => {
                let x = w(&args[0]);
                W::mul(W::mul(x.clone(), x), W::mul(W::c(2), w(&args[1])))
            }
            Sym::Sin | Sym::Cos => W::pow(W::c(2), W::mul(w(&args[0]), W::c(3))),
            Sym::SinN | Sym::CosN => {
                let inner = W::add(W::mul(W::c(2), W::pow(W::c(2), W::mul(w(&args[1]), W::c(3)))), W::c(1));
                W::pow(inner, W::mul(W::c(2), w(&args[0])))
            }
            Sym::PwrN => {
                let n = w(&args[1]);
                let n = match scheme {
                    WeightScheme::Printed => n,
                    WeightScheme::Adjusted => W::mul(W::c(2), n),
                };
                W::pow(W::add(W::pow(W::c(2), n), W::c(1)), w(&args[0]))
            }
            Sym::Succ => W::add(w(&args[0]), W::c(1)),
            Sym::Div | Sym::Sub => W::add(W::c(1), W::add(w(&args[0]), w(&args[1]))),
            Sym::Neg | Sym::Sqrt | Sym::ToSucc | Sym::Normalize => W::add(w(&args[0]), W::c(1)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(t: &Term) -> u64 {
        weight_of(t).eval_ground().unwrap().to_u64().unwrap()
    }

    #[test]
    fn leaves() {
        assert_eq!(ground(&Term::param("p")), 1);
        assert_eq!(ground(&Term::quote(Term::add(Term::bg("a"), Term::bg("b")))), 1);
        assert_eq!(ground(&Term::sin(Term::param("p"))), 8);
    }

    #[test]
    fn quoted_sum() {
        let t = Term::add(Term::quote(Term::bg("a")), Term::quote(Term::bg("b")));
        let w = weight_of(&t);
        assert_eq!(w, WeightExpr::add(WeightExpr::c(1), WeightExpr::add(WeightExpr::c(1), WeightExpr::c(1))));
        let x = Term::add(Term::fg("a"), Term::fg("b"));
        assert_eq!(weight_of(&x).to_string(), "(1 + (a + b))");
    }

    #[test]
    fn pwr_n_schemes() {
        let t = Term::app(Sym::PwrN, vec![Term::param("p"), Term::app(Sym::Succ, vec![Term::qnum(0)])]);
        assert_eq!(weight_with(&t, WeightScheme::Printed).eval_ground().unwrap().to_u64(), Some(5));
        assert_eq!(ground(&t), 17);
    }

    #[test]
    fn overflow_is_none() {
        let mut t = Term::param("p");
        for _ in 0..4 {
            t = Term::sin(t);
        }
        assert!(weight_of(&t).eval_ground().is_none());
    }
}
