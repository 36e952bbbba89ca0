//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Monomials are products of atoms raised to rational exponents. Atoms are
//! variables, parameters, or opaque terms (trig applications, symbolic powers,
//! inverses of sums) whose arguments are already in normal form.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::number::pow_exact;
use crate::term::{int, Number, Sym, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Param(String),
    Opaque(Term),
}

impl Atom {
    pub fn to_term(&self) -> Term {
        match self {
            Atom::Var(v) => Term::Var(v.clone()),
            Atom::Param(p) => Term::Param(p.clone()),
            Atom::Opaque(t) => t.clone(),
        }
    }

    /// An opaque atom standing for a sum that could not be expanded.
    fn is_sum(&self) -> bool {
        matches!(self, Atom::Opaque(Term::App(Sym::Add, _)))
    }
}

pub type Monomial = BTreeMap<Atom, Number>;

/// Largest integer power of a multi-term polynomial that is expanded.
const MAX_EXPANSION: i64 = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Monomial, Number>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Number) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn one() -> Self {
        Poly::constant(Number::one())
    }

    pub fn atom(a: Atom) -> Self {
        let mut m = Monomial::new();
        m.insert(a, Number::one());
        let mut p = Poly::zero();
        p.add_term(m, Number::one());
        p
    }

    pub fn monomial(m: Monomial, c: Number) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Number)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Number> {
        match self.terms.len() {
            0 => Some(Number::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Number) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Number::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&int(-1))
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Number) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.terms {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (a, e) in m2 {
                    let entry = m.entry(a.clone()).or_insert_with(Number::zero);
                    *entry += e;
                }
                m.retain(|_, e| !e.is_zero());
                out.add_term(m, c1 * c2);
            }
        }
        out.settle()
    }

    /// Expands opaque sums that reached a non-negative integer exponent.
    fn settle(self) -> Result<Poly> {
        let needs = self
            .terms
            .keys()
            .any(|m| m.iter().any(|(a, e)| a.is_sum() && e.is_integer() && !e.is_negative()));
        if !needs {
            return Ok(self);
        }
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            let mut acc = Poly::constant(c);
            for (a, e) in m {
                let factor = if a.is_sum() && e.is_integer() && !e.is_negative() {
                    Poly::from_term(&a.to_term())?.pow_int(e.to_integer().to_i64().unwrap_or(i64::MAX))?
                } else {
                    let mut single = Monomial::new();
                    single.insert(a, e);
                    let mut p = Poly::zero();
                    p.add_term(single, Number::one());
                    p
                };
                acc = acc.mul(&factor)?;
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    fn pow_int(&self, n: i64) -> Result<Poly> {
        if n == 0 {
            return Ok(Poly::one());
        }
        if let Some(c) = self.as_constant() {
            return pow_const(&c, &int(n)).map(Poly::constant);
        }
        if self.terms.len() == 1 {
            return self.pow_monomial(&int(n));
        }
        if n < 0 {
            return Ok(self.opaque_power(&int(n)));
        }
        if n > MAX_EXPANSION {
            return Err(Error::NonEvaluable(format!("power {n} too large to expand")));
        }
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    fn pow_monomial(&self, e: &Number) -> Result<Poly> {
        let (m, c) = self.terms.iter().next().expect("single monomial");
        let c = match pow_exact(c, e) {
            Ok(Some(c)) => c,
            Ok(None) => return Ok(self.opaque_power(e)),
            Err(msg) if m.is_empty() => return Err(Error::Domain(msg)),
            Err(_) => return Ok(self.opaque_power(e)),
        };
        let m: Monomial = m.iter().map(|(a, k)| (a.clone(), k * e)).filter(|(_, k)| !k.is_zero()).collect();
        let mut out = Poly::zero();
        out.add_term(m, c);
        out.settle()
    }

    fn opaque_power(&self, e: &Number) -> Poly {
        let mut m = Monomial::new();
        m.insert(Atom::Opaque(self.to_term()), e.clone());
        let mut out = Poly::zero();
        out.add_term(m, Number::one());
        out
    }

    /// `self ^ exp` for an exponent polynomial.
    pub fn pow(&self, exp: &Poly) -> Result<Poly> {
        match exp.as_constant() {
            Some(e) if e.is_zero() => Ok(Poly::one()),
            Some(e) if e.is_integer() => match e.to_integer().to_i64() {
                Some(n) => self.pow_int(n),
                None => Err(Error::NonEvaluable("exponent too large".into())),
            },
            Some(e) => {
                if let Some(c) = self.as_constant() {
                    Ok(Poly::constant(pow_const(&c, &e)?))
                } else if self.terms.len() == 1 {
                    self.pow_monomial(&e)
                } else {
                    Ok(self.opaque_power(&e))
                }
            }
            None => {
                if self.as_constant().is_some_and(|c| c.is_one()) {
                    return Ok(Poly::one());
                }
                Ok(Poly::atom(Atom::Opaque(Term::pow(self.to_term(), exp.to_term()))))
            }
        }
    }

    /// Canonical term: non-constant monomials in monomial order, constant last,
    /// sums and products nested to the right.
    pub fn to_term(&self) -> Term {
        let mut items: Vec<Term> = Vec::new();
        let mut constant = None;
        for (m, c) in &self.terms {
            if m.is_empty() {
                constant = Some(Term::Num(c.clone()));
            } else {
                items.push(monomial_term(m, c));
            }
        }
        items.extend(constant);
        fold_right(items, Sym::Add).unwrap_or_else(|| Term::Num(Number::zero()))
    }

    /// Converts a term, treating unknown structure as atoms.
    pub fn from_term(t: &Term) -> Result<Poly> {
        to_poly(t)
    }
}

fn pow_const(c: &Number, e: &Number) -> Result<Number> {
    match pow_exact(c, e).map_err(Error::Domain)? {
        Some(v) => Ok(v),
        None => Err(Error::NonEvaluable(format!("{c}^{e} is not rational"))),
    }
}

fn fold_right(mut items: Vec<Term>, sym: Sym) -> Option<Term> {
    let mut acc = items.pop()?;
    while let Some(t) = items.pop() {
        acc = Term::App(sym, vec![t, acc]);
    }
    Some(acc)
}

fn monomial_term(m: &Monomial, c: &Number) -> Term {
    let mut factors: Vec<Term> = Vec::new();
    if !c.is_one() {
        factors.push(Term::Num(c.clone()));
    }
    for (a, e) in m {
        let base = a.to_term();
        factors.push(if e.is_one() { base } else { Term::pow(base, Term::Num(e.clone())) });
    }
    fold_right(factors, Sym::Mul).expect("non-empty monomial")
}

fn trig_const(sym: Sym, arg: &Number) -> Result<Number> {
    if arg.is_zero() {
        return Ok(if sym == Sym::Sin { Number::zero() } else { Number::one() });
    }
    Err(Error::NonEvaluable(format!("{}({arg})", sym.name())))
}

fn to_poly(t: &Term) -> Result<Poly> {
    Ok(match t {
        Term::Num(n) => Poly::constant(n.clone()),
        Term::Var(v) => Poly::atom(Atom::Var(v.clone())),
        Term::Param(p) => Poly::atom(Atom::Param(p.clone())),
        Term::Quote(_) => Poly::atom(Atom::Opaque(t.clone())),
        Term::App(sym, args) => match sym {
            Sym::Add => to_poly(&args[0])?.add(&to_poly(&args[1])?),
            Sym::Sub => to_poly(&args[0])?.sub(&to_poly(&args[1])?),
            Sym::Neg => to_poly(&args[0])?.neg(),
            Sym::Mul => to_poly(&args[0])?.mul(&to_poly(&args[1])?)?,
            Sym::Div => {
                let d = to_poly(&args[1])?;
                if d.is_zero() {
                    return Err(Error::Domain("division by zero".into()));
                }
                to_poly(&args[0])?.mul(&d.pow_int(-1)?)?
            }
            Sym::Pow => to_poly(&args[0])?.pow(&to_poly(&args[1])?)?,
            Sym::Sqrt => to_poly(&args[0])?.pow(&Poly::constant(crate::term::ratio(1, 2)))?,
            Sym::Sin | Sym::Cos => {
                let a = to_poly(&args[0])?;
                match a.as_constant() {
                    Some(c) => Poly::constant(trig_const(*sym, &c)?),
                    None => Poly::atom(Atom::Opaque(Term::App(*sym, vec![a.to_term()]))),
                }
            }
            _ => {
                let args = args.iter().map(|a| Ok(to_poly(a)?.to_term())).collect::<Result<Vec<_>>>()?;
                Poly::atom(Atom::Opaque(Term::App(*sym, args)))
            }
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_expr_with, ParseOptions};
    use crate::term::{ratio, VarKind};

    fn poly(s: &str) -> Poly {
        let opts = ParseOptions::default()
            .declare("x", VarKind::Foreground)
            .declare("y", VarKind::Foreground);
        Poly::from_term(&parse_expr_with(s, &opts).unwrap()).unwrap()
    }

    #[test]
    fn collects_like_terms() {
        assert_eq!(poly("x+1+x"), poly("2*x+1"));
        assert_eq!(poly("(x+y)^2"), poly("x^2 + 2*x*y + y^2"));
        assert_eq!(poly("x*x^-1"), Poly::one());
    }

    #[test]
    fn ground_values() {
        assert_eq!(poly("2^10 - 1/4").as_constant(), Some(ratio(4095, 4)));
        assert_eq!(poly("sin(0) + cos(0)").as_constant(), Some(int(1)));
        assert!(matches!(Poly::from_term(&Term::sin(Term::num(2))), Err(Error::NonEvaluable(_))));
        assert!(matches!(
            Poly::from_term(&Term::div(Term::num(1), Term::num(0))),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn to_term_roundtrip() {
        for s in ["x+1+x", "(x+y)^3", "x/(y+1)", "sin(x)*cos(y)^2 - 3", "2^x*x^(1/2)", "(x+1)^(1/2)"] {
            let p = poly(s);
            assert_eq!(Poly::from_term(&p.to_term()).unwrap(), p, "{s}");
        }
    }

    #[test]
    fn opaque_sums_expand_when_integral() {
        assert_eq!(poly("(x+1)^(1/2)*(x+1)^(1/2)"), poly("x+1"));
    }
}
