//! Proving `∀ vars ≥ 1 (and x ≥ y along X): a > b` (or `a ≥ b`).
//!
//! Variables are shifted so every unknown is non-negative: the last chain
//! variable becomes `1 + d`, each earlier one the next plus its own `d`.
//! Powers of two with linear exponents become products of atoms `2^d`; other
//! symbolic powers become opaque atoms. Atoms are at least one, so each is
//! replaced by `1 + a'`. If the resulting polynomial for `a - b` has no
//! negative coefficient (and a positive constant when strict), the claim holds.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::poly::{Atom, Poly};
use crate::term::{int, Number, Term, Var};

use super::weight::{smt_name, WeightExpr};
use super::OrderingContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dominance {
    Proved,
    Disproved,
    Unknown,
}

/// Largest exponent expanded symbolically.
const MAX_POWER: i64 = 64;

struct Shift {
    subst: BTreeMap<Var, Poly>,
    /// Variables in hypothesis order with their `d` names, used for sampling.
    chain: Vec<Var>,
    free: Vec<Var>,
}

fn d_atom(v: &Var) -> Atom {
    let kind = match v.kind {
        crate::term::VarKind::Foreground => "f",
        crate::term::VarKind::Background => "b",
    };
    Atom::Var(Var::fg(format!("d{kind}_{}", v.name)))
}

fn shift_for(vars: &[Var], ctx: &OrderingContext) -> Shift {
    let chain: Vec<Var> = ctx.x.iter().filter(|v| vars.contains(v)).cloned().collect();
    let free: Vec<Var> = vars.iter().filter(|v| !chain.contains(v)).cloned().collect();
    let mut subst = BTreeMap::new();
    let mut below = Poly::one();
    for v in chain.iter().rev() {
        let p = below.add(&Poly::atom(d_atom(v)));
        subst.insert(v.clone(), p.clone());
        below = p;
    }
    for v in &free {
        subst.insert(v.clone(), Poly::one().add(&Poly::atom(d_atom(v))));
    }
    Shift { subst, chain, free }
}

fn pow2_atom(d: &Atom) -> Atom {
    Atom::Opaque(Term::pow(Term::num(2), d.to_term()))
}

fn to_gpoly(e: &WeightExpr, shift: &Shift) -> Option<Poly> {
    Some(match e {
        WeightExpr::Var(v) => shift.subst.get(v)?.clone(),
        WeightExpr::Const(c) => Poly::constant(Number::from_integer(c.clone().into())),
        WeightExpr::Add(a, b) => to_gpoly(a, shift)?.add(&to_gpoly(b, shift)?),
        WeightExpr::Mul(a, b) => to_gpoly(a, shift)?.mul(&to_gpoly(b, shift)?).ok()?,
        WeightExpr::Pow(a, b) => {
            let base = to_gpoly(a, shift)?;
            let exp = to_gpoly(b, shift)?;
            power(&base, &exp)?
        }
    })
}

/// Splits a polynomial into its constant part and the rest.
fn split_constant(p: &Poly) -> Option<(Number, Poly)> {
    let mut k = Number::zero();
    let mut rest = Poly::zero();
    for (m, c) in p.terms() {
        if m.is_empty() {
            k = c.clone();
        } else {
            rest = rest.add(&monomial(m, c)?);
        }
    }
    Some((k, rest))
}

fn monomial(m: &crate::poly::Monomial, c: &Number) -> Option<Poly> {
    let mut p = Poly::constant(c.clone());
    for (a, e) in m {
        p = p.mul(&Poly::atom(a.clone()).pow(&Poly::constant(e.clone())).ok()?).ok()?;
    }
    Some(p)
}

fn small_nat(n: &Number) -> Option<i64> {
    (n.is_integer() && !n.is_negative()).then(|| n.to_integer().to_i64()).flatten()
}

fn power(base: &Poly, exp: &Poly) -> Option<Poly> {
    let (k, rest) = split_constant(exp)?;
    let k = small_nat(&k)?;
    let base_const = base.as_constant();
    if rest.is_zero() {
        if k > MAX_POWER && base_const.is_none() {
            return None;
        }
        if let Some(c) = &base_const {
            let bits = c.to_integer().bits() as i64;
            if bits.saturating_mul(k) > 1 << 16 {
                return None;
            }
        }
        return base.pow(&Poly::constant(int(k))).ok();
    }
    let head = if k > MAX_POWER { return None } else { base.pow(&Poly::constant(int(k))).ok()? };
    if base_const == Some(int(2)) {
        // 2^(c1*d1 + ... + R) = (2^d1)^c1 * ... * 2^R
        let mut out = head;
        let mut nonlinear = Poly::zero();
        for (m, c) in rest.terms() {
            let linear = m.len() == 1
                && m.iter().all(|(a, e)| matches!(a, Atom::Var(_)) && e.is_one())
                && small_nat(c).is_some();
            if linear {
                let (a, _) = m.iter().next().expect("one atom");
                let f = Poly::atom(pow2_atom(a)).pow(&Poly::constant(c.clone())).ok()?;
                out = out.mul(&f).ok()?;
            } else {
                nonlinear = nonlinear.add(&monomial(m, c)?);
            }
        }
        if !nonlinear.is_zero() {
            out = out.mul(&Poly::atom(Atom::Opaque(Term::pow(Term::num(2), nonlinear.to_term())))).ok()?;
        }
        return Some(out);
    }
    let atom = Poly::atom(Atom::Opaque(Term::pow(base.to_term(), rest.to_term())));
    head.mul(&atom).ok()
}

/// Replaces every atom `a ≥ 1` by `1 + a'`.
fn shift_atoms(p: &Poly) -> Option<Poly> {
    let mut names: BTreeMap<Atom, Atom> = BTreeMap::new();
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut acc = Poly::constant(c.clone());
        for (a, e) in m {
            let e = small_nat(e)?;
            let factor = match a {
                Atom::Var(_) => Poly::atom(a.clone()),
                _ => {
                    let n = names.len();
                    let fresh = names.entry(a.clone()).or_insert_with(|| Atom::Var(Var::fg(format!("a'{n}")))).clone();
                    Poly::one().add(&Poly::atom(fresh))
                }
            };
            acc = acc.mul(&factor.pow(&Poly::constant(int(e))).ok()?).ok()?;
        }
        out = out.add(&acc);
    }
    Some(out)
}

fn nonneg_certificate(diff: &Poly, strict: bool) -> bool {
    let mut constant = Number::zero();
    for (m, c) in diff.terms() {
        if m.is_empty() {
            constant = c.clone();
        } else if c.is_negative() {
            return false;
        }
    }
    if strict {
        constant.is_positive()
    } else {
        !constant.is_negative()
    }
}

/// Sample points respecting the hypotheses, as `d` values per variable.
fn samples(n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0; n], vec![1; n], vec![3; n]];
    for i in 0..n {
        let mut p = vec![0; n];
        p[i] = 2;
        out.push(p);
    }
    out
}

fn find_counterexample(a: &WeightExpr, b: &WeightExpr, strict: bool, shift: &Shift) -> bool {
    let order: Vec<&Var> = shift.chain.iter().chain(shift.free.iter()).collect();
    for point in samples(order.len()) {
        let mut env: BTreeMap<Var, BigUint> = BTreeMap::new();
        let mut below = BigUint::one();
        for (i, v) in shift.chain.iter().enumerate().rev() {
            below += BigUint::from(point[i]);
            env.insert(v.clone(), below.clone());
        }
        for (j, v) in shift.free.iter().enumerate() {
            env.insert(v.clone(), BigUint::one() + BigUint::from(point[shift.chain.len() + j]));
        }
        let lookup = |v: &Var| env.get(v).cloned();
        if let (Some(x), Some(y)) = (a.eval(&lookup), b.eval(&lookup)) {
            if (strict && x <= y) || (!strict && x < y) {
                return true;
            }
        }
    }
    false
}

/// Bounds on log2 of a ground weight too large to evaluate exactly. Every
/// operation widens the interval by a relative 1e-12, far above f64 error.
fn log2_bounds(e: &WeightExpr) -> Option<(f64, f64)> {
    const SLACK: f64 = 1e-12;
    let widen = |lo: f64, hi: f64| -> Option<(f64, f64)> {
        let (lo, hi) = (lo - SLACK * (1.0 + lo.abs()), hi + SLACK * (1.0 + hi.abs()));
        (lo.is_finite() && hi.is_finite()).then_some((lo, hi))
    };
    match e {
        WeightExpr::Var(_) => None,
        WeightExpr::Const(c) => {
            if c.bits() == 0 {
                return None;
            }
            let l = c.to_f64()?.log2();
            widen(l, l)
        }
        WeightExpr::Add(a, b) => {
            let ((alo, ahi), (blo, bhi)) = (log2_bounds(a)?, log2_bounds(b)?);
            let sum = |x: f64, y: f64| x.max(y) + (1.0 + (x.min(y) - x.max(y)).exp2()).log2();
            widen(sum(alo, blo), sum(ahi, bhi))
        }
        WeightExpr::Mul(a, b) => {
            let ((alo, ahi), (blo, bhi)) = (log2_bounds(a)?, log2_bounds(b)?);
            widen(alo + blo, ahi + bhi)
        }
        WeightExpr::Pow(base, exp) => {
            let ((blo, bhi), (elo, ehi)) = (log2_bounds(base)?, log2_bounds(exp)?);
            // Weights are at least 1, so log2 of the base is nonnegative.
            let (blo, bhi) = (blo.max(0.0), bhi.max(0.0));
            widen(elo.exp2() * blo, ehi.exp2() * bhi)
        }
    }
}

/// Replaces each power whose value is known by a variable standing for that
/// value. Weights are monotone in their arguments on values at least 1, so a
/// claim proved for all values of the variables, ordered as the values are,
/// holds for the ground weights.
fn abstract_powers(e: &WeightExpr, table: &mut Vec<(BigUint, Var)>) -> WeightExpr {
    match e {
        WeightExpr::Pow(..) => match e.eval_ground() {
            Some(v) => {
                let var = match table.iter().find(|(x, _)| *x == v) {
                    Some((_, var)) => var.clone(),
                    None => {
                        let var = Var::fg(format!("w_{}", table.len()));
                        table.push((v, var.clone()));
                        var
                    }
                };
                WeightExpr::Var(var)
            }
            None => {
                let WeightExpr::Pow(b, x) = e else { unreachable!() };
                WeightExpr::pow(abstract_powers(b, table), abstract_powers(x, table))
            }
        },
        WeightExpr::Add(a, b) => WeightExpr::add(abstract_powers(a, table), abstract_powers(b, table)),
        WeightExpr::Mul(a, b) => WeightExpr::mul(abstract_powers(a, table), abstract_powers(b, table)),
        _ => e.clone(),
    }
}

/// Ground weights too large to evaluate. Only `Proved` is reported, since a
/// counterexample over the abstraction says nothing about the ground values.
fn prove_ground_abstracted(a: &WeightExpr, b: &WeightExpr, strict: bool, ctx: &OrderingContext) -> Dominance {
    let mut table = Vec::new();
    let (a, b) = (abstract_powers(a, &mut table), abstract_powers(b, &mut table));
    if table.is_empty() {
        return Dominance::Unknown;
    }
    table.sort_by(|x, y| y.0.cmp(&x.0));
    let chain = OrderingContext { x: table.into_iter().map(|(_, v)| v).collect(), ..ctx.clone() };
    let vars = chain.x.clone();
    let shift = shift_for(&vars, &chain);
    let certified = (|| {
        let diff = to_gpoly(&a, &shift)?.sub(&to_gpoly(&b, &shift)?);
        Some(nonneg_certificate(&shift_atoms(&diff)?, strict))
    })();
    if certified == Some(true) {
        Dominance::Proved
    } else {
        Dominance::Unknown
    }
}

/// Internal heuristic. Sound for `Proved` and `Disproved`; `Unknown` otherwise.
pub fn prove_dominance(a: &WeightExpr, b: &WeightExpr, strict: bool, ctx: &OrderingContext) -> Dominance {
    let mut vars = a.vars();
    for v in b.vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    if vars.is_empty() {
        let ground = match (a.eval_ground(), b.eval_ground()) {
            (Some(x), Some(y)) if (strict && x > y) || (!strict && x >= y) => Dominance::Proved,
            (Some(_), Some(_)) => Dominance::Disproved,
            _ if a == b => if strict { Dominance::Disproved } else { Dominance::Proved },
            _ => match (log2_bounds(a), log2_bounds(b)) {
                (Some((alo, _)), Some((_, bhi))) if alo > bhi => Dominance::Proved,
                (Some((_, ahi)), Some((blo, _))) if ahi < blo => Dominance::Disproved,
                _ => Dominance::Unknown,
            },
        };
        if ground != Dominance::Unknown {
            return ground;
        }
        return prove_ground_abstracted(a, b, strict, ctx);
    }
    let shift = shift_for(&vars, ctx);
    let certified = (|| {
        let diff = to_gpoly(a, &shift)?.sub(&to_gpoly(b, &shift)?);
        Some(nonneg_certificate(&shift_atoms(&diff)?, strict))
    })();
    if certified == Some(true) {
        return Dominance::Proved;
    }
    if find_counterexample(a, b, strict, &shift) {
        return Dominance::Disproved;
    }
    Dominance::Unknown
}

/// SMT-LIB2 obligation whose unsatisfiability proves the dominance claim.
pub fn dominance_obligation(a: &WeightExpr, b: &WeightExpr, strict: bool, ctx: &OrderingContext) -> String {
    let mut vars = a.vars();
    for v in b.vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let mut s = String::from("(set-logic NIA)\n");
    for v in &vars {
        s.push_str(&format!("(declare-const {} Int)\n", smt_name(v)));
    }
    for v in &vars {
        s.push_str(&format!("(assert (>= {} 1))\n", smt_name(v)));
    }
    let chain: Vec<&Var> = ctx.x.iter().filter(|v| vars.contains(v)).collect();
    for pair in chain.windows(2) {
        s.push_str(&format!("(assert (>= {} {}))\n", smt_name(pair[0]), smt_name(pair[1])));
    }
    let rel = if strict { ">" } else { ">=" };
    s.push_str(&format!("(assert (not ({rel} {} {})))\n", a.to_smtlib(), b.to_smtlib()));
    s.push_str("(check-sat)\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::awpo::weight::weight_of;
    use crate::term::Term;

    fn x() -> WeightExpr {
        WeightExpr::Var(Var::fg("x"))
    }
    fn y() -> WeightExpr {
        WeightExpr::Var(Var::fg("y"))
    }

    #[test]
    fn sum_dominates_one() {
        let ctx = OrderingContext::default();
        let a = WeightExpr::add(WeightExpr::c(1), WeightExpr::add(x(), y()));
        assert_eq!(prove_dominance(&a, &WeightExpr::c(1), true, &ctx), Dominance::Proved);
    }

    #[test]
    fn reflexive() {
        let ctx = OrderingContext::default();
        assert_eq!(prove_dominance(&x(), &x(), true, &ctx), Dominance::Disproved);
        assert_eq!(prove_dominance(&x(), &x(), false, &ctx), Dominance::Proved);
    }

    #[test]
    fn chain_hypothesis() {
        let unordered = OrderingContext::default();
        assert_eq!(prove_dominance(&x(), &y(), false, &unordered), Dominance::Disproved);
        let ordered = OrderingContext::with_x(vec![Var::fg("x"), Var::fg("y")]);
        assert_eq!(prove_dominance(&x(), &y(), false, &ordered), Dominance::Proved);
    }

    #[test]
    fn angle_addition_weights() {
        let x1 = Term::fg("x1");
        let x2 = Term::fg("x2");
        let l = Term::sin(Term::add(x1.clone(), x2.clone()));
        let r = Term::add(
            Term::mul(Term::sin(x1.clone()), Term::cos(x2.clone())),
            Term::mul(Term::cos(x1), Term::sin(x2)),
        );
        let ctx = OrderingContext::default();
        assert_eq!(prove_dominance(&weight_of(&l), &weight_of(&r), true, &ctx), Dominance::Proved);
    }

    #[test]
    fn obligation_text() {
        let ctx = OrderingContext::with_x(vec![Var::fg("x"), Var::fg("y")]);
        let s = dominance_obligation(&x(), &y(), true, &ctx);
        assert!(s.contains("(assert (>= w_x w_y))"));
        assert!(s.contains("(assert (not (> w_x w_y)))"));
        assert!(s.ends_with("(check-sat)\n"));
    }

    #[test]
    fn ground_weights_beyond_exact_range() {
        let c = WeightExpr::c;
        let huge = WeightExpr::pow(c(2), WeightExpr::mul(c(3), WeightExpr::pow(c(2), c(24))));
        assert!(huge.eval_ground().is_none());
        let twice = WeightExpr::mul(c(2), huge.clone());
        let plus_one = WeightExpr::add(c(1), huge.clone());
        let ctx = OrderingContext::default();
        assert_eq!(prove_dominance(&twice, &huge, true, &ctx), Dominance::Proved);
        assert_eq!(prove_dominance(&huge, &twice, false, &ctx), Dominance::Disproved);
        assert_eq!(prove_dominance(&huge, &huge, false, &ctx), Dominance::Proved);
        // Too close for floating-point bounds; settled by abstracting 2^24.
        assert_eq!(prove_dominance(&plus_one, &huge, true, &ctx), Dominance::Proved);
    }

    #[test]
    fn ground_towers_by_abstraction() {
        let w = |t: &str| crate::awpo::weight_of(&crate::parse::parse_expr(t).unwrap());
        let (s, t) = (w("sin(sin(sin(sin(a))) + sin(sin(a)))"), w("a*sin(sin(sin(a)))"));
        assert!(s.eval_ground().is_none() && log2_bounds(&s).is_none());
        let ctx = OrderingContext::default();
        assert_eq!(prove_dominance(&s, &t, true, &ctx), Dominance::Proved);
        assert_eq!(prove_dominance(&t, &s, false, &ctx), Dominance::Unknown);
    }
}
