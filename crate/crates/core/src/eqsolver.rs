//! The solving function `f`: isolate one parameter of an equation, or NaN.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::engine::{algebraically_equal_with, ari_normalize_with, AriOptions};
use crate::poly::{Atom, Monomial, Poly};
use crate::term::{Equation, Number, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Solved(Term),
    NaN,
}

impl SolveResult {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            SolveResult::Solved(t) => Some(t),
            SolveResult::NaN => None,
        }
    }
}

impl fmt::Display for SolveResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveResult::Solved(t) => write!(f, "{t}"),
            SolveResult::NaN => f.write_str("NaN"),
        }
    }
}

/// `a ≈ b` on solver results; NaN equals nothing, itself included.
pub fn results_equal(a: &SolveResult, b: &SolveResult, opts: &AriOptions) -> bool {
    match (a, b) {
        (SolveResult::Solved(x), SolveResult::Solved(y)) => algebraically_equal_with(x, y, opts),
        _ => false,
    }
}

fn atom_mentions(a: &Atom, target: &str) -> bool {
    match a {
        Atom::Param(p) => p == target,
        Atom::Var(_) => false,
        Atom::Opaque(t) => t.params().contains(target),
    }
}

fn mentions(p: &Poly, target: &str) -> bool {
    p.terms().any(|(m, _)| m.keys().any(|a| atom_mentions(a, target)))
}

/// Multiplies by every atom that appears with a negative exponent.
fn clear_denominators(p: &Poly) -> Option<Poly> {
    let mut factor = Monomial::new();
    for (m, _) in p.terms() {
        for (a, e) in m {
            if e.is_negative() {
                let cur = factor.entry(a.clone()).or_insert_with(Number::zero);
                if -e > *cur {
                    *cur = -e;
                }
            }
        }
    }
    if factor.is_empty() {
        return Some(p.clone());
    }
    p.mul(&Poly::monomial(factor, Number::one())).ok()
}

/// Removes one square-root atom that mentions the target by isolating it and
/// squaring: `A + C·√B = 0` becomes `A² − C²·B = 0`.
fn clear_radical(p: &Poly, target: &str) -> Option<Poly> {
    let half = Number::new(1.into(), 2.into());
    let mut radical: Option<Atom> = None;
    for (m, _) in p.terms() {
        for (a, e) in m {
            if e.is_integer() || !atom_mentions(a, target) {
                continue;
            }
            if *e != half || radical.as_ref().is_some_and(|r| r != a) {
                return None;
            }
            radical = Some(a.clone());
        }
    }
    let Some(r) = radical else { return Some(p.clone()) };
    let (mut a, mut c) = (Poly::zero(), Poly::zero());
    for (m, k) in p.terms() {
        let mut rest = m.clone();
        if rest.remove(&r).is_some() {
            c = c.add(&Poly::monomial(rest, k.clone()));
        } else {
            a = a.add(&Poly::monomial(rest, k.clone()));
        }
    }
    let base = Poly::from_term(&r.to_term()).ok()?;
    let lhs = a.mul(&a).ok()?;
    let rhs = c.mul(&c).ok()?.mul(&base).ok()?;
    clear_denominators(&lhs.sub(&rhs))
}

/// Coefficients of `target^k`, or `None` if the target occurs in any other
/// shape.
fn coefficients(p: &Poly, target: &str) -> Option<Vec<Poly>> {
    let mut out: Vec<Poly> = Vec::new();
    let t = Atom::Param(target.to_string());
    for (m, c) in p.terms() {
        let mut rest = m.clone();
        let k = rest.remove(&t).unwrap_or_else(Number::zero);
        if !k.is_integer() || k.is_negative() || rest.keys().any(|a| atom_mentions(a, target)) {
            return None;
        }
        let k: usize = k.to_integer().try_into().ok()?;
        if out.len() <= k {
            out.resize(k + 1, Poly::zero());
        }
        out[k] = out[k].add(&Poly::monomial(rest, c.clone()));
    }
    Some(out)
}

/// Scales so the leading monomial of the leading coefficient is 1, making the
/// answer independent of a constant factor on the equation.
fn make_monic(coeffs: &mut [Poly]) {
    let Some(lead) = coeffs.last() else { return };
    let Some((_, k)) = lead.terms().last() else { return };
    let inv = Number::one() / k;
    for c in coeffs.iter_mut() {
        *c = c.scale(&inv);
    }
}

fn solve_poly(eq: &Equation, target: &str) -> Option<Term> {
    let diff = Term::sub(crate::engine::desugar(&eq.lhs), crate::engine::desugar(&eq.rhs));
    let p = Poly::from_term(&diff).ok()?;
    if !mentions(&p, target) {
        return None;
    }
    let p = clear_denominators(&p)?;
    let p = clear_radical(&p, target)?;
    let mut coeffs = coefficients(&p, target)?;
    while coeffs.last().is_some_and(Poly::is_zero) {
        coeffs.pop();
    }
    make_monic(&mut coeffs);
    let neg_ratio = |num: &Poly, den: &Poly| Term::mul(num.neg().to_term(), Term::pow(den.to_term(), Term::num(-1)));
    match coeffs.as_slice() {
        [c0, c1] => Some(neg_ratio(c0, c1)),
        [c0, c1, c2] if c1.is_zero() => Some(Term::pow(neg_ratio(c0, c2), Term::Num(Number::new(1.into(), 2.into())))),
        _ => None,
    }
}

/// Solves `eq` for `target`. Linear and pure quadratic shapes are handled,
/// after clearing denominators and one square root; the positive root is
/// taken. Everything else is NaN.
pub fn solve_for(eq: &Equation, target: &str, opts: &AriOptions) -> SolveResult {
    solve_for_counted(eq, target, opts).0
}

/// [`solve_for`] plus the number of rewrite steps spent normalizing.
pub fn solve_for_counted(eq: &Equation, target: &str, opts: &AriOptions) -> (SolveResult, usize) {
    let target = crate::parse::normalize_ident(target);
    match solve_poly(eq, &target).map(|t| ari_normalize_with(&t, opts)) {
        Some(Ok(out)) => {
            let steps = out.step_count();
            if out.term.params().contains(&target) {
                (SolveResult::NaN, steps)
            } else {
                (SolveResult::Solved(out.term), steps)
            }
        }
        _ => (SolveResult::NaN, 0),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::eval::{approx_eq, eval_numeric};
    use crate::parse::parse_equation;

    fn solve(s: &str, target: &str) -> SolveResult {
        solve_for(&parse_equation(s).unwrap(), target, &AriOptions::default())
    }

    /// Substitutes the solution back and checks the equation numerically.
    fn check_root(eq: &str, target: &str, seed: u64) {
        use rand::{Rng, SeedableRng};
        let eq = parse_equation(eq).unwrap();
        let target = &crate::parse::normalize_ident(target);
        let sol = solve_for(&eq, target, &AriOptions::default());
        let SolveResult::Solved(e) = sol else { panic!("NaN for {eq:?}") };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut params: BTreeMap<String, f64> = BTreeMap::new();
        for _ in 0..200 {
            for p in eq.lhs.params().into_iter().chain(eq.rhs.params()) {
                params.insert(p, rng.gen_range(0.1..3.0));
            }
            params.remove(target);
            let Ok(x) = eval_numeric(&e, &params) else { continue };
            params.insert(target.clone(), x);
            let (l, r) = (eval_numeric(&eq.lhs, &params).unwrap(), eval_numeric(&eq.rhs, &params).unwrap());
            assert!(approx_eq(l, r, 1e-9), "{l} vs {r}");
        }
    }

    #[test]
    fn linear_momentum() {
        check_root("m1*v0 = m1*v1*cos(theta) + m2*v2*cos(phi)", "v0", 1);
    }

    #[test]
    fn quadratic_energy() {
        check_root("m1*v0^2/2 = m1*v1^2/2 + m2*v2^2/2", "v0", 2);
        check_root("m1*v0^2 = m1*v1^2 + m2*v2^2", "v0", 3);
    }

    #[test]
    fn radical_and_denominator() {
        check_root("v1 = sqrt(v0^2 - v2^2)", "v0", 4);
        check_root("1/(v0 + m1) = m2", "v0", 5);
    }

    #[test]
    fn absent_or_unsupported() {
        assert_eq!(solve("m1*v1*sin(theta) = m2*v2*sin(phi)", "v0"), SolveResult::NaN);
        assert_eq!(solve("v0^3 = m1", "v0"), SolveResult::NaN);
        assert_eq!(solve("sin(v0) = m1", "v0"), SolveResult::NaN);
        assert_eq!(solve("v0^2 + v0 = m1", "v0"), SolveResult::NaN);
    }

    #[test]
    fn scale_invariant() {
        let a = solve("m1*v0^2/2 = m1*v1^2/2 + m2*v2^2/2", "v0");
        let b = solve("m1*v0^2 = m1*v1^2 + m2*v2^2", "v0");
        let c = solve("(m1 + m2)*v0 = m1*v1", "v0");
        let d = solve("3*(m1 + m2)*v0 = 3*m1*v1", "v0");
        let opts = AriOptions::default();
        assert!(results_equal(&a, &b, &opts), "{a} vs {b}");
        assert!(results_equal(&c, &d, &opts), "{c} vs {d}");
        assert!(!results_equal(&SolveResult::NaN, &SolveResult::NaN, &opts));
    }
}
