//! The built-in simplifier `simp` and its extension `t↓simp` into quotes.

use crate::error::Result;
use crate::poly::Poly;
use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonResult {
    pub term: Term,
    pub is_number: bool,
}

/// Evaluates ground arithmetic exactly; non-ground terms get the polynomial
/// normal form. Ground `sin`/`cos` only evaluate at zero.
pub fn simp(t: &Term) -> Result<Term> {
    let p = Poly::from_term(t)?;
    Ok(match p.as_constant() {
        Some(c) => Term::Num(c),
        None => p.to_term(),
    })
}

pub fn simp_result(t: &Term) -> Result<CanonResult> {
    let term = simp(t)?;
    let is_number = matches!(term, Term::Num(_));
    Ok(CanonResult { term, is_number })
}

/// Applies [`simp`] inside every quote, leaving everything else untouched.
pub fn deep_simp(t: &Term) -> Result<Term> {
    Ok(match t {
        Term::Quote(inner) => Term::quote(simp(inner)?),
        Term::App(s, args) => Term::App(*s, args.iter().map(deep_simp).collect::<Result<_>>()?),
        _ => t.clone(),
    })
}
