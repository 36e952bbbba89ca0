//! Syntactic matching and most-general unification.

use crate::term::{Substitution, Term, Var};

/// Finds `σ` with `pattern σ == subject`. Quote nodes are ordinary unary
/// constructors, so `[a]` binds `a` to the quoted inner term.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    match_into(pattern, subject, &mut sigma).then_some(sigma)
}

/// Extends `sigma` in place; on failure `sigma` may hold partial bindings.
pub fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match sigma.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.bind(v.clone(), subject.clone());
                true
            }
        },
        (Term::Param(a), Term::Param(b)) => a == b,
        (Term::Num(a), Term::Num(b)) => a == b,
        (Term::Quote(p), Term::Quote(s)) => match_into(p, s, sigma),
        (Term::App(f, ps), Term::App(g, ss)) => {
            f == g && ps.len() == ss.len() && ps.iter().zip(ss).all(|(p, s)| match_into(p, s, sigma))
        }
        _ => false,
    }
}

fn occurs(v: &Var, t: &Term) -> bool {
    match t {
        Term::Var(w) => v == w,
        _ => t.args().iter().any(|a| occurs(v, a)),
    }
}

/// Robinson unification with occurs check. The result is idempotent.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        if a == b {
            continue;
        }
        match (&a, &b) {
            (Term::Var(v), other) | (other, Term::Var(v)) => {
                if occurs(v, other) {
                    return None;
                }
                let single: Substitution = [(v.clone(), other.clone())].into_iter().collect();
                sigma = sigma.compose(&single);
            }
            (Term::Quote(x), Term::Quote(y)) => stack.push((x.as_ref().clone(), y.as_ref().clone())),
            (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(sigma)
}

/// Renames every variable of `t` by appending `suffix`.
pub fn rename_vars(t: &Term, suffix: &str) -> Term {
    t.map_bottom_up(&mut |u| match u {
        Term::Var(v) => Term::Var(Var { name: format!("{}{suffix}", v.name), kind: v.kind }),
        other => other,
    })
}
