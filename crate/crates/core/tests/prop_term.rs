mod common;

use ari::parse::parse_expr;
use ari::print::print_exact;
use ari::term::{Substitution, Term};
use ari::unify::{match_term, unify};
use common::{fg, open_term, surface};
use proptest::prelude::*;

proptest! {
    #[test]
    fn print_parse_round_trip(t in surface(4)) {
        let printed = print_exact(&t);
        prop_assert_eq!(parse_expr(&printed).unwrap(), t, "{}", printed);
    }

    #[test]
    fn replace_with_own_subterm(t in surface(4)) {
        for p in t.positions() {
            let sub = t.subterm_at(&p).unwrap().clone();
            prop_assert_eq!(t.replace_at(&p, sub).unwrap(), t.clone());
        }
    }

    #[test]
    fn match_is_sound(p in open_term(3), s in open_term(3)) {
        if let Some(sigma) = match_term(&p, &s) {
            prop_assert_eq!(sigma.apply(&p), s);
        }
    }

    #[test]
    fn match_finds_instances(p in open_term(3), a in open_term(2), b in open_term(2)) {
        let mut delta = Substitution::new();
        delta.bind(fg("x"), a);
        delta.bind(fg("y"), b);
        let s = delta.apply(&p);
        let sigma = match_term(&p, &s).expect("an instance matches its pattern");
        prop_assert_eq!(sigma.apply(&p), s);
    }

    /// `s` and `t` are built to have a known unifier `δ`; the computed one
    /// must unify them and be more general, i.e. `σδ = δ`.
    #[test]
    fn unify_is_sound_and_general(w in open_term(3), holes in proptest::collection::vec(any::<bool>(), 8)) {
        let mut delta = Substitution::new();
        let (mut s, mut t) = (w.clone(), w.clone());
        for (i, p) in w.positions().into_iter().filter(|p| !p.is_root()).take(holes.len()).enumerate() {
            if !holes[i] || s.subterm_at(&p).is_err() || t.subterm_at(&p).is_err() {
                continue;
            }
            let fresh = fg(&format!("h{i}"));
            let sub = w.subterm_at(&p).unwrap().clone();
            if sub.vars().iter().any(|v| v.name.starts_with('h')) {
                continue;
            }
            delta.bind(fresh.clone(), sub);
            if i % 2 == 0 {
                s = s.replace_at(&p, Term::Var(fresh)).unwrap();
            } else {
                t = t.replace_at(&p, Term::Var(fresh)).unwrap();
            }
        }
        prop_assert_eq!(delta.apply(&s), delta.apply(&t));
        let sigma = unify(&s, &t).expect("a unifiable pair");
        prop_assert_eq!(sigma.apply(&s), sigma.apply(&t));
        for v in s.vars().into_iter().chain(t.vars()) {
            let x = Term::Var(v);
            prop_assert_eq!(delta.apply(&sigma.apply(&x)), delta.apply(&x));
        }
    }

    #[test]
    fn ground_substitution_is_idempotent(t in open_term(3), a in surface(2), b in surface(2)) {
        let mut sigma = Substitution::new();
        sigma.bind(fg("x"), a);
        sigma.bind(fg("z"), b);
        let once = sigma.apply(&t);
        prop_assert_eq!(sigma.apply(&once), once);
    }
}
