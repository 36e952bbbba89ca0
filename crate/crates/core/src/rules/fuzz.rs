//! Numeric soundness sampling for single rules.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConstrainedRule, Constraint, HostPred};
use crate::error::Error;
use crate::eval::{approx_eq, eval_with};
use crate::term::{Sym, Term, Var};

const TOLERANCE: f64 = 1e-9;
const MAX_RESAMPLES: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub assignment: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Domain {
    Real,
    Positive,
    Nat,
    Pos,
}

fn mark(t: &Term, dom: Domain, out: &mut BTreeMap<Var, Domain>) {
    let strongest = |old: Option<&Domain>, new: Domain| match (old, new) {
        (Some(Domain::Nat | Domain::Pos), Domain::Positive | Domain::Real) => *old.unwrap(),
        (Some(Domain::Positive), Domain::Real) => Domain::Positive,
        (Some(Domain::Pos), Domain::Nat) => Domain::Pos,
        _ => new,
    };
    match t {
        Term::Var(v) => {
            let d = strongest(out.get(v), dom);
            out.insert(v.clone(), d);
        }
        Term::Quote(inner) => mark(inner, dom, out),
        Term::App(sym, args) => {
            let doms: Vec<Domain> = match sym {
                Sym::Pow => vec![Domain::Positive, Domain::Real],
                Sym::PwrN => vec![Domain::Positive, Domain::Nat],
                Sym::SinN | Sym::CosN => vec![Domain::Nat, Domain::Real],
                Sym::Succ | Sym::ToSucc => vec![Domain::Nat],
                _ => vec![dom; args.len()],
            };
            // A base keeps its positivity through products and sums below it.
            for (a, d) in args.iter().zip(doms) {
                let d = if dom == Domain::Positive && d == Domain::Real { Domain::Positive } else { d };
                mark(a, d, out);
            }
        }
        _ => {}
    }
}

fn sample(rng: &mut ChaCha8Rng, dom: Domain) -> f64 {
    match dom {
        Domain::Real => {
            let m: f64 = rng.gen_range(0.1..3.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        }
        Domain::Positive => rng.gen_range(0.1..3.0),
        Domain::Nat => rng.gen_range(0..=5) as f64,
        Domain::Pos => rng.gen_range(1..=5) as f64,
    }
}

/// Evaluates both sides of `rule` at `trials` random points. Variables under
/// a power base are sampled positive, counters as small integers; `pi` is π
/// and other parameters are drawn from `[-10, 10] \ {0}`. Points where either
/// side is undefined are redrawn.
pub fn soundness_fuzz(rule: &ConstrainedRule, trials: usize, seed: u64) -> Result<(), Counterexample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut doms = BTreeMap::new();
    mark(&rule.lhs, Domain::Real, &mut doms);
    mark(&rule.rhs, Domain::Real, &mut doms);
    for c in &rule.constraint {
        if let Constraint::Host(p, v) = c {
            match p {
                HostPred::IsIntGeq0 => {
                    doms.insert(v.clone(), Domain::Nat);
                }
                HostPred::Gt0 => {
                    doms.insert(v.clone(), Domain::Pos);
                }
                _ => {}
            }
        }
    }
    let params: BTreeSet<String> = rule.lhs.params().into_iter().chain(rule.rhs.params()).collect();
    for _ in 0..trials.max(1) {
        for _ in 0..MAX_RESAMPLES {
            let mut assignment = BTreeMap::new();
            for (v, d) in &doms {
                assignment.insert(v.name.clone(), sample(&mut rng, *d));
            }
            for p in &params {
                let val = if p == "pi" {
                    std::f64::consts::PI
                } else {
                    let m: f64 = rng.gen_range(0.1..10.0);
                    if rng.gen_bool(0.5) {
                        m
                    } else {
                        -m
                    }
                };
                assignment.insert(p.clone(), val);
            }
            let var = |v: &Var| assignment.get(&v.name).copied();
            let param = |p: &str| assignment.get(p).copied();
            let l = eval_with(&rule.lhs, &var, &param);
            let r = eval_with(&rule.rhs, &var, &param);
            match (l, r) {
                (Ok(l), Ok(r)) => {
                    if !approx_eq(l, r, TOLERANCE) {
                        return Err(Counterexample { assignment, lhs: l, rhs: r });
                    }
                    break;
                }
                (Err(Error::Domain(_)), _) | (_, Err(Error::Domain(_))) => continue,
                (Err(e), _) | (_, Err(e)) => panic!("rule {} is not evaluable: {e}", rule.id),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{builtin_system, parse_rules, SystemName};

    #[test]
    fn angle_addition_and_power_tower() {
        let canon = builtin_system(SystemName::Canon);
        assert_eq!(soundness_fuzz(canon.get("T1.3").unwrap(), 1000, 1), Ok(()));
        assert_eq!(soundness_fuzz(canon.get("A1.8.1").unwrap(), 1000, 2), Ok(()));
    }

    #[test]
    fn mutated_rule_is_caught() {
        let r = parse_rules("vars: x y\nbad: x + y -> x*y").unwrap().remove(0);
        let cex = soundness_fuzz(&r, 1000, 3).unwrap_err();
        let (x, y) = (cex.assignment["x"], cex.assignment["y"]);
        assert!(((x + y) - cex.lhs).abs() < 1e-12 && ((x * y) - cex.rhs).abs() < 1e-12);
    }

    #[test]
    fn printed_cos_pi_fails() {
        let r = parse_rules("typo: cos([1]*pi^[1]) -> [1]").unwrap().remove(0);
        assert!(soundness_fuzz(&r, 10, 4).is_err());
    }

    #[test]
    fn every_builtin_rule_is_sound() {
        for n in [SystemName::Norm, SystemName::Canon, SystemName::Simp, SystemName::Clean, SystemName::TPrime] {
            for r in &builtin_system(n).rules {
                assert_eq!(soundness_fuzz(r, 1000, 7), Ok(()), "{r}");
            }
        }
    }
}
