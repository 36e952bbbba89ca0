mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;

use ari::awpo::{compare, Order};
use ari::confluence::{analyze_confluence, critical_triples, enumerate_cases, join_case, unsat_witness, JoinResult};
use ari::engine::{ari_normalize, ari_normalize_with, AriOptions, NormalizeOptions};
use ari::eqsolver::{results_equal, solve_for, SolveResult};
use ari::eval::eval_numeric;
use ari::grading::{grade_trs, MarkingScheme, ResponseRecord};
use ari::parse::{parse_equation, parse_expr};
use ari::rules::{builtin_system, SystemName};
use ari::smt::{check_smt_syntax, emit_equivalence_problem, AxiomSet, AxiomSetName};
use ari::termination::{analyze_system, AnalysisOptions};
use ari::term::{ratio, Equation, Number, Term};
use common::{close, expr, surface, valuation};
use proptest::prelude::*;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)).unwrap()
}

fn pool() -> Vec<Term> {
    fixture("term_pool.txt").lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).map(|l| parse_expr(l).unwrap()).collect()
}

fn corpus_equations(name: &str) -> Vec<Equation> {
    fixture(name).lines().filter_map(|l| ResponseRecord::from_json_line(l).ok()).flat_map(|r| r.equations).collect()
}

fn record(equations: Vec<Equation>) -> ResponseRecord {
    ResponseRecord { student_id: "p".into(), equations, ground_truth_mark: None, unparsed: Vec::new() }
}

fn scale(eq: &Equation, k: &Number) -> Equation {
    eq.map(|t| Term::mul(Term::Num(k.clone()), t.clone()))
}

fn nonzero_ratio() -> impl Strategy<Value = Number> {
    (1i64..10, proptest::sample::select(&[1i64, 2, 4, 5][..]), any::<bool>())
        .prop_map(|(n, d, neg)| ratio(if neg { -n } else { n }, d))
}

/// Equations in `v0` of the shapes the solver handles: linear, or pure
/// quadratic after clearing a denominator.
fn solvable() -> impl Strategy<Value = Equation> {
    let coef = || prop_oneof![Just("m1"), Just("m2"), Just("m1 + m2"), Just("2*m1"), Just("m2/3")];
    let rest = || prop_oneof![Just("m1*v1^2"), Just("m2*v2^2 + m1*v1^2"), Just("v1"), Just("m2*v2"), Just("1")];
    (coef(), rest(), rest(), any::<bool>(), 0usize..3).prop_map(|(c, r1, r2, square, form)| {
        let v = if square { "v0^2" } else { "v0" };
        let text = match form {
            0 => format!("({c})*{v} = {r1} + {r2}"),
            1 => format!("({c})*{v}/2 - ({r1}) = {r2}"),
            _ => format!("{r1} = {r2} + {v}*({c})"),
        };
        parse_equation(&text).unwrap()
    })
}

fn positive_env(vals: &[f64]) -> BTreeMap<String, f64> {
    ["m_1", "m_2", "v_1", "v_2"].iter().map(|s| s.to_string()).zip(vals.iter().copied()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalization_preserves_value(t in expr(3), env in valuation()) {
        let n = ari_normalize(&t).unwrap();
        let (a, b) = (eval_numeric(&t, &env).unwrap(), eval_numeric(&n, &env).unwrap());
        prop_assert!(close(a, b, 1e-9), "{} = {} but {} = {}", t, a, n, b);
    }
}

proptest! {
    #[test]
    fn normalization_is_deterministic(t in expr(3)) {
        prop_assert_eq!(ari_normalize(&t).unwrap(), ari_normalize(&t).unwrap());
    }

    #[test]
    fn solver_never_fails(l in surface(3), r in surface(3)) {
        let _ = solve_for(&Equation::new(l, r), "v0", &AriOptions::default());
    }

    #[test]
    fn solutions_satisfy_the_equation(eq in solvable(), points in proptest::collection::vec(proptest::collection::vec(0.2f64..4.0, 4), 200)) {
        let SolveResult::Solved(e) = solve_for(&eq, "v0", &AriOptions::default()) else {
            return Err(TestCaseError::fail(format!("no solution for {eq}")));
        };
        for p in points {
            let mut env = positive_env(&p);
            let Ok(v0) = eval_numeric(&e, &env) else { continue };
            if !v0.is_finite() {
                continue;
            }
            env.insert("v_0".into(), v0);
            let (a, b) = (eval_numeric(&eq.lhs, &env).unwrap(), eval_numeric(&eq.rhs, &env).unwrap());
            prop_assert!(close(a, b, 1e-9), "{}: v0 = {} gives {} vs {}", eq, e, a, b);
        }
    }

    #[test]
    fn solving_ignores_scaling(eq in solvable(), k in nonzero_ratio()) {
        let opts = AriOptions::default();
        let (a, b) = (solve_for(&eq, "v0", &opts), solve_for(&scale(&eq, &k), "v0", &opts));
        prop_assert!(results_equal(&a, &b, &opts), "{} vs {}", a, b);
    }

    #[test]
    fn marks_are_monotone(picks in proptest::collection::vec(any::<proptest::sample::Index>(), 0..4), extra in any::<proptest::sample::Index>()) {
        let scheme = MarkingScheme::from_json(&fixture("q26_scheme.json")).unwrap();
        let mut eqs = corpus_equations("q26_corpus.jsonl");
        eqs.extend(corpus_equations("q25_corpus.jsonl"));
        let chosen: Vec<Equation> = picks.iter().map(|i| i.get(&eqs).clone()).collect();
        let mut more = chosen.clone();
        more.push(extra.get(&eqs).clone());
        let opts = AriOptions::default();
        let (before, after) = (grade_trs(&record(chosen), &scheme, &opts), grade_trs(&record(more), &scheme, &opts));
        prop_assert!(after.mark >= before.mark);
    }

    #[test]
    fn marks_ignore_scaling(pick in any::<proptest::sample::Index>(), k in nonzero_ratio()) {
        let scheme = MarkingScheme::from_json(&fixture("q25_scheme.json")).unwrap();
        let eqs = corpus_equations("q25_corpus.jsonl");
        let d = pick.get(&eqs);
        let opts = AriOptions::default();
        let plain = grade_trs(&record(vec![d.clone()]), &scheme, &opts);
        let scaled = grade_trs(&record(vec![scale(d, &k)]), &scheme, &opts);
        prop_assert_eq!(plain.mark, scaled.mark, "{}", d);
    }

    #[test]
    fn emitted_documents_parse(l in surface(3), r in surface(3), pick in any::<proptest::sample::Index>()) {
        let eqs = corpus_equations("q25_corpus.jsonl");
        let c = pick.get(&eqs);
        for name in [AxiomSetName::Minimal, AxiomSetName::Full] {
            // Unencodable input is reported as an error, not a bad document.
            if let Ok(p) = emit_equivalence_problem(&Equation::new(l.clone(), r.clone()), c, &AxiomSet::new(name)) {
                prop_assert!(check_smt_syntax(&p.forward).is_ok(), "{}", p.forward);
                prop_assert!(check_smt_syntax(&p.backward).is_ok(), "{}", p.backward);
            }
        }
    }
}

#[test]
fn canon_and_simp_steps_decrease() {
    let opts = AriOptions { normalize: NormalizeOptions { trace: true, ..Default::default() }, ..Default::default() };
    let mut steps = 0;
    for t in pool() {
        let out = ari_normalize_with(&t, &opts).unwrap();
        for (name, trace) in &out.stages {
            if !matches!(name, SystemName::Canon | SystemName::Simp) {
                continue;
            }
            let ctx = builtin_system(*name).ordering_or_default();
            let mut prev = &trace.input;
            for s in &trace.steps {
                if s.rule_id != "T1.7" {
                    let order = compare(prev, &s.term, &ctx).order;
                    assert_eq!(order, Order::GT, "{t}: {} at {}: {prev} => {}", s.rule_id, s.position, s.term);
                    steps += 1;
                }
                prev = &s.term;
            }
        }
    }
    assert!(steps > 1000, "{steps}");
}

#[test]
fn analysis_is_deterministic() {
    for name in [SystemName::Canon, SystemName::Simp] {
        let a = analyze_system(builtin_system(name), &AnalysisOptions::default());
        let b = analyze_system(builtin_system(name), &AnalysisOptions::default());
        let verdicts = |r: &ari::termination::SystemReport| r.orientation.iter().map(|o| (o.rule_id.clone(), o.verdict)).collect::<Vec<_>>();
        assert_eq!(verdicts(&a), verdicts(&b));
    }
}

#[test]
fn skipped_cases_have_no_ground_instance() {
    let sys = builtin_system(SystemName::Simp);
    let mut skipped = 0;
    for tr in critical_triples(sys, sys) {
        for (i, case) in enumerate_cases(&tr.case_vars()).unwrap().iter().enumerate() {
            if let JoinResult::SkippedUnsat = join_case(&tr, case, sys) {
                skipped += 1;
                if let Some(g) = unsat_witness(&tr, case, sys, 1000, i as u64) {
                    panic!("{:?} [{case}] has instance {g:?}", tr.overlap);
                }
            }
        }
    }
    assert_eq!(skipped, analyze_confluence(sys).skipped_unsat);
}

#[test]
fn axiom_sets_are_nested() {
    let set = |n| AxiomSet::new(n).formulas;
    let (min, red, full) = (set(AxiomSetName::Minimal), set(AxiomSetName::Reduced), set(AxiomSetName::Full));
    assert!(min.len() < red.len() && red.len() < full.len());
    assert!(min.iter().all(|f| red.contains(f)) && red.iter().all(|f| full.contains(f)));
}
