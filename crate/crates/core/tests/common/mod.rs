#![allow(dead_code)]

use std::collections::BTreeMap;

use ari::term::{int, ratio, Number, Sym, Term, Var};
use proptest::prelude::*;

pub const PARAMS: [&str; 4] = ["a", "b", "m_1", "v_0"];

/// Integers and finite decimals, the literals the parser accepts.
pub fn number() -> impl Strategy<Value = Number> {
    let decimal = (1i64..20, proptest::sample::select(&[2i64, 4, 5, 10][..])).prop_map(|(n, d)| ratio(n, d));
    prop_oneof![(0i64..7).prop_map(int), decimal]
}

fn param() -> impl Strategy<Value = Term> {
    proptest::sample::select(&PARAMS[..]).prop_map(Term::param)
}

/// Expressions as a student would write them: parameters, numbers, the
/// field operations, natural powers, `sin` and `cos`.
pub fn expr(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![3 => param(), 2 => number().prop_map(Term::Num)];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (inner.clone(), (0i64..4)).prop_map(|(a, n)| Term::pow(a, Term::num(n))),
            inner.clone().prop_map(Term::neg),
            inner.clone().prop_map(Term::sin),
            inner.clone().prop_map(Term::cos),
        ]
    })
}

/// As [`expr`], plus division and square roots.
pub fn surface(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![3 => param(), 2 => number().prop_map(Term::Num)];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::div(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::pow(a, b)),
            inner.clone().prop_map(Term::neg),
            inner.clone().prop_map(Term::sin),
            inner.clone().prop_map(Term::cos),
            inner.clone().prop_map(|a| Term::app(Sym::Sqrt, vec![a])),
        ]
    })
}

/// Terms over foreground variables `x`, `y`, `z`, parameters and numbers.
pub fn open_term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        2 => proptest::sample::select(&["x", "y", "z"][..]).prop_map(Term::fg),
        1 => param(),
        1 => (0i64..3).prop_map(Term::num),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            inner.clone().prop_map(Term::sin),
        ]
    })
}

/// Ground terms over parameters and quoted numbers, shaped like Canon input.
pub fn ground_quoted(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        param(),
        (-3i64..4).prop_map(Term::qnum),
    ];
    leaf.prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::mul(a, b)),
            (inner.clone(), (0i64..3)).prop_map(|(a, n)| Term::pow(a, Term::qnum(n))),
            inner.clone().prop_map(Term::sin),
            inner.clone().prop_map(Term::cos),
        ]
    })
}

pub fn valuation() -> impl Strategy<Value = BTreeMap<String, f64>> {
    proptest::collection::vec(0.1f64..1.5, PARAMS.len())
        .prop_map(|vs| PARAMS.iter().map(|p| p.to_string()).zip(vs).collect())
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn fg(name: &str) -> Var {
    Var::fg(name)
}
