//! Constrained rules `l -> r | C`, admissibility, and the rule-file format.
//!
//! ```text
//! vars: x y z; bgvars: a b
//! A1.3.2: [a] + [b] -> [a + b]
//! A1.2.1: x + y -> y + x | x > y
//! ```

mod builtin;
mod fuzz;

use std::collections::HashMap;
use std::fmt;

pub use builtin::{builtin_system, canon_with_tprime};
pub use fuzz::{soundness_fuzz, Counterexample};

use crate::awpo::OrderingContext;
use crate::error::{Error, Result};
use crate::parse::{normalize_ident, parse_expr_with, split_arrow, ParseOptions};
use crate::term::{Term, Var, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HostPred {
    IsBgVar,
    IsFgVar,
    IsIntGeq0,
    NotIntGeq0,
    IsTimesFunterm,
    NotTimesFunterm,
    Gt0,
}

impl HostPred {
    pub fn name(self) -> &'static str {
        match self {
            HostPred::IsBgVar => "is_bg_var",
            HostPred::IsFgVar => "is_fg_var",
            HostPred::IsIntGeq0 => "is_int_geq0",
            HostPred::NotIntGeq0 => "not_int_geq0",
            HostPred::IsTimesFunterm => "is_times_funterm",
            HostPred::NotTimesFunterm => "not_times_funterm",
            HostPred::Gt0 => "gt0",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        [
            HostPred::IsBgVar,
            HostPred::IsFgVar,
            HostPred::IsIntGeq0,
            HostPred::NotIntGeq0,
            HostPred::IsTimesFunterm,
            HostPred::NotTimesFunterm,
            HostPred::Gt0,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }

    /// Evaluates the predicate on the (surface) term bound to its variable.
    pub fn holds(self, subject: &Term) -> bool {
        use num_traits::Signed;
        let int_geq0 = matches!(subject, Term::Num(n) if n.is_integer() && !n.is_negative());
        let times = matches!(subject, Term::App(crate::term::Sym::Mul, _));
        match self {
            HostPred::IsBgVar => matches!(subject, Term::Num(_)),
            HostPred::IsFgVar => matches!(subject, Term::Param(_)),
            HostPred::IsIntGeq0 => int_geq0,
            HostPred::NotIntGeq0 => !int_geq0,
            HostPred::IsTimesFunterm => times,
            HostPred::NotTimesFunterm => !times,
            HostPred::Gt0 => matches!(subject, Term::Num(n) if n.is_positive()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `x ≻ y`
    OrderGt(Var, Var),
    Host(HostPred, Var),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::OrderGt(x, y) => write!(f, "{} > {}", x.name, y.name),
            Constraint::Host(p, x) => write!(f, "{}({})", p.name(), x.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstrainedRule {
    pub id: String,
    pub lhs: Term,
    pub rhs: Term,
    pub constraint: Vec<Constraint>,
    pub ordering_hint: Option<String>,
    /// Rules that move terms into or out of quotes (Norm, Clean).
    pub quote_boundary: bool,
}

impl ConstrainedRule {
    pub fn new(id: impl Into<String>, lhs: Term, rhs: Term) -> Self {
        ConstrainedRule {
            id: id.into(),
            lhs,
            rhs,
            constraint: Vec::new(),
            ordering_hint: None,
            quote_boundary: false,
        }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraint.push(c);
        self
    }

    pub fn order_constraints(&self) -> impl Iterator<Item = (&Var, &Var)> {
        self.constraint.iter().filter_map(|c| match c {
            Constraint::OrderGt(x, y) => Some((x, y)),
            Constraint::Host(..) => None,
        })
    }

    /// Rules guarded by host predicates compute `n - 1` on numbers directly.
    pub fn host_arith(&self) -> bool {
        self.constraint.iter().any(|c| matches!(c, Constraint::Host(..)))
    }
}

impl fmt::Display for ConstrainedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.id, crate::print::print_exact(&self.lhs), crate::print::print_exact(&self.rhs))?;
        for (i, c) in self.constraint.iter().enumerate() {
            write!(f, "{}{c}", if i == 0 { " | " } else { ", " })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemName {
    Norm,
    Canon,
    Simp,
    Clean,
    TPrime,
    User,
}

impl SystemName {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "norm" | "normalize" => SystemName::Norm,
            "canon" => SystemName::Canon,
            "simp" => SystemName::Simp,
            "clean" => SystemName::Clean,
            "tprime" | "t'" => SystemName::TPrime,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RuleSystem {
    pub name: SystemName,
    pub rules: Vec<ConstrainedRule>,
    pub ordering: Option<OrderingContext>,
}

impl RuleSystem {
    pub fn get(&self, id: &str) -> Option<&ConstrainedRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The ordering used to decide `x ≻ y` constraints during rewriting.
    pub fn ordering_or_default(&self) -> OrderingContext {
        self.ordering.clone().unwrap_or_else(OrderingContext::canon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `var(r) ⊆ var(l)`
    Vars,
    /// No variable is both background and foreground.
    I,
    /// Quotes on the left wrap a number or a background variable.
    II,
    /// Quotes on the right are parameter-free and quote-free.
    III,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: Clause,
    pub subterm: Term,
}

fn collect_occurrences(t: &Term, in_quote: bool, out: &mut Vec<(Var, bool)>) {
    match t {
        Term::Var(v) => out.push((v.clone(), in_quote)),
        Term::Quote(inner) => collect_occurrences(inner, true, out),
        _ => t.args().iter().for_each(|a| collect_occurrences(a, in_quote, out)),
    }
}

pub fn check_admissible(rule: &ConstrainedRule) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let lvars = rule.lhs.vars();
    for v in rule.rhs.vars() {
        if !lvars.contains(&v) {
            out.push(Violation { clause: Clause::Vars, subterm: Term::Var(v) });
        }
    }
    if !rule.quote_boundary {
        let mut occ = Vec::new();
        collect_occurrences(&rule.lhs, false, &mut occ);
        collect_occurrences(&rule.rhs, false, &mut occ);
        let mut seen: HashMap<&str, (bool, bool)> = HashMap::new();
        for (v, in_quote) in &occ {
            let bg = v.kind == VarKind::Background || *in_quote;
            let e = seen.entry(v.name.as_str()).or_default();
            if bg {
                e.0 = true;
            } else {
                e.1 = true;
            }
        }
        let mut names: Vec<_> = seen.into_iter().filter(|(_, (b, f))| *b && *f).map(|(n, _)| n).collect();
        names.sort();
        for n in names {
            out.push(Violation { clause: Clause::I, subterm: Term::param(n) });
        }
    }
    for (_, q) in rule.lhs.quote_positions() {
        let Term::Quote(inner) = q else { unreachable!() };
        let ok = matches!(inner.as_ref(), Term::Num(_))
            || matches!(inner.as_ref(), Term::Var(v) if v.kind == VarKind::Background || rule.quote_boundary);
        if !ok {
            out.push(Violation { clause: Clause::II, subterm: q.clone() });
        }
    }
    for (_, q) in rule.rhs.quote_positions() {
        let Term::Quote(inner) = q else { unreachable!() };
        if !(inner.is_param_free() && inner.is_quote_free()) {
            out.push(Violation { clause: Clause::III, subterm: q.clone() });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn parse_header(line: &str, vars: &mut HashMap<String, VarKind>) -> Option<()> {
    let mut matched = false;
    for part in line.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, names) = part.split_once(':')?;
        let kind = match key.trim() {
            "vars" => VarKind::Foreground,
            "bgvars" => VarKind::Background,
            _ => return None,
        };
        matched = true;
        for n in names.split_whitespace() {
            vars.insert(normalize_ident(n), kind);
        }
    }
    matched.then_some(())
}

fn parse_constraint(text: &str, vars: &HashMap<String, VarKind>, line: usize) -> Result<Constraint> {
    let err = |message: String| Error::RuleFile { line, message };
    let var = |name: &str| -> Result<Var> {
        let name = normalize_ident(name.trim());
        vars.get(&name)
            .map(|k| Var { name: name.clone(), kind: *k })
            .ok_or_else(|| err(format!("undeclared variable `{name}` in constraint")))
    };
    let text = text.trim();
    if let Some((a, b)) = text.split_once('>') {
        return Ok(Constraint::OrderGt(var(a)?, var(b)?));
    }
    if let Some((name, rest)) = text.split_once('(') {
        let arg = rest.strip_suffix(')').ok_or_else(|| err(format!("bad constraint `{text}`")))?;
        let pred = HostPred::from_name(name.trim()).ok_or_else(|| err(format!("unknown predicate `{}`", name.trim())))?;
        return Ok(Constraint::Host(pred, var(arg)?));
    }
    Err(err(format!("bad constraint `{text}`")))
}

/// Reads rules in the line format described in the module docs. Blank lines
/// and `#` comments are skipped.
pub fn parse_rules(text: &str) -> Result<Vec<ConstrainedRule>> {
    let mut vars: HashMap<String, VarKind> = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("vars:") || line.starts_with("bgvars:") {
            parse_header(line, &mut vars)
                .ok_or_else(|| Error::RuleFile { line: line_no, message: "bad variable header".into() })?;
            continue;
        }
        let err = |message: String| Error::RuleFile { line: line_no, message };
        let (id, body) = line.split_once(':').ok_or_else(|| err("expected `id: lhs -> rhs`".into()))?;
        let (lhs, rest) = split_arrow(body).ok_or_else(|| err("missing `->`".into()))?;
        let (rhs, constraints) = match rest.split_once('|') {
            Some((r, c)) => (r, Some(c)),
            None => (rest, None),
        };
        let opts = ParseOptions::rule_file(vars.clone());
        let wrap = |e: Error| err(e.to_string());
        let lhs = parse_expr_with(lhs.trim(), &opts).map_err(wrap)?;
        let rhs = parse_expr_with(rhs.trim(), &opts).map_err(wrap)?;
        let mut rule = ConstrainedRule::new(id.trim(), lhs, rhs);
        if let Some(cs) = constraints {
            for c in cs.split(',') {
                rule.constraint.push(parse_constraint(c, &vars, line_no)?);
            }
        }
        out.push(rule);
    }
    Ok(out)
}

/// Reads a user rule file into a system. Quotes in right-hand sides are
/// simplified once at load time.
pub fn load_system(text: &str) -> Result<RuleSystem> {
    let mut rules = parse_rules(text)?;
    for r in &mut rules {
        r.rhs = crate::canon::deep_simp(&r.rhs)?;
    }
    Ok(RuleSystem { name: SystemName::User, rules, ordering: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(text: &str) -> ConstrainedRule {
        parse_rules(text).unwrap().remove(0)
    }

    #[test]
    fn admissibility_examples() {
        let ok = rule("bgvars: x\nr: -[x] -> [-1*x]");
        assert_eq!(check_admissible(&ok), Ok(()));
        let bad = rule("bgvars: x\nr: [-1*(-1*x)] -> [x]");
        let v = check_admissible(&bad).unwrap_err();
        assert!(v.iter().all(|v| v.clause == Clause::II));
        let ordered = rule("vars: x y\nr: x + y -> y + x | x > y");
        assert_eq!(check_admissible(&ordered), Ok(()));
        assert_eq!(ordered.constraint, vec![Constraint::OrderGt(Var::fg("x"), Var::fg("y"))]);
    }

    #[test]
    fn clause_iii_and_vars() {
        let r = rule("bgvars: a\nr: [a] -> [a + p]");
        assert_eq!(check_admissible(&r).unwrap_err()[0].clause, Clause::III);
        let r = rule("vars: x y\nr: x -> y");
        assert_eq!(check_admissible(&r).unwrap_err()[0].clause, Clause::Vars);
        let r = rule("vars: x\nr: sin([x]) -> x");
        assert!(check_admissible(&r).unwrap_err().iter().any(|v| v.clause == Clause::I));
    }

    #[test]
    fn file_errors_carry_lines() {
        let e = parse_rules("vars: x\n\nr1: x + -> x").unwrap_err();
        assert!(matches!(e, Error::RuleFile { line: 3, .. }));
        let e = parse_rules("vars: x\nr1: x -> x | foo(x)").unwrap_err();
        assert!(matches!(e, Error::RuleFile { line: 2, .. }));
    }

    #[test]
    fn host_predicates() {
        assert!(HostPred::IsIntGeq0.holds(&Term::num(3)));
        assert!(!HostPred::IsIntGeq0.holds(&Term::Num(crate::term::ratio(1, 2))));
        assert!(HostPred::NotIntGeq0.holds(&Term::num(-1)));
        assert!(HostPred::IsFgVar.holds(&Term::param("m_1")));
        assert!(HostPred::IsTimesFunterm.holds(&Term::mul(Term::num(2), Term::param("c"))));
        assert!(HostPred::Gt0.holds(&Term::num(1)) && !HostPred::Gt0.holds(&Term::num(0)));
    }
}
