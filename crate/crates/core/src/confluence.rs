//! Critical triples and the case-split joinability test for local
//! confluence.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::awpo::{compare, Order, OrderingContext, QuoteCase};
use crate::canon::deep_simp;
use crate::engine::{normal_form_traced, NormalizeOptions};
use crate::error::{Error, Result};
use crate::rules::{Constraint, HostPred, RuleSystem};
use crate::term::{Position, Substitution, Term, Var, VarKind};
use crate::unify::{rename_vars, unify};

pub const MAX_VARS: usize = 5;
pub const JOIN_BUDGET: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermConstraint {
    Gt(Term, Term),
    Host(HostPred, Term),
}

impl TermConstraint {
    fn apply(&self, s: &Substitution) -> Self {
        match self {
            TermConstraint::Gt(a, b) => TermConstraint::Gt(s.apply(a), s.apply(b)),
            TermConstraint::Host(p, t) => TermConstraint::Host(*p, s.apply(t)),
        }
    }
}

impl fmt::Display for TermConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermConstraint::Gt(a, b) => write!(f, "{a} > {b}"),
            TermConstraint::Host(p, t) => write!(f, "{}({t})", p.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalTriple {
    /// `l1σ[r2σ]`
    pub left: Term,
    /// `r1σ`
    pub right: Term,
    pub constr: Vec<TermConstraint>,
    pub overlap: (String, String, Position),
}

impl CriticalTriple {
    /// Foreground variables, the ones the case split ranges over.
    pub fn case_vars(&self) -> Vec<Var> {
        let mut vs = self.left.vars();
        vs.extend(self.right.vars());
        for c in &self.constr {
            match c {
                TermConstraint::Gt(a, b) => {
                    vs.extend(a.vars());
                    vs.extend(b.vars());
                }
                TermConstraint::Host(_, t) => vs.extend(t.vars()),
            }
        }
        vs.into_iter().filter(|v| v.kind == VarKind::Foreground).collect::<BTreeSet<_>>().into_iter().collect()
    }
}

fn lift(c: &Constraint) -> TermConstraint {
    match c {
        Constraint::OrderGt(x, y) => TermConstraint::Gt(Term::Var(x.clone()), Term::Var(y.clone())),
        Constraint::Host(p, x) => TermConstraint::Host(*p, Term::Var(x.clone())),
    }
}

fn rename_constraint(c: &TermConstraint, suffix: &str) -> TermConstraint {
    match c {
        TermConstraint::Gt(a, b) => TermConstraint::Gt(rename_vars(a, suffix), rename_vars(b, suffix)),
        TermConstraint::Host(p, t) => TermConstraint::Host(*p, rename_vars(t, suffix)),
    }
}

/// All overlaps of a left side of `sys2` into a non-variable position of a
/// left side of `sys1`. The root overlap of a rule with itself is skipped.
pub fn critical_triples(sys1: &RuleSystem, sys2: &RuleSystem) -> Vec<CriticalTriple> {
    let mut out = Vec::new();
    for r1 in &sys1.rules {
        for p in r1.lhs.positions() {
            let Ok(sub) = r1.lhs.subterm_at(&p) else { continue };
            if sub.is_var() {
                continue;
            }
            for r2 in &sys2.rules {
                if r1.id == r2.id && p.is_root() {
                    continue;
                }
                let l2 = rename_vars(&r2.lhs, "'");
                let Some(sigma) = unify(sub, &l2) else { continue };
                let r2s = sigma.apply(&rename_vars(&r2.rhs, "'"));
                let Ok(left) = sigma.apply(&r1.lhs).replace_at(&p, r2s) else { continue };
                let right = sigma.apply(&r1.rhs);
                let mut constr: Vec<TermConstraint> = r1.constraint.iter().map(|c| lift(c).apply(&sigma)).collect();
                constr.extend(r2.constraint.iter().map(|c| rename_constraint(&lift(c), "'").apply(&sigma)));
                constr.sort();
                constr.dedup();
                out.push(CriticalTriple { left, right, constr, overlap: (r1.id.clone(), r2.id.clone(), p.clone()) });
            }
        }
    }
    out
}

/// `{s1 ≻ t1, …}` is taken as satisfiable iff no `ti ⪰ si` holds.
pub fn constraint_satisfiable(c: &[TermConstraint], ctx: &OrderingContext) -> bool {
    c.iter().all(|k| match k {
        TermConstraint::Gt(s, t) => !matches!(compare(t, s, ctx).order, Order::GT | Order::EQ),
        TermConstraint::Host(p, t) => !t.is_ground() || p.holds(t),
    })
}

/// Ordered blocks of identified variables, most significant first, each
/// marked as quote or non-quote.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CaseAssignment {
    pub blocks: Vec<Vec<Var>>,
    pub quote: Vec<bool>,
}

impl fmt::Display for CaseAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.blocks.is_empty() {
            return write!(f, "(no variables)");
        }
        for (i, (b, q)) in self.blocks.iter().zip(&self.quote).enumerate() {
            if i > 0 {
                write!(f, " > ")?;
            }
            let names: Vec<&str> = b.iter().map(|v| v.name.as_str()).collect();
            let names = names.join("=");
            if *q {
                write!(f, "[{names}]")?;
            } else {
                write!(f, "{names}")?;
            }
        }
        Ok(())
    }
}

fn ordered_partitions(vars: &[Var]) -> Vec<Vec<Vec<Var>>> {
    let Some((first, rest)) = vars.split_first() else { return vec![Vec::new()] };
    let mut out = Vec::new();
    for p in ordered_partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first.clone());
            out.push(q);
        }
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, vec![first.clone()]);
            out.push(q);
        }
    }
    out
}

/// Every identification, order and quote split of `vars`.
pub fn enumerate_cases(vars: &[Var]) -> Result<Vec<CaseAssignment>> {
    if vars.len() > MAX_VARS {
        return Err(Error::CaseExplosion { vars: vars.len(), limit: MAX_VARS });
    }
    let mut out = Vec::new();
    for blocks in ordered_partitions(vars) {
        let k = blocks.len();
        for mask in 0u32..(1 << k) {
            let quote = (0..k).map(|i| mask & (1 << i) != 0).collect();
            out.push(CaseAssignment { blocks: blocks.clone(), quote });
        }
    }
    Ok(out)
}

fn quoted_var(v: &Var) -> Var {
    Var::bg(format!("{}_q", v.name))
}

impl CaseAssignment {
    /// Non-quote terms are above every quote, so a quote block may not
    /// precede a non-quote block.
    pub fn consistent(&self) -> bool {
        !self.quote.windows(2).any(|w| w[0] && !w[1])
    }

    pub fn substitution(&self) -> Substitution {
        let mut s = Substitution::new();
        for (b, q) in self.blocks.iter().zip(&self.quote) {
            let rep = &b[0];
            let target = if *q { Term::quote(Term::Var(quoted_var(rep))) } else { Term::Var(rep.clone()) };
            for v in b {
                if Term::Var(v.clone()) != target {
                    s.bind(v.clone(), target.clone());
                }
            }
        }
        s
    }

    pub fn ordering(&self, base: &OrderingContext) -> OrderingContext {
        let mut ctx = base.clone();
        ctx.x = self
            .blocks
            .iter()
            .zip(&self.quote)
            .map(|(b, q)| if *q { quoted_var(&b[0]) } else { b[0].clone() })
            .collect();
        for (b, q) in self.blocks.iter().zip(&self.quote) {
            if !q {
                ctx.quote_case.insert(b[0].clone(), QuoteCase::NotQuote);
            }
        }
        ctx
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JoinResult {
    Joined(Term),
    NotJoined { left: Term, right: Term, budget_exhausted: bool },
    SkippedUnsat,
}

fn normalize_side(t: &Term, sys: &RuleSystem, ctx: &OrderingContext) -> (Term, bool) {
    let t = deep_simp(t).unwrap_or_else(|_| t.clone());
    let opts = NormalizeOptions { budget: JOIN_BUDGET, ordering: Some(ctx.clone()), ..Default::default() };
    match normal_form_traced(&t, sys, &opts) {
        Ok(tr) => (tr.output, false),
        Err(_) => (t, true),
    }
}

pub fn join_case(tr: &CriticalTriple, case: &CaseAssignment, sys: &RuleSystem) -> JoinResult {
    if tr.left == tr.right {
        return JoinResult::Joined(tr.left.clone());
    }
    if !case.consistent() {
        return JoinResult::SkippedUnsat;
    }
    let ctx = case.ordering(&sys.ordering_or_default());
    let s = case.substitution();
    let constr: Vec<TermConstraint> = tr.constr.iter().map(|c| c.apply(&s)).collect();
    if !constraint_satisfiable(&constr, &ctx) {
        return JoinResult::SkippedUnsat;
    }
    let (l, el) = normalize_side(&s.apply(&tr.left), sys, &ctx);
    let (r, er) = normalize_side(&s.apply(&tr.right), sys, &ctx);
    if l == r && !el && !er {
        JoinResult::Joined(l)
    } else {
        JoinResult::NotJoined { left: l, right: r, budget_exhausted: el || er }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub rule1: String,
    pub rule2: String,
    pub position: String,
    pub case: String,
    pub left: String,
    pub right: String,
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfluenceReport {
    pub system: String,
    pub triples: usize,
    pub cases: usize,
    pub joined: usize,
    pub not_joined: usize,
    pub skipped_unsat: usize,
    /// Triples over the variable bound, left unclassified.
    pub too_many_vars: Vec<String>,
    pub unjoined: Vec<Witness>,
}

impl ConfluenceReport {
    /// Every enumerated case got a verdict.
    pub fn fully_classified(&self) -> bool {
        self.too_many_vars.is_empty() && self.joined + self.not_joined + self.skipped_unsat == self.cases
    }
}

impl fmt::Display for ConfluenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} triples, {} cases: {} joined, {} not joined, {} unsatisfiable",
            self.system, self.triples, self.cases, self.joined, self.not_joined, self.skipped_unsat
        )?;
        for t in &self.too_many_vars {
            writeln!(f, "  too many variables: {t}")?;
        }
        for w in &self.unjoined {
            writeln!(f, "  {}/{} @ {} [{}]: {} <> {}", w.rule1, w.rule2, w.position, w.case, w.left, w.right)?;
        }
        Ok(())
    }
}

struct TripleOutcome {
    cases: usize,
    joined: usize,
    skipped: usize,
    unjoined: Vec<Witness>,
    too_many: Option<String>,
}

fn classify(tr: &CriticalTriple, sys: &RuleSystem, max_vars: usize) -> TripleOutcome {
    let label = || format!("{}/{} @ {}", tr.overlap.0, tr.overlap.1, tr.overlap.2);
    let vars = tr.case_vars();
    let cases = match enumerate_cases(&vars) {
        Ok(c) if vars.len() <= max_vars => c,
        _ => return TripleOutcome { cases: 0, joined: 0, skipped: 0, unjoined: Vec::new(), too_many: Some(label()) },
    };
    let mut out = TripleOutcome { cases: cases.len(), joined: 0, skipped: 0, unjoined: Vec::new(), too_many: None };
    for case in &cases {
        match join_case(tr, case, sys) {
            JoinResult::Joined(_) => out.joined += 1,
            JoinResult::SkippedUnsat => out.skipped += 1,
            JoinResult::NotJoined { left, right, budget_exhausted } => out.unjoined.push(Witness {
                rule1: tr.overlap.0.clone(),
                rule2: tr.overlap.1.clone(),
                position: tr.overlap.2.to_string(),
                case: case.to_string(),
                left: left.to_string(),
                right: right.to_string(),
                budget_exhausted,
            }),
        }
    }
    out
}

/// Self-overlaps of `sys`, every case of every triple, in parallel.
pub fn analyze_confluence(sys: &RuleSystem) -> ConfluenceReport {
    analyze_confluence_bounded(sys, MAX_VARS)
}

/// As [`analyze_confluence`], but triples with more than `max_vars`
/// variables are listed instead of analyzed. Canon has triples with 4 and 5
/// variables, whose 730 and 9002 cases dominate the run time.
pub fn analyze_confluence_bounded(sys: &RuleSystem, max_vars: usize) -> ConfluenceReport {
    let triples = critical_triples(sys, sys);
    let outcomes: Vec<TripleOutcome> = triples.par_iter().map(|t| classify(t, sys, max_vars)).collect();
    let mut rep = ConfluenceReport { system: format!("{:?}", sys.name), triples: triples.len(), ..Default::default() };
    for o in outcomes {
        rep.cases += o.cases;
        rep.joined += o.joined;
        rep.skipped_unsat += o.skipped;
        rep.not_joined += o.unjoined.len();
        rep.unjoined.extend(o.unjoined);
        rep.too_many_vars.extend(o.too_many);
    }
    rep.unjoined.sort_by(|a, b| (&a.rule1, &a.rule2, &a.position, &a.case).cmp(&(&b.rule1, &b.rule2, &b.position, &b.case)));
    rep.too_many_vars.sort();
    rep
}

fn random_ground(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    let params = ["a", "b", "c", "m", "v"];
    let leaf = |rng: &mut ChaCha8Rng| Term::param(*params.choose(rng).unwrap());
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..5) {
        0 => Term::mul(Term::qnum(rng.gen_range(2..6)), random_ground(rng, depth - 1)),
        1 => Term::sin(random_ground(rng, depth - 1)),
        2 => Term::pow(leaf(rng), Term::qnum(rng.gen_range(2..4))),
        _ => leaf(rng),
    }
}

struct Lifted {
    left: Term,
    right: Term,
    constr: Vec<TermConstraint>,
    bg: BTreeSet<Var>,
}

fn lift_case(tr: &CriticalTriple, case: &CaseAssignment) -> Lifted {
    let lifted = case.substitution();
    let left = lifted.apply(&tr.left);
    let right = lifted.apply(&tr.right);
    let constr = tr.constr.iter().map(|c| c.apply(&lifted)).collect();
    let bg = left.vars().into_iter().chain(right.vars()).filter(|v| v.kind == VarKind::Background).collect();
    Lifted { left, right, constr, bg }
}

/// One random ground substitution respecting the case order and the
/// constraints, or `None` if the draw misses them.
fn ground_instance(lifted: &Lifted, case: &CaseAssignment, ctx: &OrderingContext, rng: &mut ChaCha8Rng) -> Option<Substitution> {
    let mut g = Substitution::new();
    let k = case.blocks.len();
    // Distinct values for quote blocks, decreasing in block order.
    let mut nums: Vec<i64> = (0..k).map(|_| rng.gen_range(-9..10)).collect();
    nums.sort_unstable_by(|a, b| b.cmp(a));
    let mut terms: Vec<Term> = (0..k).map(|_| random_ground(rng, 2)).collect();
    terms.sort_by(|a, b| match compare(b, a, ctx).order {
        Order::GT => std::cmp::Ordering::Greater,
        Order::LT => std::cmp::Ordering::Less,
        _ => std::cmp::Ordering::Equal,
    });
    for i in 0..k {
        let rep = &case.blocks[i][0];
        if case.quote[i] {
            g.bind(quoted_var(rep), Term::num(nums[i]));
        } else {
            g.bind(rep.clone(), terms[i].clone());
        }
    }
    for (i, b) in case.blocks.iter().enumerate() {
        for j in i + 1..k {
            let (x, y) = (&b[0], &case.blocks[j][0]);
            let (sx, sy) = if case.quote[i] {
                (Term::quote(g.apply(&Term::Var(quoted_var(x)))), Term::quote(g.apply(&Term::Var(quoted_var(y)))))
            } else if case.quote[j] {
                continue;
            } else {
                (g.apply(&Term::Var(x.clone())), g.apply(&Term::Var(y.clone())))
            };
            if compare(&sx, &sy, ctx).order != Order::GT {
                return None;
            }
        }
    }
    for v in &lifted.bg {
        if g.get(v).is_none() {
            g.bind(v.clone(), Term::num(rng.gen_range(-5..6)));
        }
    }
    let holds = lifted.constr.iter().map(|c| c.apply(&g)).all(|c| match c {
        TermConstraint::Gt(s, t) => compare(&s, &t, ctx).order == Order::GT,
        TermConstraint::Host(p, t) => p.holds(&t),
    });
    holds.then_some(g)
}

/// Instantiates a joined case with ground terms that respect its order and
/// checks that both sides reach one normal form. Returns the number of
/// instances checked and the first mismatch.
pub fn cross_validate(
    tr: &CriticalTriple,
    case: &CaseAssignment,
    sys: &RuleSystem,
    trials: usize,
    seed: u64,
) -> (usize, Option<(Term, Term)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground_ctx = sys.ordering_or_default();
    let lifted = lift_case(tr, case);
    let mut checked = 0;
    for _ in 0..trials * 20 {
        if checked >= trials {
            break;
        }
        let Some(g) = ground_instance(&lifted, case, &ground_ctx, &mut rng) else { continue };
        checked += 1;
        let (l, _) = normalize_side(&g.apply(&lifted.left), sys, &ground_ctx);
        let (r, _) = normalize_side(&g.apply(&lifted.right), sys, &ground_ctx);
        if l != r {
            return (checked, Some((l, r)));
        }
    }
    (checked, None)
}

/// Looks for a ground instance of a case that the analysis skipped as
/// unsatisfiable. Finding one means the skip was wrong.
pub fn unsat_witness(tr: &CriticalTriple, case: &CaseAssignment, sys: &RuleSystem, trials: usize, seed: u64) -> Option<Substitution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = sys.ordering_or_default();
    let lifted = lift_case(tr, case);
    (0..trials).find_map(|_| ground_instance(&lifted, case, &ctx, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{builtin_system, parse_rules, SystemName};

    fn user(text: &str) -> RuleSystem {
        RuleSystem { name: SystemName::User, rules: parse_rules(text).unwrap(), ordering: Some(OrderingContext::canon()) }
    }

    #[test]
    fn a11_self_overlap() {
        let canon = builtin_system(SystemName::Canon);
        let only = RuleSystem { rules: vec![canon.get("A1.1").unwrap().clone()], ..canon.clone() };
        let tr = critical_triples(&only, &only);
        assert!(tr.iter().any(|t| t.overlap.2 == Position(vec![0])));
        assert!(tr.iter().all(|t| !t.overlap.2.is_root()));
    }

    #[test]
    fn disjoint_heads() {
        let s = user("vars: x\nr1: sin(x) -> x");
        let t = user("vars: x\nr2: cos(x) -> x");
        assert!(critical_triples(&s, &t).is_empty());
    }

    #[test]
    fn quote_sums_overlap() {
        let canon = builtin_system(SystemName::Canon);
        let tr = critical_triples(canon, canon);
        let t = tr
            .iter()
            .find(|t| t.overlap.0 == "A1.3.3" && t.overlap.1 == "A1.3.2" && t.overlap.2 == Position(vec![1]))
            .unwrap();
        assert!(t.left.to_string().contains('['));
        assert!(matches!(join_case(t, &CaseAssignment { blocks: vec![], quote: vec![] }, canon), JoinResult::Joined(_)));
    }

    #[test]
    fn satisfiability() {
        let (x, y) = (Term::fg("x"), Term::fg("y"));
        let ctx = OrderingContext::with_x(vec![Var::fg("x"), Var::fg("y")]);
        assert!(constraint_satisfiable(&[TermConstraint::Gt(x.clone(), y.clone())], &ctx));
        let both = [TermConstraint::Gt(x.clone(), y.clone()), TermConstraint::Gt(y.clone(), x.clone())];
        assert!(!constraint_satisfiable(&both, &ctx));
        assert!(!constraint_satisfiable(&[TermConstraint::Gt(x.clone(), x.clone())], &ctx));
    }

    #[test]
    fn case_counts() {
        let vars: Vec<Var> = ["x", "y", "z", "u", "w", "t"].iter().map(|n| Var::fg(*n)).collect();
        // Σ_k k!·S(n,k)·2^k, computed independently.
        fn count(n: usize) -> usize {
            let mut s = vec![vec![0usize; n + 1]; n + 1];
            s[0][0] = 1;
            for i in 1..=n {
                for k in 1..=i {
                    s[i][k] = k * s[i - 1][k] + s[i - 1][k - 1];
                }
            }
            (0..=n).map(|k| s[n][k] * (1..=k).product::<usize>() * (1 << k)).sum()
        }
        for n in 0..=3 {
            assert_eq!(enumerate_cases(&vars[..n]).unwrap().len(), count(n));
        }
        assert_eq!(count(3), 74);
        assert!(matches!(enumerate_cases(&vars), Err(Error::CaseExplosion { vars: 6, limit: 5 })));
    }

    #[test]
    fn self_quotient_diverges() {
        let canon = builtin_system(SystemName::Canon);
        let mut rules = vec![canon.get("A1.7.2").unwrap().clone()];
        rules.extend(parse_rules("vars: x\ncancel: x*x^[-1] -> [1]").unwrap());
        let sys = RuleSystem { rules, ..canon.clone() };
        let tr = critical_triples(&sys, &sys);
        let t = tr.iter().find(|t| t.overlap.0 == "cancel" && t.overlap.1 == "A1.7.2").unwrap();
        let case = CaseAssignment { blocks: vec![vec![Var::fg("y'")], vec![Var::fg("z'")]], quote: vec![false, false] };
        assert!(matches!(join_case(t, &case, &sys), JoinResult::NotJoined { .. }));
        let rep = analyze_confluence(&sys);
        assert!(rep.unjoined.iter().any(|w| w.rule1 == "cancel"));
    }

    #[test]
    fn clean_joins() {
        let rep = analyze_confluence(builtin_system(SystemName::Clean));
        assert!(rep.fully_classified());
        assert_eq!(rep.not_joined, 0, "{rep}");
    }
}
