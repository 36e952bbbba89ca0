//! Rewriting with simplification, normal forms, and the ARI pipeline
//! `↓Norm ∘ ↓Canon ∘ ↓Simp ∘ ↓Clean`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::awpo::{compare, Order, OrderingContext};
use crate::canon::deep_simp;
use crate::error::{Error, Result};
use crate::rules::{builtin_system, canon_with_tprime, ConstrainedRule, Constraint, RuleSystem, SystemName};
use crate::term::{Number, Position, Sym, Term};
use crate::unify::match_term;

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule_id: String,
    pub position: Position,
    /// The whole term after the step.
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteTrace {
    pub input: Term,
    /// Recorded only when tracing is on.
    pub steps: Vec<Step>,
    pub output: Term,
    pub step_count: usize,
}

impl RewriteTrace {
    /// `step N: id @ [pos] => term`, numbered from 1.
    pub fn lines(&self) -> Vec<String> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| format!("step {}: {} @ {} => {}", i + 1, s.rule_id, s.position, s.term))
            .collect()
    }
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn fold_host_arith(t: Term) -> Term {
    t.map_bottom_up(&mut |u| match &u {
        Term::App(Sym::Sub, args) => match (&args[0], &args[1]) {
            (Term::Num(a), Term::Num(b)) => Term::Num(a - b),
            _ => u,
        },
        _ => u,
    })
}

/// Applies `rule` at the root of `t`: match, check the constraint, instantiate
/// and simplify inside quotes. A contractum whose quotes do not simplify to
/// numbers (say `[sin(1)]` or `[1/0]`) blocks the step.
pub fn apply_at_root(rule: &ConstrainedRule, t: &Term, ctx: &OrderingContext) -> Option<Term> {
    let sigma = match_term(&rule.lhs, t)?;
    for c in &rule.constraint {
        let ok = match c {
            Constraint::OrderGt(x, y) => {
                let (sx, sy) = (sigma.get(x)?, sigma.get(y)?);
                compare(sx, sy, ctx).order == Order::GT
            }
            Constraint::Host(p, v) => p.holds(sigma.get(v)?),
        };
        if !ok {
            return None;
        }
    }
    let mut rhs = sigma.apply(&rule.rhs);
    if rule.host_arith() {
        rhs = fold_host_arith(rhs);
    }
    deep_simp(&rhs).ok()
}

fn first_rule_at_root<'r>(sys: &'r RuleSystem, t: &Term, ctx: &OrderingContext) -> Option<(&'r str, Term)> {
    sys.rules.iter().find_map(|r| apply_at_root(r, t, ctx).map(|u| (r.id.as_str(), u)))
}

/// One innermost-leftmost step. Returns `None` iff `t` is a normal form.
pub fn rewrite_step(t: &Term, sys: &RuleSystem) -> Option<(Term, String, Position)> {
    rewrite_step_with(t, sys, &sys.ordering_or_default())
}

pub fn rewrite_step_with(t: &Term, sys: &RuleSystem, ctx: &OrderingContext) -> Option<(Term, String, Position)> {
    fn go(t: &Term, sys: &RuleSystem, ctx: &OrderingContext, path: &mut Vec<usize>) -> Option<(Term, String, Position)> {
        for (i, a) in t.args().iter().enumerate() {
            path.push(i);
            let found = go(a, sys, ctx, path);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        first_rule_at_root(sys, t, ctx).map(|(id, u)| (u, id.to_string(), Position(path.clone())))
    }
    let (u, id, pos) = go(t, sys, ctx, &mut Vec::new())?;
    let whole = t.replace_at(&pos, u).ok()?;
    Some((whole, id, pos))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    InnermostLeftmost,
    /// Random position order, then a random applicable rule there.
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct NormalizeOptions {
    pub budget: usize,
    pub strategy: Strategy,
    pub trace: bool,
    /// Overrides the system's ordering preset.
    pub ordering: Option<OrderingContext>,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions { budget: DEFAULT_BUDGET, strategy: Strategy::InnermostLeftmost, trace: false, ordering: None }
    }
}

struct Innermost<'a> {
    sys: &'a RuleSystem,
    ctx: OrderingContext,
    budget: usize,
    steps: usize,
    /// (rule, position, replacement) when tracing.
    log: Option<Vec<(String, Position, Term)>>,
}

impl Innermost<'_> {
    fn run(&mut self, t: Term, path: &mut Vec<usize>) -> Result<Term> {
        let mut t = t;
        loop {
            if let Term::App(sym, args) = &t {
                let mut new_args = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    new_args.push(self.run(a.clone(), path)?);
                    path.pop();
                }
                t = Term::App(*sym, new_args);
            } else if let Term::Quote(inner) = &t {
                path.push(0);
                let inner = self.run(inner.as_ref().clone(), path)?;
                path.pop();
                t = Term::quote(inner);
            }
            let Some((id, u)) = first_rule_at_root(self.sys, &t, &self.ctx) else {
                return Ok(t);
            };
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::BudgetExhausted(self.budget));
            }
            if let Some(log) = &mut self.log {
                log.push((id.to_string(), Position(path.clone()), u.clone()));
            }
            t = u;
        }
    }
}

/// Visits positions in a random order and, at the first one with a redex,
/// applies a random applicable rule.
fn random_step(t: &Term, sys: &RuleSystem, ctx: &OrderingContext, rng: &mut ChaCha8Rng) -> Option<(Term, String, Position)> {
    let mut positions = t.positions();
    positions.shuffle(rng);
    for p in positions {
        let sub = t.subterm_at(&p).ok()?;
        let mut found: Vec<(&str, Term)> =
            sys.rules.iter().filter_map(|r| apply_at_root(r, sub, ctx).map(|u| (r.id.as_str(), u))).collect();
        if found.is_empty() {
            continue;
        }
        let (id, u) = found.swap_remove(rng.gen_range(0..found.len()));
        return Some((t.replace_at(&p, u).ok()?, id.to_string(), p));
    }
    None
}

/// `t↓R` with a trace. Fails with `BudgetExhausted` after `budget` steps.
pub fn normal_form_traced(t: &Term, sys: &RuleSystem, opts: &NormalizeOptions) -> Result<RewriteTrace> {
    let ctx = opts.ordering.clone().unwrap_or_else(|| sys.ordering_or_default());
    match opts.strategy {
        Strategy::InnermostLeftmost => {
            let mut run = Innermost { sys, ctx, budget: opts.budget, steps: 0, log: opts.trace.then(Vec::new) };
            let output = run.run(t.clone(), &mut Vec::new())?;
            let mut steps = Vec::new();
            let mut cur = t.clone();
            for (rule_id, position, u) in run.log.unwrap_or_default() {
                cur = cur.replace_at(&position, u)?;
                steps.push(Step { rule_id, position, term: cur.clone() });
            }
            debug_assert!(!opts.trace || cur == output);
            Ok(RewriteTrace { input: t.clone(), steps, output, step_count: run.steps })
        }
        Strategy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cur = t.clone();
            let mut steps = Vec::new();
            let mut n = 0;
            while let Some((u, rule_id, position)) = random_step(&cur, sys, &ctx, &mut rng) {
                n += 1;
                if n > opts.budget {
                    return Err(Error::BudgetExhausted(opts.budget));
                }
                if opts.trace {
                    steps.push(Step { rule_id, position, term: u.clone() });
                }
                cur = u;
            }
            Ok(RewriteTrace { input: t.clone(), steps, output: cur, step_count: n })
        }
    }
}

pub fn normal_form(t: &Term, sys: &RuleSystem) -> Result<Term> {
    Ok(normal_form_traced(t, sys, &NormalizeOptions::default())?.output)
}

#[derive(Clone, Debug, Default)]
pub struct AriOptions {
    /// Adds the trig-constant rules to Canon.
    pub tprime: bool,
    pub normalize: NormalizeOptions,
}

#[derive(Clone, Debug)]
pub struct AriOutcome {
    pub term: Term,
    /// One trace per stage: Norm, Canon, Simp, Clean.
    pub stages: Vec<(SystemName, RewriteTrace)>,
}

impl AriOutcome {
    pub fn step_count(&self) -> usize {
        self.stages.iter().map(|(_, t)| t.step_count).sum()
    }
}

/// `sqrt(x)` becomes `x^(1/2)` before Norm sees it.
pub fn desugar(t: &Term) -> Term {
    t.map_bottom_up(&mut |u| match u {
        Term::App(Sym::Sqrt, mut args) => Term::pow(args.remove(0), Term::Num(Number::new(1.into(), 2.into()))),
        other => other,
    })
}

pub fn ari_normalize_with(t: &Term, opts: &AriOptions) -> Result<AriOutcome> {
    let canon = if opts.tprime { canon_with_tprime() } else { builtin_system(SystemName::Canon) };
    let systems = [
        (SystemName::Norm, builtin_system(SystemName::Norm)),
        (SystemName::Canon, canon),
        (SystemName::Simp, builtin_system(SystemName::Simp)),
        (SystemName::Clean, builtin_system(SystemName::Clean)),
    ];
    let mut cur = Term::app(Sym::Normalize, vec![desugar(t)]);
    let mut stages = Vec::new();
    for (name, sys) in systems {
        let trace = normal_form_traced(&cur, sys, &opts.normalize)?;
        cur = trace.output.clone();
        stages.push((name, trace));
    }
    Ok(AriOutcome { term: cur, stages })
}

pub fn ari_normalize(t: &Term) -> Result<Term> {
    Ok(ari_normalize_with(t, &AriOptions::default())?.term)
}

/// `s ≈ t`: both sides reach the same ARI normal form. Failures count as
/// not equal.
pub fn algebraically_equal(s: &Term, t: &Term) -> bool {
    algebraically_equal_with(s, t, &AriOptions::default())
}

pub fn algebraically_equal_with(s: &Term, t: &Term, opts: &AriOptions) -> bool {
    if s == t {
        return true;
    }
    match (ari_normalize_with(s, opts), ari_normalize_with(t, opts)) {
        (Ok(a), Ok(b)) => a.term == b.term,
        _ => false,
    }
}
