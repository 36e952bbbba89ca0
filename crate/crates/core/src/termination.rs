//! Orientedness with respect to ordinary instances, and well-behavedness
//! under the ground-total extension.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::awpo::{compare, dominance_obligation, prove_dominance, weight_with, Dominance, Evidence, Order, OrderingContext, WeightExpr};
use crate::engine::apply_at_root;
use crate::error::{Error, Result};
use crate::rules::{ConstrainedRule, RuleSystem};
use crate::solver::{ExternalSolver, SolverVerdict};
use crate::term::{ratio, Substitution, Sym, Term, Var, VarKind};

/// Largest number of constrained variables whose orders are enumerated.
pub const MAX_CASE_VARS: usize = 5;

/// Rules whose strict weight obligation was discharged by hand.
pub const MANUAL_WAIVERS: &[(&str, &str)] = &[(
    "A1.9.3",
    "w(l) = (4*4^n + 1)^x and w(r) = 1 + x + (4^n + 1)^x. With A = 4^n >= 4 and integer x >= 1, \
     binomial expansion gives (A+1 + 3A)^x >= (A+1)^x + 3A*x > (A+1)^x + 1 + x.",
)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OrientedStrictWeight,
    OrientedWeightEqLpo,
    OrientedGroundTotalOnly,
    WaivedManual,
    NotOriented,
    Unknown,
}

impl Verdict {
    pub fn is_oriented(self) -> bool {
        matches!(self, Verdict::OrientedStrictWeight | Verdict::OrientedWeightEqLpo | Verdict::OrientedGroundTotalOnly)
    }

    pub fn certifies(self) -> bool {
        self.is_oriented() || self == Verdict::WaivedManual
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::OrientedStrictWeight => "oriented_strict_weight",
            Verdict::OrientedWeightEqLpo => "oriented_weight_eq_lpo",
            Verdict::OrientedGroundTotalOnly => "oriented_ground_total_only",
            Verdict::WaivedManual => "waived_manual",
            Verdict::NotOriented => "not_oriented",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverUsed {
    Internal,
    External,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientednessReport {
    pub rule_id: String,
    pub verdict: Verdict,
    pub obligation: (WeightExpr, WeightExpr),
    pub solver_used: SolverUsed,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WellBehavednessReport {
    pub rule_id: String,
    pub clause_a: bool,
    pub clause_b1: bool,
    pub clause_b2: bool,
    pub well_behaved: bool,
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    pub external: Option<ExternalSolver>,
    /// Defaults to [`MANUAL_WAIVERS`] when `None`.
    pub waivers: Option<Vec<String>>,
}

impl AnalysisOptions {
    fn waived(&self, id: &str) -> bool {
        match &self.waivers {
            Some(w) => w.iter().any(|x| x == id),
            None => MANUAL_WAIVERS.iter().any(|(x, _)| *x == id),
        }
    }
}

/// Ordered set partitions of `vars`: every strict order with ties, most
/// significant block first.
fn ordered_partitions(vars: &[Var]) -> Vec<Vec<Vec<Var>>> {
    if vars.is_empty() {
        return vec![Vec::new()];
    }
    let (first, rest) = vars.split_first().unwrap();
    let mut out = Vec::new();
    for p in ordered_partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(first.clone());
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

/// The cases an orientation proof has to cover: each consistent order of
/// the constrained variables, with tied variables identified.
fn constraint_cases(rule: &ConstrainedRule) -> Result<Vec<(Vec<Var>, crate::term::Substitution)>> {
    let pairs: Vec<(&Var, &Var)> = rule.order_constraints().collect();
    if pairs.is_empty() {
        return Ok(vec![(Vec::new(), Default::default())]);
    }
    if let [(x, y)] = pairs.as_slice() {
        return Ok(vec![(vec![(*x).clone(), (*y).clone()], Default::default())]);
    }
    let vars: Vec<Var> = pairs.iter().flat_map(|(a, b)| [(*a).clone(), (*b).clone()]).collect::<BTreeSet<_>>().into_iter().collect();
    if vars.len() > MAX_CASE_VARS {
        return Err(Error::CaseExplosion { vars: vars.len(), limit: MAX_CASE_VARS });
    }
    let mut cases = Vec::new();
    for part in ordered_partitions(&vars) {
        let block = |v: &Var| part.iter().position(|b| b.contains(v)).unwrap();
        if !pairs.iter().all(|(x, y)| block(x) < block(y)) {
            continue;
        }
        let mut sigma = crate::term::Substitution::new();
        let mut chain = Vec::new();
        for b in &part {
            chain.push(b[0].clone());
            for v in &b[1..] {
                sigma.bind(v.clone(), Term::Var(b[0].clone()));
            }
        }
        cases.push((chain, sigma));
    }
    Ok(cases)
}

fn orient_under(rule: &ConstrainedRule, base: &OrderingContext) -> Result<Option<Evidence>> {
    let mut worst = Some(Evidence::ByWeightStrict);
    for (chain, sigma) in constraint_cases(rule)? {
        let ctx = OrderingContext { x: chain, ..base.clone() };
        let (l, r) = (sigma.apply(&rule.lhs), sigma.apply(&rule.rhs));
        let c = compare(&l, &r, &ctx);
        if c.order != Order::GT {
            return Ok(None);
        }
        if c.evidence != Some(Evidence::ByWeightStrict) {
            worst = Some(Evidence::ByWeightEqThenLPO);
        }
    }
    Ok(worst)
}

fn rule_ctx(rule: &ConstrainedRule, base: &OrderingContext) -> OrderingContext {
    OrderingContext { x: rule.order_constraints().flat_map(|(a, b)| [a.clone(), b.clone()]).collect(), ..base.clone() }
}

/// Runs the orientation procedure for one rule. `base` supplies statuses and
/// the weight scheme; its ground-total flag is ignored.
pub fn check_oriented(rule: &ConstrainedRule, base: &OrderingContext, opts: &AnalysisOptions) -> OrientednessReport {
    let plain = base.clone().ground_total(false);
    let ctx = rule_ctx(rule, &plain);
    let obligation = (weight_with(&rule.lhs, ctx.scheme), weight_with(&rule.rhs, ctx.scheme));
    let report = |verdict, solver_used, note: Option<String>| OrientednessReport {
        rule_id: rule.id.clone(),
        verdict,
        obligation: obligation.clone(),
        solver_used,
        note,
    };
    let too_many = |e: Error| report(Verdict::Unknown, SolverUsed::None, Some(e.to_string()));
    match orient_under(rule, &plain) {
        Err(e) => return too_many(e),
        Ok(Some(Evidence::ByWeightStrict)) => return report(Verdict::OrientedStrictWeight, SolverUsed::Internal, None),
        Ok(Some(_)) => return report(Verdict::OrientedWeightEqLpo, SolverUsed::Internal, None),
        Ok(None) => {}
    }
    if let Ok(Some(_)) = orient_under(rule, &plain.clone().ground_total(true)) {
        return report(Verdict::OrientedGroundTotalOnly, SolverUsed::Internal, None);
    }
    let (wl, wr) = &obligation;
    let internal = prove_dominance(wl, wr, false, &ctx);
    let mut solver_used = SolverUsed::Internal;
    let mut undecided = internal == Dominance::Unknown || prove_dominance(wl, wr, true, &ctx) == Dominance::Unknown;
    if undecided {
        if let Some(ext) = &opts.external {
            let script = dominance_obligation(wl, wr, true, &ctx);
            solver_used = SolverUsed::External;
            match ext.check(&script) {
                Ok(SolverVerdict::Unsat) => return report(Verdict::OrientedStrictWeight, SolverUsed::External, None),
                Ok(SolverVerdict::Sat) => undecided = false,
                _ => {}
            }
        }
    }
    if opts.waived(&rule.id) {
        let note = MANUAL_WAIVERS.iter().find(|(id, _)| *id == rule.id).map(|(_, n)| n.to_string());
        return report(Verdict::WaivedManual, SolverUsed::None, note);
    }
    let verdict = if undecided { Verdict::Unknown } else { Verdict::NotOriented };
    report(verdict, solver_used, rule.ordering_hint.clone())
}

/// Every quote of `r` occurs in `l`.
fn quotes_preserved(rule: &ConstrainedRule) -> bool {
    let lq: Vec<&Term> = rule.lhs.quote_positions().into_iter().map(|(_, q)| q).collect();
    rule.rhs.quote_positions().into_iter().all(|(_, q)| lq.contains(&q))
}

/// Positions that hold, or may be instantiated to, a quote.
fn quote_slots(t: &Term) -> BTreeSet<Vec<usize>> {
    t.positions()
        .into_iter()
        .filter(|p| matches!(t.subterm_at(p), Ok(Term::Quote(_) | Term::Var(_))))
        .map(|p| p.0)
        .collect()
}

pub fn check_well_behaved(rule: &ConstrainedRule, base: &OrderingContext, opts: &AnalysisOptions) -> WellBehavednessReport {
    let plain = base.clone().ground_total(false);
    let clause_a = rule.order_constraints().next().is_none()
        && (matches!(orient_under(rule, &plain), Ok(Some(_))) || check_oriented(rule, base, opts).verdict == Verdict::WaivedManual);
    let oriented_t = matches!(orient_under(rule, &plain.ground_total(true)), Ok(Some(_)));
    let clause_b1 = quotes_preserved(rule);
    let clause_b2 = quote_slots(&rule.lhs) == quote_slots(&rule.rhs);
    WellBehavednessReport {
        rule_id: rule.id.clone(),
        clause_a,
        clause_b1,
        clause_b2,
        well_behaved: clause_a || (oriented_t && clause_b1 && clause_b2),
    }
}

#[derive(Clone, Debug)]
pub struct SystemReport {
    pub orientation: Vec<OrientednessReport>,
    pub well_behaved: Vec<WellBehavednessReport>,
    /// Rules excluded from certification by their table annotation.
    pub excluded: Vec<String>,
}

impl SystemReport {
    pub fn certified(&self) -> bool {
        let excluded = |id: &str| self.excluded.iter().any(|e| e == id);
        self.orientation.iter().all(|r| excluded(&r.rule_id) || r.verdict.certifies())
            && self.well_behaved.iter().all(|w| excluded(&w.rule_id) || w.well_behaved)
    }

    pub fn get(&self, id: &str) -> Option<&OrientednessReport> {
        self.orientation.iter().find(|r| r.rule_id == id)
    }

    /// Rules whose verdict certifies, waived ones included.
    pub fn oriented_count(&self) -> usize {
        self.orientation.iter().filter(|r| r.verdict.certifies()).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rules: Vec<serde_json::Value> = self
            .orientation
            .iter()
            .zip(&self.well_behaved)
            .map(|(o, w)| {
                serde_json::json!({
                    "rule_id": o.rule_id,
                    "verdict": o.verdict,
                    "obligation": [o.obligation.0.to_string(), o.obligation.1.to_string()],
                    "solver_used": o.solver_used,
                    "note": o.note,
                    "well_behaved": w,
                    "excluded": self.excluded.contains(&o.rule_id),
                })
            })
            .collect();
        serde_json::json!({
            "rules": rules,
            "oriented": self.oriented_count(),
            "total": self.orientation.len(),
            "certified": self.certified(),
        })
    }
}

impl fmt::Display for SystemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (o, w) in self.orientation.iter().zip(&self.well_behaved) {
            write!(f, "{:<8} {:<28} well_behaved={}", o.rule_id, o.verdict.name(), w.well_behaved)?;
            if self.excluded.contains(&o.rule_id) {
                write!(f, " (waiver: excluded)")?;
            }
            if let Some(n) = &o.note {
                write!(f, "  # {n}")?;
            }
            writeln!(f)?;
        }
        let waived = self.orientation.iter().filter(|r| r.verdict == Verdict::WaivedManual).count();
        write!(f, "{}/{} oriented", self.oriented_count(), self.orientation.len())?;
        if waived > 0 {
            write!(f, " ({waived} by manual waiver)")?;
        }
        writeln!(f)?;
        let status = if self.certified() { "certified terminating" } else { "not certified" };
        if self.excluded.is_empty() {
            writeln!(f, "summary: {status}")
        } else {
            writeln!(f, "summary: {status} (excluding {})", self.excluded.join(", "))
        }
    }
}

/// Both checks over every rule. Rules annotated "Not oriented" are reported
/// but excluded from the summary.
pub fn analyze_system(sys: &RuleSystem, opts: &AnalysisOptions) -> SystemReport {
    let base = sys.ordering_or_default();
    let orientation = sys.rules.iter().map(|r| check_oriented(r, &base, opts)).collect();
    let well_behaved = sys.rules.iter().map(|r| check_well_behaved(r, &base, opts)).collect();
    let excluded = sys
        .rules
        .iter()
        .filter(|r| r.ordering_hint.as_deref() == Some("Not oriented"))
        .map(|r| r.id.clone())
        .collect();
    SystemReport { orientation, well_behaved, excluded }
}

/// Writes one `.smt2` file per rule that is not certified by the internal
/// prover. Returns the written paths.
pub fn emit_obligations(sys: &RuleSystem, report: &SystemReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let base = sys.ordering_or_default().ground_total(false);
    let mut out = Vec::new();
    for o in &report.orientation {
        if o.verdict.is_oriented() {
            continue;
        }
        let Some(rule) = sys.get(&o.rule_id) else { continue };
        let ctx = rule_ctx(rule, &base);
        let text = dominance_obligation(&o.obligation.0, &o.obligation.1, true, &ctx);
        let path = dir.join(format!("{}.smt2", o.rule_id));
        std::fs::write(&path, text)?;
        out.push(path);
    }
    Ok(out)
}

/// Outcome of checking random ground instances of one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpotCheck {
    pub checked: usize,
    /// An instance `(lσ, contractum)` that is not decreasing.
    pub counterexample: Option<(Term, Term)>,
}

fn random_ground(rng: &mut ChaCha8Rng, depth: u32) -> Term {
    let params = ["a", "b", "m", "v", "theta"];
    let param = |rng: &mut ChaCha8Rng| Term::param(*params.choose(rng).expect("non-empty"));
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => Term::qnum(rng.gen_range(-3..6)),
            _ => param(rng),
        };
    }
    match rng.gen_range(0..9) {
        0 => Term::mul(Term::qnum(rng.gen_range(-3..6)), Term::pow(param(rng), Term::qnum(rng.gen_range(1..4)))),
        1 => Term::sin(random_ground(rng, depth - 1)),
        2 => Term::cos(random_ground(rng, depth - 1)),
        3 => Term::add(random_ground(rng, depth - 1), random_ground(rng, depth - 1)),
        4 => Term::mul(random_ground(rng, depth - 1), random_ground(rng, depth - 1)),
        5 => Term::pow(param(rng), Term::qnum(rng.gen_range(-2..4))),
        6 => (0..rng.gen_range(0..3)).fold(Term::qnum(0), |t, _| Term::app(Sym::Succ, vec![t])),
        7 => Term::quote(Term::Num(ratio(rng.gen_range(-6..7), rng.gen_range(1..4)))),
        _ => random_ground(rng, 0),
    }
}

/// Instantiates `rule` with random ground terms (numbers for background
/// variables), keeps the instances the engine would rewrite at the root,
/// and checks that each strictly decreases under `ctx`.
pub fn spot_check(rule: &ConstrainedRule, ctx: &OrderingContext, instances: usize, seed: u64) -> SpotCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<Var> = rule.lhs.vars().into_iter().collect();
    let mut checked = 0;
    for _ in 0..instances * 200 {
        if checked >= instances {
            break;
        }
        let mut sigma = Substitution::new();
        for v in &vars {
            let t = match v.kind {
                VarKind::Background => match rng.gen_range(0..4) {
                    0 => Term::Num(ratio(rng.gen_range(-6..7), rng.gen_range(1..4))),
                    _ => Term::num(rng.gen_range(-4..7)),
                },
                VarKind::Foreground => {
                    let depth = rng.gen_range(0..3);
                    random_ground(&mut rng, depth)
                }
            };
            sigma.bind(v.clone(), t);
        }
        let instance = sigma.apply(&rule.lhs);
        let Some(contractum) = apply_at_root(rule, &instance, ctx) else { continue };
        checked += 1;
        if compare(&instance, &contractum, ctx).order != Order::GT {
            return SpotCheck { checked, counterexample: Some((instance, contractum)) };
        }
    }
    SpotCheck { checked, counterexample: None }
}
