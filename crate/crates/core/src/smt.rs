//! The SMT baseline: equivalence of two equations as a pair of
//! unsatisfiability problems over the reals, with sin and cos
//! uninterpreted and constrained only by a chosen trigonometric axiom set.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{apply_kinematic_substitutions, MarkingScheme, ResponseRecord};
use crate::number::format_number;
use crate::poly::Poly;
use crate::solver::{ExternalSolver, SolverVerdict};
use crate::term::{Equation, Number, Sym, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AxiomSetName {
    Full,
    Reduced,
    Minimal,
}

impl AxiomSetName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(AxiomSetName::Full),
            "reduced" => Some(AxiomSetName::Reduced),
            "minimal" => Some(AxiomSetName::Minimal),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AxiomSetName::Full => "full",
            AxiomSetName::Reduced => "reduced",
            AxiomSetName::Minimal => "minimal",
        }
    }
}

const TRIG_AXIOMS: [&str; 7] = [
    "(forall ((x Real)) (= (sin (- x)) (- (sin x))))",
    "(forall ((x Real)) (= (cos (- x)) (cos x)))",
    "(forall ((x Real)) (= (* (sin x) (sin x)) (- 1 (* (cos x) (cos x)))))",
    "(forall ((x1 Real) (x2 Real)) (= (sin (+ x1 x2)) (+ (* (sin x1) (cos x2)) (* (cos x1) (sin x2)))))",
    "(forall ((x1 Real) (x2 Real)) (= (cos (+ x1 x2)) (- (* (cos x1) (cos x2)) (* (sin x1) (sin x2)))))",
    "(forall ((n Real) (x Real)) (= (cos (* (+ n 2) x)) (- (* 2 (cos x) (cos (* (+ n 1) x))) (cos (* n x)))))",
    "(forall ((n Real) (x Real)) (= (sin (* (+ n 2) x)) (- (* 2 (cos x) (sin (* (+ n 1) x))) (sin (* n x)))))",
];

/// A prefix of the seven trigonometric axioms: all of them, the first
/// three, or the first two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomSet {
    pub name: AxiomSetName,
    pub formulas: Vec<&'static str>,
}

impl AxiomSet {
    pub fn new(name: AxiomSetName) -> Self {
        let n = match name {
            AxiomSetName::Full => 7,
            AxiomSetName::Reduced => 3,
            AxiomSetName::Minimal => 2,
        };
        AxiomSet { name, formulas: TRIG_AXIOMS[..n].to_vec() }
    }
}

fn exponent_value(e: &Term) -> Option<Number> {
    Poly::from_term(e).ok()?.as_constant()
}

fn collect_denominators(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(Sym::Div, args) => out.push(args[1].clone()),
        Term::App(Sym::Pow, args) if exponent_value(&args[1]).is_some_and(|v| v.is_negative()) => {
            out.push(args[0].clone())
        }
        _ => {}
    }
    match t {
        Term::App(_, args) => args.iter().for_each(|a| collect_denominators(a, out)),
        Term::Quote(inner) => collect_denominators(inner, out),
        _ => {}
    }
}

/// The set Z: every syntactic denominator and negative-exponent base, in
/// pre-order and without repeats. Each must be nonzero. Nonzero numeric
/// constants, such as the 2 in an exponent 1/2, are left out.
pub fn nonzero_constraints(eqs: &[Equation]) -> Vec<Term> {
    let mut all = Vec::new();
    for eq in eqs {
        collect_denominators(&eq.lhs, &mut all);
        collect_denominators(&eq.rhs, &mut all);
    }
    let mut seen = BTreeSet::new();
    all.retain(|t| !exponent_value(t).is_some_and(|v| !v.is_zero()) && seen.insert(t.clone()));
    all
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    pub name: String,
    pub radicand: Term,
}

/// A side condition produced while encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    NonNeg(Term),
    Eq(Term, Term),
    NonZero(Term),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RadicalElimination {
    pub fresh_vars: Vec<Radical>,
}

impl RadicalElimination {
    /// `r ≥ 0` and `r·r = radicand` for each fresh variable.
    pub fn residual(&self) -> Vec<Fact> {
        self.fresh_vars
            .iter()
            .flat_map(|r| {
                let v = Term::param(r.name.clone());
                [Fact::NonNeg(v.clone()), Fact::Eq(Term::mul(v.clone(), v), r.radicand.clone())]
            })
            .collect()
    }
}

/// `x^(p/2)` with `p` odd, or `sqrt(x)`, as `(x, p)`.
fn half_power(t: &Term) -> Option<(&Term, Number)> {
    match t {
        Term::App(Sym::Sqrt, args) => Some((&args[0], Number::one())),
        Term::App(Sym::Pow, args) => {
            let e = exponent_value(&args[1])?;
            (*e.denom() == 2.into()).then(|| (&args[0], Number::from(e.numer().clone())))
        }
        _ => None,
    }
}

/// Replaces each square root by a fresh nonnegative variable, innermost
/// first. Equal radicands share one variable across all equations.
pub fn eliminate_radicals_all(eqs: &[Equation]) -> (Vec<Equation>, RadicalElimination) {
    let mut used: BTreeSet<String> = BTreeSet::new();
    for eq in eqs {
        used.extend(eq.lhs.params());
        used.extend(eq.rhs.params());
    }
    let mut elim = RadicalElimination::default();
    let mut next = 0usize;
    let mut replace = |t: Term| -> Term {
        let Some((base, p)) = half_power(&t) else { return t };
        let name = match elim.fresh_vars.iter().find(|r| &r.radicand == base) {
            Some(r) => r.name.clone(),
            None => {
                let name = loop {
                    let n = format!("r_{next}");
                    next += 1;
                    if !used.contains(&n) {
                        break n;
                    }
                };
                elim.fresh_vars.push(Radical { name: name.clone(), radicand: base.clone() });
                name
            }
        };
        let r = Term::param(name);
        if p.is_one() {
            r
        } else {
            Term::pow(r, Term::Num(p))
        }
    };
    let out = eqs.iter().map(|eq| eq.map(|t| t.map_bottom_up(&mut replace))).collect();
    (out, elim)
}

pub fn eliminate_radicals(eq: &Equation) -> (Equation, RadicalElimination) {
    let (mut eqs, elim) = eliminate_radicals_all(std::slice::from_ref(eq));
    (eqs.pop().expect("one equation"), elim)
}

fn smt_number(n: &Number) -> String {
    let mag = |n: &Number| {
        if n.is_integer() {
            n.numer().to_string()
        } else {
            format!("(/ {} {})", n.numer(), n.denom())
        }
    };
    if n.is_negative() {
        format!("(- {})", mag(&-n))
    } else {
        mag(n)
    }
}

fn smt_symbol(name: &str) -> String {
    let simple = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "_.'".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

#[derive(Default)]
struct Encoder {
    uses_pow: bool,
}

impl Encoder {
    fn term(&mut self, t: &Term) -> Result<String> {
        let bin = |enc: &mut Self, op: &str, a: &[Term]| -> Result<String> {
            Ok(format!("({op} {} {})", enc.term(&a[0])?, enc.term(&a[1])?))
        };
        match t {
            Term::Num(n) => Ok(smt_number(n)),
            Term::Param(p) => Ok(smt_symbol(p)),
            Term::Quote(inner) => self.term(inner),
            Term::App(Sym::Add, a) => bin(self, "+", a),
            Term::App(Sym::Mul, a) => bin(self, "*", a),
            Term::App(Sym::Sub, a) => bin(self, "-", a),
            Term::App(Sym::Div, a) => bin(self, "/", a),
            Term::App(Sym::Neg, a) => Ok(format!("(- {})", self.term(&a[0])?)),
            Term::App(Sym::Sin, a) => Ok(format!("(sin {})", self.term(&a[0])?)),
            Term::App(Sym::Cos, a) => Ok(format!("(cos {})", self.term(&a[0])?)),
            Term::App(Sym::Pow, a) => match exponent_value(&a[1]).filter(|e| e.is_integer()) {
                Some(k) => {
                    let base = self.term(&a[0])?;
                    let n = k.abs().to_usize().ok_or_else(|| Error::Domain(format!("exponent {k} too large")))?;
                    let prod = match n {
                        0 => "1".to_string(),
                        1 => base,
                        _ => format!("(* {})", vec![base; n].join(" ")),
                    };
                    Ok(if k.is_negative() { format!("(/ 1 {prod})") } else { prod })
                }
                None => {
                    self.uses_pow = true;
                    bin(self, "pow", a)
                }
            },
            Term::App(Sym::Sqrt, a) => {
                self.uses_pow = true;
                Ok(format!("(pow {} (/ 1 2))", self.term(&a[0])?))
            }
            other => Err(Error::Domain(format!("no SMT-LIB2 encoding for {other}"))),
        }
    }

    fn fact(&mut self, f: &Fact) -> Result<String> {
        Ok(match f {
            Fact::NonNeg(t) => format!("(>= {} 0)", self.term(t)?),
            Fact::Eq(a, b) => format!("(= {} {})", self.term(a)?, self.term(b)?),
            Fact::NonZero(t) => format!("(not (= {} 0))", self.term(t)?),
        })
    }

    fn equation(&mut self, eq: &Equation, negate: bool) -> Result<String> {
        let e = format!("(= {} {})", self.term(&eq.lhs)?, self.term(&eq.rhs)?);
        Ok(if negate { format!("(not {e})") } else { e })
    }
}

/// The two documents whose joint unsatisfiability decides `d ≅ c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceProblem {
    /// `Z ∪ T ∪ {d, ¬c}`.
    pub forward: String,
    /// `Z ∪ T ∪ {c, ¬d}`.
    pub backward: String,
}

pub fn emit_equivalence_problem(d: &Equation, c: &Equation, axioms: &AxiomSet) -> Result<EquivalenceProblem> {
    let z = nonzero_constraints(&[d.clone(), c.clone()]);
    // Denominators go through radical elimination with the equations so a
    // shared radicand gets one variable.
    let mut all = vec![d.clone(), c.clone()];
    all.extend(z.iter().map(|t| Equation { lhs: t.clone(), rhs: Term::num(0) }));
    let (all, elim) = eliminate_radicals_all(&all);
    let (d, c) = (&all[0], &all[1]);
    let mut facts: Vec<Fact> = all[2..].iter().map(|e| Fact::NonZero(e.lhs.clone())).collect();
    facts.extend(elim.residual());

    let mut enc = Encoder::default();
    let fact_lines = facts.iter().map(|f| enc.fact(f)).collect::<Result<Vec<_>>>()?;
    let (d_pos, d_neg) = (enc.equation(d, false)?, enc.equation(d, true)?);
    let (c_pos, c_neg) = (enc.equation(c, false)?, enc.equation(c, true)?);

    let mut params = BTreeSet::new();
    for eq in &all {
        params.extend(eq.lhs.params());
        params.extend(eq.rhs.params());
    }
    for r in &elim.fresh_vars {
        params.insert(r.name.clone());
        params.extend(r.radicand.params());
    }
    let mut head = String::from("(set-logic UFNRA)\n(declare-fun sin (Real) Real)\n(declare-fun cos (Real) Real)\n");
    if enc.uses_pow {
        head.push_str("(declare-fun pow (Real Real) Real)\n");
    }
    for p in &params {
        head.push_str(&format!("(declare-const {} Real)\n", smt_symbol(p)));
    }
    for a in &axioms.formulas {
        head.push_str(&format!("(assert {a})\n"));
    }
    for f in &fact_lines {
        head.push_str(&format!("(assert {f})\n"));
    }
    let doc = |pos: &str, neg: &str| format!("{head}(assert {pos})\n(assert {neg})\n(check-sat)\n");
    Ok(EquivalenceProblem { forward: doc(&d_pos, &c_neg), backward: doc(&c_pos, &d_neg) })
}

#[derive(Debug, PartialEq)]
enum Sexp<'a> {
    Atom(&'a str),
    List(Vec<Sexp<'a>>),
}

fn tokenize(doc: &str) -> std::result::Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let bytes = doc.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' | b')' => {
                out.push(&doc[i..i + 1]);
                i += 1;
            }
            b'|' => {
                let end = doc[i + 1..].find('|').ok_or_else(|| format!("unterminated |symbol| at byte {i}"))?;
                out.push(&doc[i..i + end + 2]);
                i += end + 2;
            }
            b'"' => {
                let end = doc[i + 1..].find('"').ok_or_else(|| format!("unterminated string at byte {i}"))?;
                out.push(&doc[i..i + end + 2]);
                i += end + 2;
            }
            _ => {
                let start = i;
                while i < bytes.len() && !b" \t\n\r();|\"".contains(&bytes[i]) {
                    i += 1;
                }
                out.push(&doc[start..i]);
            }
        }
    }
    Ok(out)
}

fn parse_sexps<'a>(tokens: &[&'a str]) -> std::result::Result<Vec<Sexp<'a>>, String> {
    let mut stack: Vec<Vec<Sexp<'a>>> = vec![Vec::new()];
    for &tok in tokens {
        match tok {
            "(" => stack.push(Vec::new()),
            ")" => {
                let list = stack.pop().expect("non-empty stack");
                let parent = stack.last_mut().ok_or("unbalanced `)`")?;
                parent.push(Sexp::List(list));
            }
            atom => stack.last_mut().expect("non-empty stack").push(Sexp::Atom(atom)),
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced `(`".into());
    }
    Ok(stack.pop().expect("top level"))
}

/// A structural SMT-LIB2 check: balanced s-expressions, every top-level
/// form a known command with the right shape, and every symbol applied in
/// a term either declared, bound by `forall`, or a theory symbol.
pub fn check_smt_syntax(doc: &str) -> std::result::Result<(), String> {
    const THEORY: [&str; 12] = ["+", "-", "*", "/", "=", ">=", "<=", ">", "<", "not", "and", "or"];
    let forms = parse_sexps(&tokenize(doc)?)?;
    let mut declared: BTreeSet<&str> = BTreeSet::new();
    fn is_numeral(s: &str) -> bool {
        !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
    }
    fn check_term<'a>(t: &Sexp<'a>, declared: &BTreeSet<&'a str>, bound: &[&'a str]) -> std::result::Result<(), String> {
        match t {
            Sexp::Atom(a) => {
                if is_numeral(a) || declared.contains(a) || bound.contains(a) || *a == "true" || *a == "false" {
                    Ok(())
                } else {
                    Err(format!("undeclared symbol `{a}`"))
                }
            }
            Sexp::List(items) => match items.as_slice() {
                [Sexp::Atom("forall"), Sexp::List(vars), body] => {
                    let mut inner = bound.to_vec();
                    for v in vars {
                        match v {
                            Sexp::List(pair) if matches!(pair.as_slice(), [Sexp::Atom(_), Sexp::Atom("Real")]) => {
                                if let Sexp::Atom(name) = pair[0] {
                                    inner.push(name);
                                }
                            }
                            _ => return Err("malformed forall binder".into()),
                        }
                    }
                    check_term(body, declared, &inner)
                }
                [Sexp::Atom(f), args @ ..] if !args.is_empty() => {
                    if !(THEORY.contains(f) || declared.contains(f)) {
                        return Err(format!("unknown function `{f}`"));
                    }
                    args.iter().try_for_each(|a| check_term(a, declared, bound))
                }
                _ => Err("malformed term".into()),
            },
        }
    }
    for form in &forms {
        let Sexp::List(items) = form else { return Err("top-level atom".into()) };
        match items.as_slice() {
            [Sexp::Atom("set-logic"), Sexp::Atom(_)] | [Sexp::Atom("check-sat")] | [Sexp::Atom("exit")] => {}
            [Sexp::Atom("set-option"), Sexp::Atom(_), _] => {}
            [Sexp::Atom("declare-const"), Sexp::Atom(name), Sexp::Atom("Real")] => {
                declared.insert(name);
            }
            [Sexp::Atom("declare-fun"), Sexp::Atom(name), Sexp::List(args), Sexp::Atom("Real")]
                if args.iter().all(|a| *a == Sexp::Atom("Real")) =>
            {
                declared.insert(name);
            }
            [Sexp::Atom("assert"), t] => check_term(t, &declared, &[])?,
            _ => return Err("unknown or malformed command".into()),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmtEntryOutcome {
    pub entry: usize,
    pub awarded: bool,
    /// Index of the equation proved equivalent.
    pub witness: Option<usize>,
    /// Some check ended in unknown, a timeout, or had no solver.
    pub unknown: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtGrade {
    pub mark: Number,
    pub entries: Vec<SmtEntryOutcome>,
}

impl SmtGrade {
    pub fn flagged(&self) -> bool {
        self.entries.iter().any(|e| e.unknown && !e.awarded)
    }
}

/// `d ≅ c` iff both documents are unsat. Without a solver the answer is
/// always unknown.
pub fn smt_equivalent(
    d: &Equation,
    c: &Equation,
    axioms: &AxiomSet,
    solver: Option<&ExternalSolver>,
) -> Result<SolverVerdict> {
    let Ok(problem) = emit_equivalence_problem(d, c, axioms) else { return Ok(SolverVerdict::Unknown) };
    let Some(solver) = solver else { return Ok(SolverVerdict::Unknown) };
    match solver.check(&problem.forward)? {
        SolverVerdict::Unsat => solver.check(&problem.backward),
        other => Ok(other),
    }
}

/// `Σ_k w_k · [∃ j. d_j ≅ c_k]` after the kinematic substitutions.
pub fn grade_smt(
    resp: &ResponseRecord,
    scheme: &MarkingScheme,
    axioms: &AxiomSet,
    solver: Option<&ExternalSolver>,
) -> Result<SmtGrade> {
    let eqs: Vec<Equation> = resp.equations.iter().map(apply_kinematic_substitutions).collect();
    let mut mark = Number::zero();
    let mut entries = Vec::new();
    for (k, entry) in scheme.entries.iter().enumerate() {
        let c = apply_kinematic_substitutions(&entry.equation);
        let mut outcome = SmtEntryOutcome { entry: k, awarded: false, witness: None, unknown: false };
        for (j, d) in eqs.iter().enumerate() {
            match smt_equivalent(d, &c, axioms, solver)? {
                SolverVerdict::Unsat => {
                    outcome.awarded = true;
                    outcome.witness = Some(j);
                    mark += &entry.weight;
                    break;
                }
                SolverVerdict::Unknown => outcome.unknown = true,
                SolverVerdict::Sat => {}
            }
        }
        entries.push(outcome);
    }
    Ok(SmtGrade { mark, entries })
}

fn ser_number<S: serde::Serializer>(n: &Number, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_number(n))
}

fn ser_opt_number<S: serde::Serializer>(n: &Option<Number>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match n {
        Some(n) => s.serialize_some(&format_number(n)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmtStudentGrade {
    pub line: usize,
    pub student_id: String,
    #[serde(serialize_with = "ser_number")]
    pub mark: Number,
    #[serde(serialize_with = "ser_opt_number")]
    pub ground_truth: Option<Number>,
    pub fail: bool,
    pub flagged: bool,
    pub reason: Option<String>,
    pub entries: Vec<SmtEntryOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmtReport {
    pub question_id: String,
    pub axioms: AxiomSetName,
    pub solver: Option<String>,
    pub records: usize,
    pub fails: usize,
    pub flagged: usize,
    pub wall_ms: u128,
    pub students: Vec<SmtStudentGrade>,
}

impl fmt::Display for SmtReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>6} {:>6}  status", "student", "mark", "truth")?;
        for s in &self.students {
            let truth = s.ground_truth.as_ref().map(format_number).unwrap_or_else(|| "-".into());
            let status = match (s.fail, s.flagged) {
                (true, true) => "FAIL unknown",
                (true, false) => "FAIL",
                (false, true) => "ok unknown",
                (false, false) => "ok",
            };
            write!(f, "{:<12} {:>6} {:>6}  {status}", s.student_id, format_number(&s.mark), truth)?;
            if let Some(r) = &s.reason {
                write!(f, " ({r})")?;
            }
            writeln!(f)?;
        }
        let solver = self.solver.as_deref().unwrap_or("none, emission only");
        writeln!(
            f,
            "{}: {} records, {} fails, {} flagged unknown, axioms {}, solver {solver}, {} ms",
            self.question_id,
            self.records,
            self.fails,
            self.flagged,
            self.axioms.name(),
            self.wall_ms
        )
    }
}

/// Grades a corpus through the solver. A missing solver binary aborts the
/// run; a bad record is a fail.
pub fn run_corpus_smt(
    corpus: &str,
    scheme: &MarkingScheme,
    axioms: &AxiomSet,
    solver: Option<&ExternalSolver>,
) -> Result<SmtReport> {
    let start = Instant::now();
    let lines: Vec<(usize, &str)> =
        corpus.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let students = lines
        .par_iter()
        .map(|(line, text)| -> Result<SmtStudentGrade> {
            let rec = match ResponseRecord::from_json_line(text) {
                Ok(r) => r,
                Err(e) => {
                    return Ok(SmtStudentGrade {
                        line: *line,
                        student_id: format!("line {line}"),
                        mark: Number::zero(),
                        ground_truth: None,
                        fail: true,
                        flagged: false,
                        reason: Some(e.to_string()),
                        entries: Vec::new(),
                    })
                }
            };
            let g = grade_smt(&rec, scheme, axioms, solver)?;
            Ok(SmtStudentGrade {
                line: *line,
                student_id: rec.student_id,
                fail: rec.ground_truth_mark.as_ref().is_some_and(|t| *t != g.mark),
                flagged: g.flagged(),
                mark: g.mark,
                ground_truth: rec.ground_truth_mark,
                reason: (!rec.unparsed.is_empty()).then(|| format!("{} unparsed equation(s)", rec.unparsed.len())),
                entries: g.entries,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SmtReport {
        question_id: scheme.question_id.clone(),
        axioms: axioms.name,
        solver: solver.map(|s| std::iter::once(s.program.clone()).chain(s.args.clone()).collect::<Vec<_>>().join(" ")),
        records: students.len(),
        fails: students.iter().filter(|s| s.fail).count(),
        flagged: students.iter().filter(|s| s.flagged).count(),
        wall_ms: start.elapsed().as_millis(),
        students,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::time::Duration;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::eval::eval_numeric;
    use crate::parse::{parse_equation, parse_expr};
    use crate::term::{int, ratio};

    fn eq(s: &str) -> Equation {
        parse_equation(s).unwrap()
    }

    #[test]
    fn axiom_sets_are_nested() {
        let [full, reduced, minimal] = [AxiomSetName::Full, AxiomSetName::Reduced, AxiomSetName::Minimal].map(AxiomSet::new);
        assert_eq!(full.formulas.len(), 7);
        assert!(minimal.formulas.iter().all(|f| reduced.formulas.contains(f)));
        assert!(reduced.formulas.iter().all(|f| full.formulas.contains(f)));
        assert!(minimal.formulas.len() < reduced.formulas.len() && reduced.formulas.len() < full.formulas.len());
        assert!(!minimal.formulas.iter().any(|f| f.contains("(* (sin x) (sin x))")));
    }

    #[test]
    fn denominators() {
        assert_eq!(nonzero_constraints(&[eq("v2 = ((m1*v0^2 - m1*v1^2)/m2)^(1/2)")]), vec![Term::param("m_2")]);
        assert!(nonzero_constraints(&[eq("m1*v0^2 = m1*v1^2 + m2*v2^2")]).is_empty());
        let nested = nonzero_constraints(&[eq("x = a/(b/c)")]);
        assert_eq!(nested, vec![parse_expr("b/c").unwrap(), Term::param("c")]);
        assert_eq!(nonzero_constraints(&[eq("x = a*b^(-1) + b^(-2)")]), vec![Term::param("b")]);
    }

    #[test]
    fn single_radical() {
        let (out, elim) = eliminate_radicals(&eq("E0 = m1*cos(theta) + (m2 - m1)^(1/2)"));
        assert_eq!(out, eq("E0 = m1*cos(theta) + r0"));
        assert_eq!(elim.fresh_vars, vec![Radical { name: "r_0".into(), radicand: parse_expr("m2 - m1").unwrap() }]);
        let r = Term::param("r_0");
        assert_eq!(
            elim.residual(),
            vec![Fact::NonNeg(r.clone()), Fact::Eq(Term::mul(r.clone(), r), parse_expr("m2 - m1").unwrap())]
        );
    }

    #[test]
    fn radical_free_is_unchanged() {
        let e = eq("m1*v0 = m1*v1 + m2*v2");
        assert_eq!(eliminate_radicals(&e), (e.clone(), RadicalElimination::default()));
        let (once, _) = eliminate_radicals(&eq("y = sqrt(x)"));
        assert_eq!(eliminate_radicals(&once).1, RadicalElimination::default());
    }

    #[test]
    fn fresh_names_avoid_parameters() {
        let (out, elim) = eliminate_radicals(&eq("r0 = sqrt(x) + x^(3/2) + sqrt(y)"));
        let names: Vec<_> = elim.fresh_vars.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["r_1", "r_2"]);
        assert_eq!(out, eq("r0 = r1 + r1^3 + r2"));
    }

    /// Truth of the equation before and after elimination agrees on
    /// valuations with nonnegative radicands, half of which satisfy it.
    #[test]
    fn elimination_is_equisatisfiable() {
        let original = eq("y = sqrt(x) + 2*(x*z + 1)^(1/2) - z");
        let (out, elim) = eliminate_radicals(&original);
        assert_eq!(elim.fresh_vars.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let holds = |e: &Equation, env: &BTreeMap<String, f64>| {
            let d = eval_numeric(&e.lhs, env).unwrap() - eval_numeric(&e.rhs, env).unwrap();
            d.abs() < 1e-9
        };
        let mut agreeing_true = 0;
        for i in 0..200 {
            let x: f64 = rng.gen_range(0.0..4.0);
            let z: f64 = rng.gen_range(0.0..4.0);
            let mut y = x.sqrt() + 2.0 * (x * z + 1.0).sqrt() - z;
            if i % 2 == 1 {
                y += rng.gen_range(0.5..2.0);
            }
            let mut env: BTreeMap<String, f64> = [("x", x), ("y", y), ("z", z)].map(|(k, v)| (k.to_string(), v)).into();
            for r in &elim.fresh_vars {
                let v = eval_numeric(&r.radicand, &env).unwrap();
                assert!(v >= 0.0);
                env.insert(r.name.clone(), v.sqrt());
            }
            assert_eq!(holds(&original, &env), holds(&out, &env), "valuation {i}");
            agreeing_true += holds(&out, &env) as usize;
        }
        assert_eq!(agreeing_true, 100);
    }

    #[test]
    fn radicand_parameters_are_declared() {
        let p = emit_equivalence_problem(&eq("m1 = sqrt(a + a)"), &eq("m1 = 2"), &AxiomSet::new(AxiomSetName::Minimal)).unwrap();
        assert!(p.forward.contains("(declare-const a Real)"));
        check_smt_syntax(&p.forward).unwrap();
    }

    #[test]
    fn numbers_and_symbols() {
        assert_eq!(smt_number(&int(-3)), "(- 3)");
        assert_eq!(smt_number(&ratio(-1, 2)), "(- (/ 1 2))");
        assert_eq!(smt_symbol("v_0"), "v_0");
        assert_eq!(smt_symbol("weird name"), "|weird name|");
    }

    #[test]
    fn emitted_documents_parse() {
        let d = eq("v2 = ((m1*v0^2 - m1*v1^2)/m2)^(1/2)");
        let c = apply_kinematic_substitutions(&eq("E0 = E1 + E2"));
        for name in [AxiomSetName::Full, AxiomSetName::Reduced, AxiomSetName::Minimal] {
            let p = emit_equivalence_problem(&d, &c, &AxiomSet::new(name)).unwrap();
            for doc in [&p.forward, &p.backward] {
                check_smt_syntax(doc).unwrap_or_else(|e| panic!("{e}\n{doc}"));
                assert!(doc.contains("(assert (not (= m_2 0)))"));
                assert!(doc.contains("(assert (>= r_0 0))"));
                assert!(doc.ends_with("(check-sat)\n"));
            }
        }
    }

    #[test]
    fn directions_swap_premise_and_goal() {
        let d = eq("a = b");
        let p = emit_equivalence_problem(&d, &d, &AxiomSet::new(AxiomSetName::Minimal)).unwrap();
        assert_eq!(p.forward, p.backward);
        assert!(p.forward.contains("(assert (= a b))\n(assert (not (= a b)))"));
        let p = emit_equivalence_problem(&eq("a = b"), &eq("b = c"), &AxiomSet::new(AxiomSetName::Minimal)).unwrap();
        assert!(p.forward.contains("(assert (= a b))\n(assert (not (= b c)))"));
        assert!(p.backward.contains("(assert (= b c))\n(assert (not (= a b)))"));
    }

    #[test]
    fn checker_rejects_bad_documents() {
        assert!(check_smt_syntax("(assert (= x 1))").is_err());
        assert!(check_smt_syntax("(declare-const x Real)(assert (= x 1)").is_err());
        assert!(check_smt_syntax("(declare-const x Real)(assert (= x 1)))").is_err());
        assert!(check_smt_syntax("(declare-const x Real)(frobnicate x)").is_err());
        assert!(check_smt_syntax("(declare-const x Real)(assert (tan x))").is_err());
        assert!(check_smt_syntax("(declare-const x Real)(assert (forall ((y Real)) (= x y)))").is_ok());
    }

    fn q25() -> MarkingScheme {
        MarkingScheme::from_json(r#"{"question_id": "q25", "entries": [{"equation": "E0 = E1 + E2", "weight": 1, "target": "v0"}]}"#)
            .unwrap()
    }

    fn record(eqs: &[&str]) -> ResponseRecord {
        ResponseRecord::from_json_line(&serde_json::json!({"student_id": "s", "equations": eqs}).to_string()).unwrap()
    }

    #[test]
    fn emission_only_mode_flags_everything() {
        let g = grade_smt(&record(&["E0 = E1 + E2"]), &q25(), &AxiomSet::new(AxiomSetName::Minimal), None).unwrap();
        assert_eq!(g.mark, int(0));
        assert!(g.flagged());
        let blank = grade_smt(&record(&[]), &q25(), &AxiomSet::new(AxiomSetName::Minimal), None).unwrap();
        assert!(!blank.flagged());
    }

    #[cfg(unix)]
    #[test]
    fn scripted_solver_decides() {
        let always = |v: &str| ExternalSolver {
            program: "sh".into(),
            args: vec!["-c".into(), format!("cat >/dev/null; echo {v}")],
            timeout: Duration::from_secs(5),
        };
        let axioms = AxiomSet::new(AxiomSetName::Minimal);
        let yes = grade_smt(&record(&["p0 = p1 + p2", "E0 = E1 + E2"]), &q25(), &axioms, Some(&always("unsat"))).unwrap();
        assert_eq!((yes.mark.clone(), yes.entries[0].witness), (int(1), Some(0)));
        let no = grade_smt(&record(&["p0 = p1 + p2"]), &q25(), &axioms, Some(&always("sat"))).unwrap();
        assert_eq!(no.mark, int(0));
        assert!(!no.flagged());
        let unsure = grade_smt(&record(&["p0 = p1 + p2"]), &q25(), &axioms, Some(&always("unknown"))).unwrap();
        assert!(unsure.flagged());
        let missing = ExternalSolver::from_command("no-such-solver-xyz", Duration::from_secs(1)).unwrap();
        assert!(grade_smt(&record(&["a = b"]), &q25(), &axioms, Some(&missing)).is_err());
    }
}
