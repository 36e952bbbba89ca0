//! Marking: energy/momentum substitutions, the weighted mark formula, and
//! corpus runs against ground-truth marks.
//!
//! Corpus lines look like
//! `{"student_id": "s1", "equations": ["E0 = E1 + E2"], "mark": 1}` and a
//! scheme like
//! `{"question_id": "q25", "entries": [{"equation": "E0 = E1 + E2", "weight": 1, "target": "v0"}]}`.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::AriOptions;
use crate::eqsolver::{solve_for_counted, SolveResult};
use crate::error::{Error, Result};
use crate::number::{format_number, parse_decimal};
use crate::parse::{normalize_ident, parse_equation, parse_expr};
use crate::term::{Equation, Number, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeEntry {
    pub equation: Equation,
    pub weight: Number,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkingScheme {
    pub question_id: String,
    pub entries: Vec<SchemeEntry>,
}

#[derive(Deserialize)]
struct RawEntry {
    equation: String,
    weight: serde_json::Number,
    target: String,
}

#[derive(Deserialize)]
struct RawScheme {
    question_id: String,
    entries: Vec<RawEntry>,
}

fn json_number(n: &serde_json::Number) -> Option<Number> {
    parse_decimal(&n.to_string())
}

impl MarkingScheme {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawScheme = serde_json::from_str(text).map_err(|e| Error::Io(format!("scheme: {e}")))?;
        let mut entries = Vec::new();
        for e in raw.entries {
            let weight = json_number(&e.weight).ok_or_else(|| Error::Io(format!("bad weight {}", e.weight)))?;
            entries.push(SchemeEntry { equation: parse_equation(&e.equation)?, weight, target: normalize_ident(&e.target) });
        }
        Ok(MarkingScheme { question_id: raw.question_id, entries })
    }

    pub fn max_mark(&self) -> Number {
        self.entries.iter().map(|e| e.weight.clone()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseRecord {
    pub student_id: String,
    pub equations: Vec<Equation>,
    pub ground_truth_mark: Option<Number>,
    /// Equation strings that did not parse; they cannot earn marks.
    pub unparsed: Vec<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    student_id: serde_json::Value,
    #[serde(default)]
    equations: Vec<String>,
    #[serde(default)]
    mark: Option<serde_json::Number>,
}

impl ResponseRecord {
    pub fn from_json_line(line: &str) -> Result<Self> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Io(format!("record: {e}")))?;
        let student_id = match raw.student_id {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        };
        let mut equations = Vec::new();
        let mut unparsed = Vec::new();
        for s in raw.equations {
            match parse_equation(&s) {
                Ok(eq) => equations.push(eq),
                Err(_) => unparsed.push(s),
            }
        }
        let ground_truth_mark = match raw.mark {
            Some(n) => Some(json_number(&n).ok_or_else(|| Error::Io(format!("bad mark {n}")))?),
            None => None,
        };
        Ok(ResponseRecord { student_id, equations, ground_truth_mark, unparsed })
    }
}

fn kinematic_table() -> &'static [(String, Term)] {
    static TABLE: std::sync::OnceLock<Vec<(String, Term)>> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        [
            ("E0", "m1*v0^2/2"),
            ("p0", "m1*v0"),
            ("E1", "m1*v1^2/2"),
            ("p1", "m1*v1"),
            ("E2", "m2*v2^2/2"),
            ("p2", "m2*v2"),
        ]
        .iter()
        .map(|(k, v)| (normalize_ident(k), parse_expr(v).expect("table entry parses")))
        .collect()
    })
}

/// Replaces E0, p0, E1, p1, E2, p2 by their energy and momentum expressions.
/// The replacements mention none of the replaced symbols, so one pass is
/// exhaustive.
pub fn apply_kinematic_substitutions(eq: &Equation) -> Equation {
    let table = kinematic_table();
    eq.map(|t| {
        t.map_bottom_up(&mut |u| match &u {
            Term::Param(p) => table.iter().find(|(k, _)| k == p).map(|(_, v)| v.clone()).unwrap_or(u),
            _ => u,
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryMatch {
    pub entry: usize,
    pub equation: usize,
    pub normal_form: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graded {
    pub mark: Number,
    pub matches: Vec<EntryMatch>,
    pub steps: usize,
}

/// Scheme entries solved once for reuse across students.
struct Prepared<'a> {
    scheme: &'a MarkingScheme,
    solved: Vec<SolveResult>,
    steps: usize,
}

fn prepare<'a>(scheme: &'a MarkingScheme, opts: &AriOptions) -> Prepared<'a> {
    let mut steps = 0;
    let solved = scheme
        .entries
        .iter()
        .map(|e| {
            let (r, n) = solve_for_counted(&apply_kinematic_substitutions(&e.equation), &e.target, opts);
            steps += n;
            r
        })
        .collect();
    Prepared { scheme, solved, steps }
}

fn grade_prepared(resp: &ResponseRecord, prep: &Prepared<'_>, opts: &AriOptions) -> Graded {
    let eqs: Vec<Equation> = resp.equations.iter().map(apply_kinematic_substitutions).collect();
    let mut mark = Number::zero();
    let mut matches = Vec::new();
    let mut steps = 0;
    for (k, (entry, target_nf)) in prep.scheme.entries.iter().zip(&prep.solved).enumerate() {
        let SolveResult::Solved(want) = target_nf else { continue };
        for (j, d) in eqs.iter().enumerate() {
            let (got, n) = solve_for_counted(d, &entry.target, opts);
            steps += n;
            // Both sides are ARI normal forms, so ≈ is syntactic equality.
            if got.as_term() == Some(want) {
                mark += &entry.weight;
                matches.push(EntryMatch { entry: k, equation: j, normal_form: want.to_string() });
                break;
            }
        }
    }
    Graded { mark, matches, steps }
}

/// `Σ_k w_k · [∃ j. f(d_j) ≈ f(c_k)]`, each side solved for entry `k`'s
/// target after the kinematic substitutions.
pub fn grade_trs(resp: &ResponseRecord, scheme: &MarkingScheme, opts: &AriOptions) -> Graded {
    let prep = prepare(scheme, opts);
    let mut g = grade_prepared(resp, &prep, opts);
    g.steps += prep.steps;
    g
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
pub struct StudentGrade {
    pub line: usize,
    pub student_id: String,
    #[serde(serialize_with = "ser_number")]
    pub mark: Number,
    #[serde(serialize_with = "ser_opt_number")]
    pub ground_truth: Option<Number>,
    pub fail: bool,
    pub reason: Option<String>,
    pub matches: Vec<EntryMatch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradeReport {
    pub question_id: String,
    pub tprime: bool,
    pub records: usize,
    pub fails: usize,
    pub total_steps: usize,
    pub wall_ms: u128,
    pub students: Vec<StudentGrade>,
}

impl GradeReport {
    /// Report with the timing field zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> Self {
        GradeReport { wall_ms: 0, ..self.clone() }
    }
}

impl fmt::Display for GradeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>6} {:>6}  status", "student", "mark", "truth")?;
        for s in &self.students {
            let truth = s.ground_truth.as_ref().map(format_number).unwrap_or_else(|| "-".into());
            let status = if s.fail { "FAIL" } else { "ok" };
            write!(f, "{:<12} {:>6} {:>6}  {status}", s.student_id, format_number(&s.mark), truth)?;
            if let Some(r) = &s.reason {
                write!(f, " ({r})")?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "{}: {} records, {} fails, {} rewrite steps, {} ms",
            self.question_id, self.records, self.fails, self.total_steps, self.wall_ms
        )
    }
}

/// Grades every non-blank line of `corpus`. A line that is not a valid
/// record counts as a fail and does not stop the run.
pub fn run_corpus(corpus: &str, scheme: &MarkingScheme, opts: &AriOptions) -> GradeReport {
    let start = Instant::now();
    let prep = prepare(scheme, opts);
    let lines: Vec<(usize, &str)> =
        corpus.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let graded: Vec<(StudentGrade, usize)> = lines
        .par_iter()
        .map(|(line, text)| match ResponseRecord::from_json_line(text) {
            Err(e) => (
                StudentGrade {
                    line: *line,
                    student_id: format!("line {line}"),
                    mark: Number::zero(),
                    ground_truth: None,
                    fail: true,
                    reason: Some(e.to_string()),
                    matches: Vec::new(),
                },
                0,
            ),
            Ok(rec) => {
                let g = grade_prepared(&rec, &prep, opts);
                let fail = rec.ground_truth_mark.as_ref().is_some_and(|t| *t != g.mark);
                let reason = (!rec.unparsed.is_empty()).then(|| format!("{} unparsed equation(s)", rec.unparsed.len()));
                (
                    StudentGrade {
                        line: *line,
                        student_id: rec.student_id,
                        mark: g.mark,
                        ground_truth: rec.ground_truth_mark,
                        fail,
                        reason,
                        matches: g.matches,
                    },
                    g.steps,
                )
            }
        })
        .collect();
    let total_steps = prep.steps + graded.iter().map(|(_, n)| n).sum::<usize>();
    let students: Vec<StudentGrade> = graded.into_iter().map(|(s, _)| s).collect();
    GradeReport {
        question_id: scheme.question_id.clone(),
        tprime: opts.tprime,
        records: students.len(),
        fails: students.iter().filter(|s| s.fail).count(),
        total_steps,
        wall_ms: start.elapsed().as_millis(),
        students,
    }
}

pub fn run_corpus_files(corpus: &Path, scheme: &Path, opts: &AriOptions) -> Result<GradeReport> {
    let scheme = MarkingScheme::from_json(&std::fs::read_to_string(scheme)?)?;
    Ok(run_corpus(&std::fs::read_to_string(corpus)?, &scheme, opts))
}
