//! Constrained term rewriting with built-in arithmetic, tuned for grading
//! pre-calculus physics answers.

pub mod awpo;
pub mod canon;
pub mod confluence;
pub mod engine;
pub mod eqsolver;
pub mod error;
pub mod eval;
pub mod grading;
pub mod number;
pub mod parse;
pub mod poly;
pub mod print;
pub mod rules;
pub mod smt;
pub mod solver;
pub mod termination;
pub mod term;
pub mod unify;

pub use error::{Error, Result};
pub use parse::{parse_equation, parse_expr, ParseOptions};
pub use term::{Equation, Number, Position, Substitution, Sym, Term, Var, VarKind};
