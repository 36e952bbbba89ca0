//! Floating-point evaluation, for test oracles and soundness sampling only.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::number::to_f64;
use crate::term::{Sym, Term, Var};

/// Evaluates a ground term with the given parameter valuation.
pub fn eval_numeric(t: &Term, params: &BTreeMap<String, f64>) -> Result<f64> {
    eval_with(t, &|_| None, &|p| params.get(p).copied())
}

/// Evaluates `t`, looking up variables and parameters through the callbacks.
pub fn eval_with(
    t: &Term,
    var: &dyn Fn(&Var) -> Option<f64>,
    param: &dyn Fn(&str) -> Option<f64>,
) -> Result<f64> {
    let ev = |u: &Term| eval_with(u, var, param);
    let v = match t {
        Term::Num(n) => to_f64(n),
        Term::Var(v) => var(v).ok_or_else(|| Error::NonEvaluable(format!("unbound variable {}", v.name)))?,
        Term::Param(p) => param(p).ok_or_else(|| Error::NonEvaluable(format!("unbound parameter {p}")))?,
        Term::Quote(inner) => ev(inner)?,
        Term::App(sym, args) => match sym {
            Sym::Add => ev(&args[0])? + ev(&args[1])?,
            Sym::Sub => ev(&args[0])? - ev(&args[1])?,
            Sym::Mul => ev(&args[0])? * ev(&args[1])?,
            Sym::Div => {
                let d = ev(&args[1])?;
                if d.abs() < 1e-12 {
                    return Err(Error::Domain("division by zero".into()));
                }
                ev(&args[0])? / d
            }
            Sym::Neg => -ev(&args[0])?,
            Sym::Pow => pow(ev(&args[0])?, ev(&args[1])?)?,
            Sym::PwrN => pow(ev(&args[0])?, ev(&args[1])?)?,
            Sym::Sqrt => pow(ev(&args[0])?, 0.5)?,
            Sym::Sin => ev(&args[0])?.sin(),
            Sym::Cos => ev(&args[0])?.cos(),
            Sym::SinN => (ev(&args[0])? * ev(&args[1])?).sin(),
            Sym::CosN => (ev(&args[0])? * ev(&args[1])?).cos(),
            Sym::Succ => ev(&args[0])? + 1.0,
            Sym::ToSucc | Sym::Normalize => ev(&args[0])?,
        },
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("non-finite value in {t}")))
    }
}

fn pow(base: f64, exp: f64) -> Result<f64> {
    // 0^0 is 1, as in exact arithmetic and the rule x^[0] -> [1].
    if base == 0.0 && exp < 0.0 {
        return Err(Error::Domain("zero to a negative power".into()));
    }
    if base < 0.0 && exp.fract() != 0.0 {
        return Err(Error::Domain("fractional power of a negative number".into()));
    }
    Ok(base.powf(exp))
}

/// Relative agreement used by the numeric oracles.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn env(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn basics() {
        let t = parse_expr("2*p").unwrap();
        assert_eq!(eval_numeric(&t, &env(&[("p", 3.0)])).unwrap(), 6.0);
        let t = parse_expr("sin(pi/2)").unwrap();
        let v = eval_numeric(&t, &env(&[("pi", 3.14159265358979)])).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn example_one_values() {
        let ab = env(&[("a", 2.0), ("b", 3.0)]);
        let s = parse_expr("2*b*3*a*5*b + 5").unwrap();
        let t = parse_expr("5 + 30*a*b^2").unwrap();
        assert_eq!(eval_numeric(&s, &ab).unwrap(), 545.0);
        assert_eq!(eval_numeric(&t, &ab).unwrap(), 545.0);
    }

    #[test]
    fn domain_errors() {
        let e = env(&[("p", 0.0)]);
        assert!(matches!(eval_numeric(&parse_expr("1/p").unwrap(), &e), Err(Error::Domain(_))));
        assert!(matches!(eval_numeric(&parse_expr("(-4)^0.5").unwrap(), &e), Err(Error::Domain(_))));
        assert!(matches!(eval_numeric(&parse_expr("q").unwrap(), &e), Err(Error::NonEvaluable(_))));
    }
}
