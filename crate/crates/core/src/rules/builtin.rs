use std::sync::OnceLock;

use super::{parse_rules, RuleSystem, SystemName};
use crate::awpo::OrderingContext;

const NORM: &str = "
vars: x y n; bgvars: a
N1.1: norm([a]) -> [a]
N1.2: norm(x) -> [x] | is_bg_var(x)
N1.3: norm(x) -> [1]*(x^[1]) | is_fg_var(x)
N2.1: norm(sin(n*y)) -> norm(sin_n(n, y)) | is_int_geq0(n)
N2.2: norm(sin(x*y)) -> sin(norm(x*y)) | not_int_geq0(x)
N2.3: norm(sin(x)) -> sin(norm(x)) | not_times_funterm(x)
N2.4: norm(cos(n*y)) -> norm(cos_n(n, y)) | is_int_geq0(n)
N2.5: norm(cos(x*y)) -> cos(norm(x*y)) | not_int_geq0(x)
N2.6: norm(cos(x)) -> cos(norm(x)) | not_times_funterm(x)
N3.1: norm(sin_n(n, x)) -> sin_n(to_succ(n), norm(x))
N3.2: norm(cos_n(n, x)) -> cos_n(to_succ(n), norm(x))
N4.1: norm(x + y) -> norm(x) + norm(y)
N4.2: norm(x*y) -> norm(x)*norm(y)
N4.3: norm(x^y) -> norm(x)^norm(y) | not_int_geq0(y)
N5.1: norm(x^n) -> norm(pwr_n(x, n)) | is_int_geq0(n)
N5.2: norm(pwr_n(x, n)) -> pwr_n(norm(x), to_succ(n))
N5.3: to_succ(0) -> [0]
N5.4: to_succ(n) -> s(to_succ(n - 1)) | gt0(n)
N6.1: norm(x - y) -> norm(x + uminus(y))
N6.2: norm(uminus(x)) -> [-1]*norm(x)
N7.1: norm(x/y) -> norm(x)*(norm(y)^[-1])
";

const CANON: &str = "
vars: x y z v n x1 x2; bgvars: a b
A1.1: (x + y) + z -> x + (y + z)
A1.2.1: x + y -> y + x | x > y
A1.2.2: x + (y + z) -> y + (x + z) | x > y
A1.3.1: [0] + x -> x
A1.3.2: [a] + [b] -> [a + b]
A1.3.3: [a] + ([b] + z) -> [a + b] + z
A1.3.4: [a]*x + [b]*x -> [a + b]*x
A1.3.5: [a]*x + ([b]*x + z) -> [a + b]*x + z
A1.4: (x*y)*z -> x*(y*z)
A1.5.1: x*y -> y*x | x > y
A1.5.2: x*(y*z) -> y*(x*z) | x > y
A1.6.1: [0]*x -> [0]
A1.6.2: [a]*[b] -> [a*b]
A1.6.3: [a]*([b]*z) -> [a*b]*z
A1.7.1: x*(y + z) -> x*y + x*z
A1.7.2: (y + z)*x -> y*x + z*x
A1.8.1: (x^y)^z -> x^(y*z)
A1.8.2: x^y*x^z -> x^(y + z)
A1.8.3: x^y*(x^z*v) -> x^(y + z)*v
A1.9.1: [a]^[b] -> [a^b]
A1.9.2: pwr_n(x, [0]) -> [1]
A1.9.3: pwr_n(x, s(n)) -> x*pwr_n(x, n)
A1.9.4: (x + y)^[1] -> x + y
A1.9.5: (x*y)^[a] -> x^[a]*y^[a]
A1.9.6: x^[0] -> [1]
T1.1: sin([-1]*x) -> [-1]*sin(x)
T1.2: cos([-1]*x) -> cos(x)
T1.3: sin(x1 + x2) -> sin(x1)*cos(x2) + cos(x1)*sin(x2)
T1.4: cos(x1 + x2) -> cos(x1)*cos(x2) + [-1]*(sin(x1)*sin(x2))
T1.5: cos_n(s(s(n)), x) -> [2]*(cos(x)*cos_n(s(n), x)) + [-1]*cos_n(n, x)
T1.6: sin_n(s(s(n)), x) -> [2]*(cos(x)*sin_n(s(n), x)) + [-1]*sin_n(n, x)
T1.7: sin(x)^[2] -> [1] + [-1]*cos(x)^[2]
T1.8: sin([1]*x) -> sin(x)
T1.9: cos([1]*x) -> cos(x)
T2.1: cos_n(s([0]), x) -> cos([1]*x)
T2.2: cos_n([0], x) -> cos([0])
T2.3: sin_n(s([0]), x) -> sin([1]*x)
T2.4: sin_n([0], x) -> sin([0])
T2.5: sin([a]) -> [sin(a)]
T2.6: cos([a]) -> [cos(a)]
";

const SIMP: &str = "
vars: x y z; bgvars: a b
S1: [a]*x + [b]*y -> [b]*y + [a]*x | x > y
S2: [a]*x + ([b]*y + z) -> [b]*y + ([a]*x + z) | x > y
S3: [a]*x + [b]*x -> [a + b]*x
S4: [a]*x + ([b]*x + z) -> [a + b]*x + z
";

const CLEAN: &str = "
vars: x; bgvars: a
C1: [a] -> a
C2: 1*x -> x
C3: x^1 -> x
";

// cos(pi) is -1; the value 1 sometimes printed for this axiom is wrong.
const TPRIME: &str = "
TP1: sin([0.5]*pi^[1]) -> [1]
TP2: cos([0.5]*pi^[1]) -> [0]
TP3: sin(pi^[1]) -> [0]
TP4: cos(pi^[1]) -> [-1]
";

fn build(name: SystemName) -> RuleSystem {
    let (text, ordering, boundary) = match name {
        SystemName::Norm => (NORM, None, true),
        SystemName::Canon => (CANON, Some(OrderingContext::canon()), false),
        SystemName::Simp => (SIMP, Some(OrderingContext::simp()), false),
        SystemName::Clean => (CLEAN, None, true),
        SystemName::TPrime => (TPRIME, Some(OrderingContext::canon()), false),
        SystemName::User => return RuleSystem { name, rules: Vec::new(), ordering: None },
    };
    let mut rules = parse_rules(text).expect("built-in rule table parses");
    for r in &mut rules {
        r.quote_boundary = boundary;
        if r.id == "T1.7" {
            r.ordering_hint = Some("Not oriented".into());
        }
        if r.id == "TP4" {
            r.ordering_hint = Some("cos(pi) -> -1, not the printed 1".into());
        }
    }
    if name == SystemName::TPrime {
        log::warn!("T' uses cos(pi) -> -1 in place of the printed cos(pi) -> 1");
    }
    RuleSystem { name, rules, ordering }
}

/// The transcribed rule tables. Systems are built once and shared.
pub fn builtin_system(name: SystemName) -> &'static RuleSystem {
    static CELLS: [OnceLock<RuleSystem>; 6] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CELLS[name as usize].get_or_init(|| build(name))
}

/// Canon followed by the four trig-constant rules.
pub fn canon_with_tprime() -> &'static RuleSystem {
    static CELL: OnceLock<RuleSystem> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut sys = builtin_system(SystemName::Canon).clone();
        sys.rules.extend(builtin_system(SystemName::TPrime).rules.iter().cloned());
        sys
    })
}
