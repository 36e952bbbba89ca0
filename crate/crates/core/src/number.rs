//! Exact rational helpers: decimal literals, exact powers and roots.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::term::Number;

/// Parses `123`, `0.5`, `12.25` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Number> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Decimal expansion when the denominator has only factors 2 and 5.
pub fn to_decimal_string(n: &Number) -> Option<String> {
    if n.is_integer() {
        return Some(n.numer().to_string());
    }
    let mut d = n.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = n * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (ip, fp) = digits.split_at(digits.len() - places);
    let sign = if n.is_negative() { "-" } else { "" };
    Some(format!("{sign}{ip}.{}", fp.trim_end_matches('0')))
}

/// Human-oriented rendering: decimal if finite, else `p/q`.
pub fn format_number(n: &Number) -> String {
    to_decimal_string(n).unwrap_or_else(|| format!("{}/{}", n.numer(), n.denom()))
}

pub fn as_small_int(n: &Number) -> Option<i64> {
    if n.is_integer() {
        n.to_integer().to_i64()
    } else {
        None
    }
}

/// Largest exponent magnitude evaluated exactly.
const MAX_EXACT_EXPONENT: i64 = 4096;

/// Exact `base^exp` for rational `exp`, when the result is rational.
/// `Ok(None)` means the value exists but is irrational (or too large to compute).
pub fn pow_exact(base: &Number, exp: &Number) -> Result<Option<Number>, String> {
    if base.is_zero() {
        if exp.is_positive() {
            return Ok(Some(Number::zero()));
        }
        if exp.is_zero() {
            return Ok(Some(Number::one()));
        }
        return Err("zero raised to a negative power".into());
    }
    let p = match exp.numer().to_i64() {
        Some(p) if p.abs() <= MAX_EXACT_EXPONENT => p,
        _ => return Ok(None),
    };
    let q = match exp.denom().to_u32() {
        Some(q) if q <= 64 => q,
        _ => return Ok(None),
    };
    let rooted = if q == 1 {
        base.clone()
    } else {
        if base.is_negative() && q % 2 == 0 {
            return Err("even root of a negative number".into());
        }
        match (nth_root_exact(base.numer(), q), nth_root_exact(base.denom(), q)) {
            (Some(n), Some(d)) => BigRational::new(n, d),
            _ => return Ok(None),
        }
    };
    let powered = num_traits::pow(rooted.clone(), p.unsigned_abs() as usize);
    Ok(Some(if p < 0 { powered.recip() } else { powered }))
}

fn nth_root_exact(n: &BigInt, q: u32) -> Option<BigInt> {
    let r = if n.is_negative() { -(-n).nth_root(q) } else { n.nth_root(q) };
    (num_traits::pow(r.clone(), q as usize) == *n).then_some(r)
}

pub fn to_f64(n: &Number) -> f64 {
    n.to_f64().unwrap_or(f64::NAN)
}
