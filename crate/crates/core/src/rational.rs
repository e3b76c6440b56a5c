//! Exact rational helpers built on `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-3`, `0.001`, `-2.5` or `1/1000`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n = parse_decimal(n.trim())?;
        let d = parse_decimal(d.trim())?;
        if d.is_zero() {
            return None;
        }
        n / d
    } else {
        parse_decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn parse_decimal(s: &str) -> Option<Rational> {
    if s.is_empty() {
        return None;
    }
    let (whole, frac) = match s.split_once('.') {
        Some((w, f)) => (w, f),
        None => (s, ""),
    };
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(numer, denom))
}

/// Integer or `a/b` form.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds half away from zero to `places` decimals.
pub fn format_decimal(r: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = r * Rational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (q, rem) = abs.div_rem(&scale);
    let body = if places == 0 {
        q.to_string()
    } else {
        format!("{}.{:0>width$}", q, rem.to_string(), width = places)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Best rational approximation with denominator at most `max_den`.
pub fn approximate(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a_int = a as u128;
        let p2 = a_int * p1 + p0;
        let q2 = a_int * q1 + q0;
        if q2 > max_den as u128 {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let f = v - a;
        if f < 1e-15 {
            break;
        }
        v = 1.0 / f;
    }
    if q1 == 0 {
        return None;
    }
    let r = Rational::new(BigInt::from(p1), BigInt::from(q1));
    Some(if neg { -r } else { r })
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

pub fn is_one(r: &Rational) -> bool {
    r.is_one()
}

pub fn min(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn max(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

/// `10^-k` as an exact rational.
pub fn pow10_neg(k: usize) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        assert_eq!(parse_rational("0.001"), Some(ratio(1, 1000)));
        assert_eq!(parse_rational("1/1000"), Some(ratio(1, 1000)));
        assert_eq!(parse_rational("-2.5"), Some(ratio(-5, 2)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(format_decimal(&ratio(1, 1000), 3), "0.001");
        assert_eq!(format_decimal(&ratio(10, 41), 3), "0.244");
        assert_eq!(format_decimal(&ratio(-1, 3), 3), "-0.333");
        assert_eq!(format_decimal(&int(1), 3), "1.000");
    }

    #[test]
    fn continued_fraction() {
        assert_eq!(approximate(0.333333333333, 1000), Some(ratio(1, 3)));
        assert_eq!(approximate(-0.5, 10), Some(ratio(-1, 2)));
    }
}
