//! Exact rational scalars and their text forms.
//!
//! Every coordinate, measure and function value in this crate is a
//! [`Rational`]. Text input accepts `"p"`, `"p/q"` and finite decimals such as
//! `"0.125"` or `"-3.5e-2"`; text output is always the canonical `"p/q"` (or
//! `"p"` for integers). A decimal rendering is available for display columns
//! and is computed exactly with integer arithmetic.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << (e as usize))
    } else {
        Rational::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Exponent `e` with `2^e <= q < 2^(e+1)`. Requires `q > 0`.
pub fn floor_log2(q: &Rational) -> i64 {
    assert!(q.is_positive(), "floor_log2 of non-positive rational");
    let num_bits = q.numer().bits() as i64;
    let den_bits = q.denom().bits() as i64;
    // 2^(nb-1) <= p < 2^nb and 2^(db-1) <= d < 2^db, so e is nb-db or nb-db-1.
    let e = num_bits - den_bits;
    if pow2(e) <= *q {
        e
    } else {
        e - 1
    }
}

/// Largest power of two not exceeding `q`. Requires `q > 0`.
pub fn pow2_floor(q: &Rational) -> Rational {
    pow2(floor_log2(q))
}

pub fn min_of(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_of(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Parses `"p"`, `"p/q"` or a finite decimal (optionally with an exponent).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{whole}{frac}");
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(n * Pow::pow(&ten, scale as u64))
    } else {
        Rational::new(n, Pow::pow(&ten, (-scale) as u64))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Canonical `"p/q"` form; integers print without a denominator.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Decimal rendering with `sig` significant digits, rounded half away from zero.
///
/// Plain notation is used for decimal exponents in `[-5, sig)`, scientific
/// notation otherwise. Trailing zeros are trimmed.
pub fn to_decimal(q: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if q.is_zero() {
        return "0".to_string();
    }
    let negative = q.is_negative();
    let a = q.abs();
    let ten = BigInt::from(10);
    let pow10 = |e: i64| -> Rational {
        if e >= 0 {
            Rational::from_integer(Pow::pow(&ten, e as u64))
        } else {
            Rational::new(BigInt::one(), Pow::pow(&ten, (-e) as u64))
        }
    };
    // Estimate the decimal exponent from the bit lengths, then correct it.
    let approx = ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2)
        .floor() as i64;
    let mut e = approx;
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    let scaled = &a * pow10(sig as i64 - 1 - e);
    let (quot, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = quot;
    if (rem * 2u32).cmp(scaled.denom()) != Ordering::Less {
        digits += 1u32;
    }
    if digits == Pow::pow(&ten, sig as u64) {
        digits /= 10u32;
        e += 1;
    }
    let mut text = digits.to_string();
    debug_assert_eq!(text.len(), sig);
    let body = if e >= -5 && e < sig as i64 {
        if e >= 0 {
            let point = e as usize + 1;
            let (int_part, frac_part) = text.split_at(point);
            let frac_part = frac_part.trim_end_matches('0');
            if frac_part.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac_part}")
            }
        } else {
            let zeros = "0".repeat((-e - 1) as usize);
            let frac_part = text.trim_end_matches('0');
            format!("0.{zeros}{frac_part}")
        }
    } else {
        let rest = text.split_off(1);
        let rest = rest.trim_end_matches('0');
        if rest.is_empty() {
            format!("{text}e{e}")
        } else {
            format!("{text}.{rest}e{e}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Nearest `f64`, for diagnostics only.
pub fn approx_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.numer().sign() == Sign::Minus {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Serde adapter storing a [`Rational`] as its canonical string.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serialize-only adapter for an optional [`Rational`] (`null` when absent).
pub mod serde_rational_option {
    use super::{format_rational, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => s.serialize_str(&format_rational(q)),
            None => s.serialize_none(),
        }
    }
}
