//! Exact rational masses and their text forms.
//!
//! All probability mass in this crate is carried as arbitrary-precision
//! rationals so that combination, ranking and support are exact: equal
//! inputs produce bit-identical outputs and golden values can be asserted
//! with `==` instead of a tolerance.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// A basic probability number (or a fitness value): an exact rational.
pub type Mass = BigRational;

/// Shorthand for `numer/denom` with small integers.
pub fn ratio(numer: i64, denom: i64) -> Mass {
    Mass::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for a whole number as a rational.
pub fn whole(n: i64) -> Mass {
    Mass::from_integer(BigInt::from(n))
}

/// `numer/denom` from unsigned object counts; `denom` must be non-zero.
pub fn ratio_u64(numer: u64, denom: u64) -> Mass {
    Mass::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses a non-negative rational written either as `p/q` or as a
/// terminating decimal (`0.25`, `.5`, `2`). Decimals convert exactly:
/// `0.3` becomes 3/10, never a binary float.
pub fn parse_rational(text: &str) -> Result<Mass, String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("empty rational".to_string());
    }
    if let Some((p, q)) = text.split_once('/') {
        let numer = parse_digits(p)?;
        let denom = parse_digits(q)?;
        if denom.is_zero() {
            return Err(format!("zero denominator in `{text}`"));
        }
        return Ok(Mass::new(numer, denom));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("`{text}` is not a number"));
    }
    let int_digits = if int_part.is_empty() {
        BigInt::zero()
    } else {
        parse_digits(int_part)?
    };
    let frac_digits = if frac_part.is_empty() {
        BigInt::zero()
    } else {
        parse_digits(frac_part)?
    };
    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Mass::new(int_digits * &scale + frac_digits, scale))
}

fn parse_digits(text: &str) -> Result<BigInt, String> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("`{text}` is not an unsigned integer"));
    }
    text.parse::<BigInt>()
        .map_err(|e| format!("`{text}`: {e}"))
}

/// Renders a rational as `p/q (decimal)`, or just the integer when whole.
/// The decimal is exact when the fraction terminates, otherwise rounded
/// to six places and marked with `~`.
pub fn render(value: &Mass) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    format!("{} ({})", value, render_decimal(value))
}

/// Decimal form of a rational: exact when terminating, `~`-prefixed and
/// rounded half-up to six places otherwise.
pub fn render_decimal(value: &Mass) -> String {
    if value.is_negative() {
        return format!("-{}", render_decimal(&-value.clone()));
    }
    if value.is_integer() {
        return value.numer().to_string();
    }
    let ten = BigInt::from(10u32);
    if let Some(places) = terminating_places(value.denom()) {
        let scaled: BigInt = value.numer() * ten.pow(places) / value.denom();
        return place_point(&scaled, places, false);
    }
    // Non-terminating: round half-up at six places.
    let places = 6u32;
    let scaled: BigInt =
        (value.numer() * ten.pow(places) * 2 + value.denom()) / (value.denom() * 2);
    place_point(&scaled, places, true)
}

/// Number of decimal places needed for an exact expansion, or `None` if
/// the denominator has a prime factor other than 2 and 5.
fn terminating_places(denom: &BigInt) -> Option<u32> {
    let mut d = denom.clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    (d.is_one()).then(|| twos.max(fives))
}

fn place_point(scaled: &BigInt, places: u32, approximate: bool) -> String {
    let digits = scaled.to_string();
    let places = places as usize;
    let (int_part, frac_part) = if digits.len() > places {
        let split = digits.len() - places;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{digits:0>places$}"))
    };
    let frac_part = if approximate {
        frac_part
    } else {
        frac_part.trim_end_matches('0').to_string()
    };
    let prefix = if approximate { "~" } else { "" };
    if frac_part.is_empty() {
        format!("{prefix}{int_part}")
    } else {
        format!("{prefix}{int_part}.{frac_part}")
    }
}
