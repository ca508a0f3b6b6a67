//! Exact rational helpers on top of [`num_rational::BigRational`].
//!
//! Values are always kept in lowest terms with a positive denominator, which
//! is what `BigRational` guarantees after every operation.

use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{CoreError, Result};

pub type Rational = num_rational::BigRational;

/// Hashes a rational in lowest terms by its numerator and denominator.
/// The `Hash` impl of `BigRational` itself tolerates unreduced values and
/// is far slower.
pub(crate) fn hash_reduced<H: Hasher>(q: &Rational, state: &mut H) {
    q.numer().hash(state);
    q.denom().hash(state);
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d` for small literals. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// `2^k` as a rational; negative exponents give dyadic fractions.
pub fn pow2_rat(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(pow2(k as u64))
    } else {
        Rational::new(BigInt::one(), pow2(k.unsigned_abs()))
    }
}

/// Whether `q` lies in the closed interval `[-1, 1]`.
pub fn in_unit_interval(q: &Rational) -> bool {
    q.abs() <= Rational::one()
}

/// Renders `p/q` in lowest terms and integers without a denominator.
pub fn render(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `[-]int[/pos-int]` or a decimal literal `[-]int.digits`, exactly.
pub fn parse(text: &str) -> Result<Rational> {
    let bad = || CoreError::domain(format!("not a rational literal: {text:?}"));
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let value = if let Some((n, d)) = body.split_once('/') {
        if !digits(n) || !digits(d) {
            return Err(bad());
        }
        let den: BigInt = d.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(CoreError::domain("zero denominator"));
        }
        Rational::new(n.parse().map_err(|_| bad())?, den)
    } else if let Some((w, f)) = body.split_once('.') {
        if !digits(w) || !digits(f) {
            return Err(bad());
        }
        let scale = num_traits::pow(BigInt::from(10), f.len());
        let whole: BigInt = w.parse().map_err(|_| bad())?;
        let frac: BigInt = f.parse().map_err(|_| bad())?;
        Rational::new(whole * &scale + frac, scale)
    } else {
        if !digits(body) {
            return Err(bad());
        }
        Rational::from_integer(body.parse().map_err(|_| bad())?)
    };
    Ok(if neg { -value } else { value })
}

/// Decimal expansion with `places` fractional digits, rounded to nearest
/// with ties away from zero.
pub fn to_decimal(q: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = q.abs() * Rational::from_integer(scale.clone());
    let (whole, rem) = scaled.numer().div_rem(scaled.denom());
    let rounded = if rem * 2 >= *scaled.denom() { whole + 1 } else { whole };
    let (int_part, frac_part) = rounded.div_rem(&scale);
    let sign = if q.is_negative() && !rounded_is_zero(&int_part, &frac_part) { "-" } else { "" };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        let frac = frac_part.to_str_radix(10);
        format!("{sign}{int_part}.{}{frac}", "0".repeat(places - frac.len()))
    }
}

fn rounded_is_zero(a: &BigInt, b: &BigInt) -> bool {
    a.sign() == Sign::NoSign && b.sign() == Sign::NoSign
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse("-2/6").unwrap(), ratio(-1, 3));
        assert_eq!(parse("0.7").unwrap(), ratio(7, 10));
        assert_eq!(parse("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse("3").unwrap(), int(3));
        assert!(parse("1/0").is_err());
        assert!(parse("1.").is_err());
        assert!(parse("/3").is_err());
        assert!(parse("-").is_err());
    }

    #[test]
    fn render_lowest_terms() {
        assert_eq!(render(&ratio(145, 512)), "145/512");
        assert_eq!(render(&ratio(4, 2)), "2");
        assert_eq!(render(&ratio(-3, 6)), "-1/2");
        assert_eq!(render(&int(0)), "0");
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(to_decimal(&ratio(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(to_decimal(&ratio(1, 200), 2), "0.01");
        assert_eq!(to_decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(to_decimal(&ratio(5, 2), 0), "3");
        assert_eq!(to_decimal(&ratio(1, 20), 3), "0.050");
    }
}
