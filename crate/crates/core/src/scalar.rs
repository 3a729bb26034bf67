//! Scalar types that can carry probabilities and weights of evidence.
//!
//! Everything that flows through the evaluator (derandomizer masses, answer
//! distributions, evidence weights, reliability pairs) is generic over
//! [`Scalar`]. Model files and formula thresholds are always read as exact
//! rationals and converted on the way in, so the exact instantiation
//! ([`crate::Rational`]) loses nothing while `f64`/`f32` trade exactness for
//! speed.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};

pub trait Scalar:
    Num + Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact value when the scalar can represent one. Floats convert to the
    /// rational they denote bit-for-bit.
    fn to_rational(&self) -> Option<BigRational>;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn in_unit_interval(&self) -> bool {
        *self >= Self::zero() - Self::tolerance() && *self <= Self::one() + Self::tolerance()
    }

    /// Slack allowed in comparisons. Zero for exact types.
    fn tolerance() -> Self {
        Self::zero()
    }

    /// `self ≥ other` up to [`Scalar::tolerance`].
    fn ge_tol(&self, other: &Self) -> bool {
        self.clone() + Self::tolerance() >= *other
    }

    fn le_tol(&self, other: &Self) -> bool {
        other.ge_tol(self)
    }

    fn eq_tol(&self, other: &Self) -> bool {
        self.ge_tol(other) && self.le_tol(other)
    }
}

impl Scalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn tolerance() -> Self {
        1e-5
    }
}

/// Parses `"2/3"`, `"0.75"` or `"1"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = parse_digits(n.trim())?;
        let d: BigInt = parse_digits(d.trim())?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        let int_part: BigInt = if int.is_empty() { BigInt::zero() } else { parse_digits(int)? };
        if frac.is_empty() {
            return Some(BigRational::from_integer(int_part));
        }
        let frac_part: BigInt = parse_digits(frac)?;
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        return Some(BigRational::new(int_part * &scale + frac_part, scale));
    }
    Some(BigRational::from_integer(parse_digits(text)?))
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Renders a rational in lowest terms as `p/q` (or `p` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("2/3"), Some(q(2, 3)));
        assert_eq!(parse_rational("0.75"), Some(q(3, 4)));
        assert_eq!(parse_rational("1"), Some(q(1, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("4/6"), Some(q(2, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("-1/2"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn renders_lowest_terms() {
        assert_eq!(format_rational(&q(6, 9)), "2/3");
        assert_eq!(format_rational(&q(4, 4)), "1");
        assert_eq!(format_rational(&q(0, 7)), "0");
    }

    #[test]
    fn float_conversion_round_trips_dyadics() {
        let half = f64::from_rational(&q(1, 2));
        assert_eq!(half, 0.5);
        assert_eq!(half.to_rational(), Some(q(1, 2)));
        assert_eq!(<f32 as Scalar>::from_ratio(3, 4), 0.75f32);
    }
}
