//! Numeric abstraction shared by the floating-point and exact rational code
//! paths of the couplings and the simplex solver.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rational numbers used in the exact code paths.
pub type Rational = BigRational;

/// Field operations plus the few conversions the algorithms need.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts a machine integer.
    fn from_i64(value: i64) -> Self;

    /// The ratio `num / den`.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Lossy conversion used for reporting.
    fn to_f64(&self) -> f64;

    /// Conversion from an exact rational (rounded for floating point).
    fn from_rational(value: &Rational) -> Self;

    /// Comparison slack: zero for exact types.
    fn tolerance() -> Self;

    /// Strictly greater than zero. Unlike `Signed::is_positive`, this is
    /// `false` for `+0.0`.
    fn above_zero(&self) -> bool {
        *self > Self::zero()
    }

    /// Strictly less than zero. Unlike `Signed::is_negative`, this is
    /// `false` for `-0.0`.
    fn below_zero(&self) -> bool {
        *self < Self::zero()
    }

    /// `true` when the value is treated as zero under [`Scalar::tolerance`].
    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }
}

impl Scalar for f64 {
    fn from_i64(value: i64) -> Self {
        value as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(value: &Rational) -> Self {
        <Rational as Scalar>::to_f64(value)
    }

    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for BigRational {
    fn from_i64(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }
}

/// Minimum of two partially ordered values, preferring the first on ties.
pub fn min_of<T: Scalar>(a: &T, b: &T) -> T {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

/// Maximum of two partially ordered values, preferring the first on ties.
pub fn max_of<T: Scalar>(a: &T, b: &T) -> T {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

/// Parses `"a/b"`, an integer, or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|ch| ch.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(num, den);
    Some(if negative { -value } else { value })
}
