//! Scalar abstraction shared by every probability, weight, mass and risk.
//!
//! The exact instantiation is [`Rational`](crate::Rational), an arbitrary
//! precision fraction that never rounds. `f64` and `f32` are supported for
//! quick approximate runs; identity checks on those types fall back to a
//! relative tolerance through [`Scalar::agrees`].

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, NumOps, One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + NumOps
    + Neg<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
    /// `true` when arithmetic on this type never rounds.
    const EXACT: bool;

    /// `num / den` built from machine integers. `den` must be nonzero.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("integer fits scalar") / Self::from_i64(den).expect("integer fits scalar")
    }

    /// Equality for exact types, relative tolerance for floats.
    fn agrees(&self, other: &Self) -> bool;

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest binary64 value (correctly rounded for [`Rational`](crate::Rational)).
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact numerator/denominator pair when the type carries one.
    fn fraction_parts(&self) -> Option<(BigInt, BigInt)> {
        None
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn agrees(&self, other: &Self) -> bool {
        self == other
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }

    fn fraction_parts(&self) -> Option<(BigInt, BigInt)> {
        Some((self.numer().clone(), self.denom().clone()))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn agrees(&self, other: &Self) -> bool {
        let scale = 1.0f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= 1e-9 * scale
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn agrees(&self, other: &Self) -> bool {
        let scale = 1.0f32.max(self.abs()).max(other.abs());
        (self - other).abs() <= 1e-5 * scale
    }
}

/// Sum of an iterator of scalars.
pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> S {
    items.into_iter().fold(S::zero(), |acc, x| acc + x)
}

/// Maximum of an iterator; `None` when empty.
pub fn max_of<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> Option<S> {
    items.into_iter().fold(None, |acc, x| match acc {
        Some(best) if best >= x => Some(best),
        _ => Some(x),
    })
}

/// Minimum of an iterator; `None` when empty.
pub fn min_of<S: Scalar, I: IntoIterator<Item = S>>(items: I) -> Option<S> {
    items.into_iter().fold(None, |acc, x| match acc {
        Some(best) if best <= x => Some(best),
        _ => Some(x),
    })
}

/// Total order for validated (NaN-free) scalars.
pub(crate) fn cmp<S: Scalar>(a: &S, b: &S) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("scalars are never NaN")
}

/// `true` iff `0 <= x <= 1`.
pub fn in_unit_interval<S: Scalar>(x: &S) -> bool {
    *x >= S::zero() && *x <= S::one()
}

/// Exact rational value of a finite binary64.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parse `"p/q"`, `"p"` or a decimal literal such as `"0.25"` into an exact fraction.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Ok(r) = text.parse::<BigRational>() {
        if !r.denom().is_zero() {
            return Some(r);
        }
        return None;
    }
    // decimal literal: digits with one optional '.'
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}
