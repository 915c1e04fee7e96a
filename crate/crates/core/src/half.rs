//! Half-integer quantum numbers stored as doubled integers.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// An angular momentum or magnetic quantum number `two_j / 2`.
///
/// Spin magnitudes are non-negative; magnetic numbers may be negative.
/// Textual form is `"3/2"`, `"-1/2"` or `"2"`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HalfInt(i32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid half-integer {0:?}: expected an integer or an odd number over 2")]
pub struct ParseHalfIntError(pub String);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    /// Builds the value `two_j / 2`.
    pub const fn from_doubled(two_j: i32) -> Self {
        HalfInt(two_j)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    /// Twice the represented value.
    pub const fn doubled(self) -> i32 {
        self.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// The represented value when it is a plain integer.
    pub const fn as_integer(self) -> Option<i32> {
        if self.is_integer() {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Multiplicity `2j + 1` of a spin magnitude.
    pub fn dimension(self) -> usize {
        debug_assert!(self.0 >= 0);
        (self.0 + 1) as usize
    }

    /// Magnetic numbers `j, j-1, ..., -j` (descending, the basis order used throughout).
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let two_j = self.0;
        (0..=two_j.max(-1)).map(move |k| HalfInt(two_j - 2 * k))
    }

    /// Spin magnitudes `0, 1/2, 1, ..., max`.
    pub fn magnitudes_up_to(max: HalfInt) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        (0..=max.0).map(HalfInt)
    }

    /// Spin magnitudes `lo, lo+1, ..., hi` in unit steps.
    pub fn range_step_one(lo: HalfInt, hi: HalfInt) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let n = if hi.0 >= lo.0 { (hi.0 - lo.0) / 2 + 1 } else { 0 };
        (0..n).map(move |k| HalfInt(lo.0 + 2 * k))
    }

    /// Checks that `(self, m)` is a well-formed `(j, m)` pair: `j >= 0`, `j - m` integer,
    /// `|m| <= j`.
    pub fn admits_projection(self, m: HalfInt) -> bool {
        self.0 >= 0 && (self.0 - m.0) % 2 == 0 && m.0.abs() <= self.0
    }
}

/// `(-1)^n` for an integer exponent given as a half-integer.
///
/// Panics if the exponent is not an integer; callers establish integrality from
/// selection rules first.
pub(crate) fn phase(exponent: HalfInt) -> i32 {
    let n = exponent.as_integer().expect("phase exponent must be an integer");
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// True if `(a, b, c)` obey the triangle rule and `a + b + c` is an integer.
pub fn triangle(a: HalfInt, b: HalfInt, c: HalfInt) -> bool {
    let (a, b, c) = (a.0, b.0, c.0);
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for HalfInt {
    type Err = ParseHalfIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseHalfIntError(s.to_owned());
        let t = s.trim();
        match t.split_once('/') {
            None => {
                let n: i32 = t.parse().map_err(|_| err())?;
                n.checked_mul(2).map(HalfInt).ok_or_else(err)
            }
            Some((num, den)) => {
                let num: i32 = num.trim().parse().map_err(|_| err())?;
                let den: i32 = den.trim().parse().map_err(|_| err())?;
                match den {
                    1 => num.checked_mul(2).map(HalfInt).ok_or_else(err),
                    2 => Ok(HalfInt(num)),
                    _ => Err(err()),
                }
            }
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
