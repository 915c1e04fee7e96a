//! Exact scalars: big rationals, signed square roots of rationals, and finite sums of
//! surds.
//!
//! Values of angular momentum coupling coefficients all have the form `±√(p/q)`. Products
//! of such values stay in that form; sums in general do not, so [`SurdSum`] keeps a sum
//! normalized over square-free kernels, which makes exact equality decidable for the
//! orthogonality and projector identities.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always normalized.
pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rational_from_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact value `sign · √radicand` with `radicand >= 0`.
///
/// The radicand is a reduced fraction; square factors are left in place, so equality is a
/// plain comparison of sign and radicand.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SqrtRational {
    sign: i8,
    radicand: Rational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational { sign: 0, radicand: Rational::zero() }
    }

    pub fn one() -> Self {
        SqrtRational { sign: 1, radicand: Rational::one() }
    }

    /// `sign · √radicand`; returns `None` for a negative radicand or a sign outside
    /// `{-1, 0, 1}`.
    pub fn new(sign: i8, radicand: Rational) -> Option<Self> {
        if radicand.is_negative() || !(-1..=1).contains(&sign) {
            return None;
        }
        if sign == 0 || radicand.is_zero() {
            return Some(Self::zero());
        }
        Some(SqrtRational { sign, radicand })
    }

    /// `sign(s) · √(r)`, the usual way a Racah sum is assembled: a square-root prefactor
    /// times a rational sum.
    pub(crate) fn from_prefactor_and_sum(prefactor_sq: Rational, sum: Rational) -> Self {
        if sum.is_zero() || prefactor_sq.is_zero() {
            return Self::zero();
        }
        let sign = if sum.is_negative() { -1 } else { 1 };
        let radicand = prefactor_sq * &sum * &sum;
        SqrtRational { sign, radicand }
    }

    pub fn from_rational(r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let sign = if r.is_negative() { -1 } else { 1 };
        SqrtRational { sign, radicand: r * r }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &Rational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// The square of the value, which is always rational.
    pub fn square(&self) -> Rational {
        if self.sign == 0 {
            Rational::zero()
        } else {
            self.radicand.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * rational_to_f64(&self.radicand).sqrt()
    }

    /// Demotes to a rational when the radicand is a perfect square.
    pub fn to_rational(&self) -> Option<Rational> {
        if self.sign == 0 {
            return Some(Rational::zero());
        }
        let n = self.radicand.numer().to_biguint()?;
        let d = self.radicand.denom().to_biguint()?;
        let (rn, rd) = (n.sqrt(), d.sqrt());
        if &rn * &rn != n || &rd * &rd != d {
            return None;
        }
        let v = Rational::new(BigInt::from(rn), BigInt::from(rd));
        Some(if self.sign < 0 { -v } else { v })
    }

    /// Writes the value as `c · √k` with rational `c` and square-free integer `k`.
    pub fn split(&self) -> (Rational, BigUint) {
        if self.sign == 0 {
            return (Rational::zero(), BigUint::one());
        }
        // √(p/q) = √(pq) / q
        let p = self.radicand.numer().magnitude();
        let q = self.radicand.denom().magnitude();
        let (square_root, kernel) = square_free_split(p * q);
        let coeff = Rational::new(BigInt::from(square_root), BigInt::from(q.clone()));
        (if self.sign < 0 { -coeff } else { coeff }, kernel)
    }

    pub fn abs(&self) -> Self {
        SqrtRational { sign: self.sign.abs(), radicand: self.radicand.clone() }
    }

    pub fn scale_sign(&self, s: i32) -> Self {
        match s.signum() {
            0 => Self::zero(),
            1 => self.clone(),
            _ => -self.clone(),
        }
    }
}

/// Splits `n = s² · k` with `k` square-free. Trial division covers every prime below
/// 2^16; a leftover factor is tested for being a perfect square and otherwise treated as
/// square-free, which is exact for the factorial quotients produced by coupling
/// coefficients.
fn square_free_split(mut n: BigUint) -> (BigUint, BigUint) {
    let mut root = BigUint::one();
    let mut kernel = BigUint::one();
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    for &p in small_primes() {
        if n.is_one() {
            break;
        }
        let bp = BigUint::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0u32;
        loop {
            let (q, r) = n.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            n = q;
            e += 1;
        }
        if e > 0 {
            root *= bp.pow(e / 2);
            if e % 2 == 1 {
                kernel *= &bp;
            }
        }
    }
    if !n.is_one() {
        let r = n.sqrt();
        if &r * &r == n {
            root *= r;
        } else {
            kernel *= n;
        }
    }
    (root, kernel)
}

fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 1 << 16;
        let mut sieve = vec![true; LIMIT];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < LIMIT {
            if sieve[i] {
                let mut k = i * i;
                while k < LIMIT {
                    sieve[k] = false;
                    k += i;
                }
            }
            i += 1;
        }
        (0..LIMIT).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

impl Mul for &SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: &SqrtRational) -> SqrtRational {
        let sign = self.sign * rhs.sign;
        if sign == 0 {
            return SqrtRational::zero();
        }
        SqrtRational { sign, radicand: &self.radicand * &rhs.radicand }
    }
}

impl Mul for SqrtRational {
    type Output = SqrtRational;
    fn mul(self, rhs: SqrtRational) -> SqrtRational {
        &self * &rhs
    }
}

impl Neg for SqrtRational {
    type Output = SqrtRational;
    fn neg(self) -> SqrtRational {
        SqrtRational { sign: -self.sign, radicand: self.radicand }
    }
}

impl fmt::Display for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}*sqrt({})", self.sign, self.radicand)
        }
    }
}

impl fmt::Debug for SqrtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse exact value {0:?}")]
pub struct ParseExactError(pub String);

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseExactError> {
    let err = || ParseExactError(s.to_owned());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Prints a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

impl FromStr for SqrtRational {
    type Err = ParseExactError;

    /// Accepts `"s*sqrt(p/q)"` with `s ∈ {-1, 0, 1}`, or a bare `"0"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseExactError(s.to_owned());
        let t = s.trim();
        if t == "0" {
            return Ok(SqrtRational::zero());
        }
        let (sign, rest) = t.split_once('*').ok_or_else(err)?;
        let sign: i8 = sign.trim().parse().map_err(|_| err())?;
        let inner = rest.trim().strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')).ok_or_else(err)?;
        let radicand = parse_rational(inner)?;
        if sign == 0 {
            return if radicand.is_zero() { Ok(SqrtRational::zero()) } else { Err(err()) };
        }
        if radicand.is_zero() {
            return Err(err());
        }
        SqrtRational::new(sign, radicand).ok_or_else(err)
    }
}

/// A finite sum `Σ c_k √k` over distinct square-free kernels `k`.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SurdSum {
    terms: BTreeMap<BigUint, Rational>,
}

impl SurdSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut s = Self::zero();
        s.add_term(BigUint::one(), r);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, kernel: BigUint, coeff: Rational) {
        use std::collections::btree_map::Entry;
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(kernel) {
            Entry::Vacant(slot) => {
                slot.insert(coeff);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coeff;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add_sqrt(&mut self, v: &SqrtRational) {
        let (c, k) = v.split();
        self.add_term(k, c);
    }

    /// The value as a rational, if every irrational part cancelled.
    pub fn to_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                k.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms.iter().map(|(k, c)| rational_to_f64(c) * k.to_f64().unwrap_or(f64::NAN).sqrt()).sum()
    }
}

impl From<&SqrtRational> for SurdSum {
    fn from(v: &SqrtRational) -> Self {
        let mut s = SurdSum::zero();
        s.add_sqrt(v);
        s
    }
}

impl AddAssign<&SurdSum> for SurdSum {
    fn add_assign(&mut self, rhs: &SurdSum) {
        for (k, c) in &rhs.terms {
            self.add_term(k.clone(), c.clone());
        }
    }
}

impl Add for &SurdSum {
    type Output = SurdSum;
    fn add(self, rhs: &SurdSum) -> SurdSum {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Mul for &SurdSum {
    type Output = SurdSum;
    fn mul(self, rhs: &SurdSum) -> SurdSum {
        let mut out = SurdSum::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &rhs.terms {
                // √k1·√k2 = g·√(k1 k2 / g²) for square-free k1, k2 with g = gcd
                let g = k1.gcd(k2);
                let kernel = (k1 / &g) * (k2 / &g);
                let coeff = c1 * c2 * Rational::from_integer(BigInt::from_biguint(Sign::Plus, g));
                out.add_term(kernel, coeff);
            }
        }
        out
    }
}

impl Neg for SurdSum {
    type Output = SurdSum;
    fn neg(mut self) -> SurdSum {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }
}

impl fmt::Debug for SurdSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(k, c)| format!("({c})*sqrt({k})")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Tolerance and denominator bound used when snapping floating-point results to exact
/// rationals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapConfig {
    pub tolerance: f64,
    pub max_denominator: u64,
}

impl Default for SnapConfig {
    fn default() -> Self {
        SnapConfig { tolerance: 1e-10, max_denominator: 1_000_000 }
    }
}

/// Smallest-denominator continued-fraction convergent of `x` within `cfg.tolerance`,
/// or `None` if no convergent with denominator at most `cfg.max_denominator` qualifies.
pub fn snap_to_rational(x: f64, cfg: SnapConfig) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut rest = target;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > i128::from(cfg.max_denominator) {
            break;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        let approx = h as f64 / k as f64;
        if (approx - target).abs() <= cfg.tolerance {
            let r = Rational::new(BigInt::from(h), BigInt::from(k));
            return Some(if negative { -r } else { r });
        }
        let frac = rest - rest.floor();
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn demotion_detects_squares() {
        let v = SqrtRational::new(-1, rational(4, 9)).unwrap();
        assert_eq!(v.to_rational(), Some(rational(-2, 3)));
        let w = SqrtRational::new(1, rational(1, 2)).unwrap();
        assert_eq!(w.to_rational(), None);
        assert_eq!(SqrtRational::zero().to_rational(), Some(Rational::zero()));
    }

    #[test]
    fn product_is_closed() {
        let a = SqrtRational::new(1, rational(1, 2)).unwrap();
        let b = SqrtRational::new(-1, rational(1, 8)).unwrap();
        let p = &a * &b;
        assert_eq!(p.to_rational(), Some(rational(-1, 4)));
    }

    #[test]
    fn split_extracts_square_part() {
        let v = SqrtRational::new(1, rational(12, 5)).unwrap();
        // √(12/5) = √60/5 = 2√15/5
        let (c, k) = v.split();
        assert_eq!(c, rational(2, 5));
        assert_eq!(k, BigUint::from(15u32));
    }

    #[test]
    fn surd_sums_cancel_exactly() {
        let half = SqrtRational::new(1, rational(1, 2)).unwrap();
        let mut s = SurdSum::from(&half);
        s.add_sqrt(&SqrtRational::new(-1, rational(2, 4)).unwrap());
        assert!(s.is_zero());
        let mut t = SurdSum::from(&half);
        t.add_sqrt(&half);
        // 2·√(1/2) = √2
        assert_eq!(t, SurdSum::from(&SqrtRational::new(1, rational_from_int(2)).unwrap()));
        let sq = &t * &t;
        assert_eq!(sq.to_rational(), Some(rational_from_int(2)));
    }

    #[test]
    fn text_encoding() {
        let v = SqrtRational::new(1, rational(1, 36)).unwrap();
        assert_eq!(v.to_string(), "1*sqrt(1/36)");
        assert_eq!(SqrtRational::zero().to_string(), "0");
        assert_eq!("0*sqrt(0)".parse::<SqrtRational>().unwrap(), SqrtRational::zero());
        assert!("2*sqrt(1/2)".parse::<SqrtRational>().is_err());
        assert!("1*sqrt(-1/2)".parse::<SqrtRational>().is_err());
        assert!("1*sqrt(0)".parse::<SqrtRational>().is_err());
        assert_eq!(format_rational(&rational(-3, 6)), "-1/2");
        assert_eq!(format_rational(&rational_from_int(2)), "2");
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn snapping() {
        let cfg = SnapConfig::default();
        assert_eq!(snap_to_rational(1.0 / 3.0 + 1e-13, cfg), Some(rational(1, 3)));
        assert_eq!(snap_to_rational(-0.75, cfg), Some(rational(-3, 4)));
        assert_eq!(snap_to_rational(0.0, cfg), Some(Rational::zero()));
        let tight = SnapConfig { max_denominator: 1000, ..cfg };
        assert_eq!(snap_to_rational(std::f64::consts::PI, tight), None);
        // the default denominator bound is loose enough to capture π itself
        let pi = snap_to_rational(std::f64::consts::PI, cfg).unwrap();
        assert!((rational_to_f64(&pi) - std::f64::consts::PI).abs() <= 1e-10);
        assert_eq!(snap_to_rational(f64::NAN, cfg), None);
    }

    proptest! {
        #[test]
        fn sqrt_rational_text_round_trip(sign in prop::sample::select(vec![-1i8, 1]),
                                         n in 1i64..10_000, d in 1i64..10_000) {
            let v = SqrtRational::new(sign, rational(n, d)).unwrap();
            let back: SqrtRational = v.to_string().parse().unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn rational_text_round_trip(n in -100_000i64..100_000, d in 1i64..100_000) {
            let r = rational(n, d);
            prop_assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }

        #[test]
        fn split_reassembles(n in 1i64..5000, d in 1i64..5000) {
            let v = SqrtRational::new(1, rational(n, d)).unwrap();
            let (c, k) = v.split();
            let k = Rational::from_integer(BigInt::from(k));
            prop_assert_eq!(&c * &c * k, v.square());
        }
    }
}
