//! Exact Clebsch-Gordan coefficients, Wigner 3-j and 6-j symbols, and Racah
//! W-coefficients.
//!
//! All values are computed by Racah's single-sum formulas over a memoized factorial
//! table and returned as [`SqrtRational`]. The Condon-Shortley phase convention is used
//! throughout. A floating-point 6-j evaluator built from four 3-j symbols lives in
//! [`oracle`] and special-case closed forms in [`closed_form`].

pub mod closed_form;
pub mod oracle;

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::{Rational, SqrtRational};
use crate::half::{phase, triangle, HalfInt};

pub use closed_form::{sixj_closed_form, NoClosedForm, SixJPattern};
pub use oracle::wigner_6j_oracle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngularError {
    #[error("malformed angular momentum pair (j = {j}, m = {m})")]
    MalformedPair { j: HalfInt, m: HalfInt },
    #[error("negative spin magnitude {0}")]
    NegativeSpin(HalfInt),
    #[error("factorial {n}! exceeds the configured cap {cap}!")]
    FactorialCapExceeded { n: i64, cap: usize },
}

pub type Result<T> = std::result::Result<T, AngularError>;

/// Largest spin the default calculator supports.
pub const DEFAULT_MAX_SPIN: HalfInt = HalfInt::integer(20);

/// Factorials `0!, 1!, ..., cap!` as big integers.
#[derive(Debug, Clone)]
pub struct FactorialTable {
    values: Vec<BigInt>,
}

impl FactorialTable {
    pub fn with_cap(cap: usize) -> Self {
        let mut values = Vec::with_capacity(cap + 1);
        let mut acc = BigInt::one();
        values.push(acc.clone());
        for k in 1..=cap {
            acc *= k;
            values.push(acc.clone());
        }
        FactorialTable { values }
    }

    /// A table large enough for every symbol with spins up to `max_spin`: `4 j_max + 2`.
    pub fn for_max_spin(max_spin: HalfInt) -> Self {
        let cap = (2 * max_spin.doubled().max(0) + 2) as usize;
        Self::with_cap(cap)
    }

    pub fn cap(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: i64) -> Result<&BigInt> {
        usize::try_from(n)
            .ok()
            .and_then(|k| self.values.get(k))
            .ok_or(AngularError::FactorialCapExceeded { n, cap: self.cap() })
    }

    /// `n!` for `n` given as a half-integer that selection rules make integral.
    fn of(&self, n: HalfInt) -> Result<&BigInt> {
        let k = n.as_integer().expect("factorial argument must be an integer");
        self.get(i64::from(k))
    }
}

/// Canonical cache key for a 6-j symbol: the lexicographically smallest of its 24
/// symmetry images, as doubled integers.
type SixJKey = [i32; 6];

/// Calculator for coupling coefficients with its own factorial cap and 6-j cache.
///
/// The cache is internally synchronized, so a shared `&Wigner` may be used from many
/// threads.
#[derive(Debug)]
pub struct Wigner {
    factorials: FactorialTable,
    sixj_cache: RwLock<HashMap<SixJKey, SqrtRational>>,
}

impl Default for Wigner {
    fn default() -> Self {
        Wigner::new(DEFAULT_MAX_SPIN)
    }
}

impl Wigner {
    pub fn new(max_spin: HalfInt) -> Self {
        Wigner::with_factorials(FactorialTable::for_max_spin(max_spin))
    }

    pub fn with_factorials(factorials: FactorialTable) -> Self {
        Wigner { factorials, sixj_cache: RwLock::new(HashMap::new()) }
    }

    /// Process-wide calculator supporting spins up to [`DEFAULT_MAX_SPIN`].
    pub fn global() -> &'static Wigner {
        static GLOBAL: OnceLock<Wigner> = OnceLock::new();
        GLOBAL.get_or_init(Wigner::default)
    }

    pub fn factorials(&self) -> &FactorialTable {
        &self.factorials
    }

    fn fact(&self, n: HalfInt) -> Result<Rational> {
        Ok(Rational::from_integer(self.factorials.of(n)?.clone()))
    }

    /// `Δ(abc) = (a+b-c)! (a-b+c)! (-a+b+c)! / (a+b+c+1)!` for a valid triad.
    fn delta(&self, a: HalfInt, b: HalfInt, c: HalfInt) -> Result<Rational> {
        let num = self.fact(a + b - c)? * self.fact(a - b + c)? * self.fact(b + c - a)?;
        Ok(num / self.fact(a + b + c + HalfInt::ONE)?)
    }

    /// `⟨j1 m1; j2 m2 | J M⟩` by Racah's single-sum formula.
    ///
    /// Zero when `M != m1 + m2`, when a projection exceeds its spin, or when
    /// `(j1, j2, J)` is not a triangle.
    pub fn clebsch_gordan(
        &self,
        j1: HalfInt,
        m1: HalfInt,
        j2: HalfInt,
        m2: HalfInt,
        j: HalfInt,
        m: HalfInt,
    ) -> Result<SqrtRational> {
        check_pair(j1, m1)?;
        check_pair(j2, m2)?;
        check_pair(j, m)?;
        if m1 + m2 != m || !triangle(j1, j2, j) {
            return Ok(SqrtRational::zero());
        }
        if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
            return Ok(SqrtRational::zero());
        }
        let two = HalfInt::ONE;
        let prefactor = Rational::from_integer(BigInt::from(j.doubled() + 1))
            * self.delta(j1, j2, j)?
            * self.fact(j1 + m1)?
            * self.fact(j1 - m1)?
            * self.fact(j2 + m2)?
            * self.fact(j2 - m2)?
            * self.fact(j + m)?
            * self.fact(j - m)?;

        // k runs over integers making every factorial argument non-negative
        let lo = [HalfInt::ZERO, j2 - j - m1, j1 + m2 - j].into_iter().max().unwrap();
        let hi = [j1 + j2 - j, j1 - m1, j2 + m2].into_iter().min().unwrap();
        let mut sum = Rational::zero();
        let mut k = lo;
        while k <= hi {
            let den = self.fact(k)?
                * self.fact(j1 + j2 - j - k)?
                * self.fact(j1 - m1 - k)?
                * self.fact(j2 + m2 - k)?
                * self.fact(j - j2 + m1 + k)?
                * self.fact(j - j1 - m2 + k)?;
            let term = den.recip();
            if phase(k) < 0 {
                sum -= term;
            } else {
                sum += term;
            }
            k = k + two;
        }
        Ok(SqrtRational::from_prefactor_and_sum(prefactor, sum))
    }

    /// Wigner 3-j symbol from the Clebsch-Gordan coefficient through
    /// `⟨j1 m1; j2 m2 | J M⟩ = (-1)^(j1-j2+M) √(2J+1) (j1 j2 J; m1 m2 -M)`.
    pub fn wigner_3j(
        &self,
        j1: HalfInt,
        j2: HalfInt,
        j3: HalfInt,
        m1: HalfInt,
        m2: HalfInt,
        m3: HalfInt,
    ) -> Result<SqrtRational> {
        check_pair(j1, m1)?;
        check_pair(j2, m2)?;
        check_pair(j3, m3)?;
        if m1 + m2 + m3 != HalfInt::ZERO || !triangle(j1, j2, j3) {
            return Ok(SqrtRational::zero());
        }
        let cg = self.clebsch_gordan(j1, m1, j2, m2, j3, -m3)?;
        if cg.is_zero() {
            return Ok(cg);
        }
        // (-1)^(j1-j2-m3) / √(2 j3 + 1); j1 - j2 - m3 is an integer once the triad holds
        let scale = SqrtRational::new(1, Rational::new(BigInt::one(), BigInt::from(j3.doubled() + 1)))
            .expect("positive radicand");
        Ok((&cg * &scale).scale_sign(phase(j1 - j2 - m3)))
    }

    /// Wigner 6-j symbol `{a b c; d e f}` by Racah's single-sum formula, memoized on the
    /// canonical form of its arguments.
    pub fn wigner_6j(
        &self,
        a: HalfInt,
        b: HalfInt,
        c: HalfInt,
        d: HalfInt,
        e: HalfInt,
        f: HalfInt,
    ) -> Result<SqrtRational> {
        for s in [a, b, c, d, e, f] {
            if s.is_negative() {
                return Err(AngularError::NegativeSpin(s));
            }
        }
        if !sixj_triads_hold([a, b, c, d, e, f]) {
            return Ok(SqrtRational::zero());
        }
        let key = canonical_sixj_key([a, b, c, d, e, f]);
        if let Some(v) = self.sixj_cache.read().expect("6-j cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let h = key.map(HalfInt::from_doubled);
        let value = self.racah_6j(h[0], h[1], h[2], h[3], h[4], h[5])?;
        self.sixj_cache.write().expect("6-j cache poisoned").insert(key, value.clone());
        Ok(value)
    }

    fn racah_6j(&self, a: HalfInt, b: HalfInt, c: HalfInt, d: HalfInt, e: HalfInt, f: HalfInt) -> Result<SqrtRational> {
        let prefactor = self.delta(a, b, c)? * self.delta(a, e, f)? * self.delta(d, b, f)? * self.delta(d, e, c)?;
        let alphas = [a + b + c, a + e + f, d + b + f, d + e + c];
        let betas = [a + b + d + e, a + c + d + f, b + c + e + f];
        let lo = *alphas.iter().max().unwrap();
        let hi = *betas.iter().min().unwrap();
        let mut sum = Rational::zero();
        let mut t = lo;
        while t <= hi {
            let mut den = Rational::one();
            for x in alphas {
                den *= self.fact(t - x)?;
            }
            for y in betas {
                den *= self.fact(y - t)?;
            }
            let term = self.fact(t + HalfInt::ONE)? / den;
            if phase(t) < 0 {
                sum -= term;
            } else {
                sum += term;
            }
            t = t + HalfInt::ONE;
        }
        Ok(SqrtRational::from_prefactor_and_sum(prefactor, sum))
    }

    /// Racah coefficient `W(a b a' b'; J J') = (-1)^(a+b+a'+b') {a b J; a' b' J'}`.
    pub fn racah_w(
        &self,
        a: HalfInt,
        b: HalfInt,
        a2: HalfInt,
        b2: HalfInt,
        j: HalfInt,
        j2: HalfInt,
    ) -> Result<SqrtRational> {
        let sixj = self.wigner_6j(a, b, j, a2, b2, j2)?;
        if sixj.is_zero() {
            return Ok(sixj);
        }
        Ok(sixj.scale_sign(phase(a + b + a2 + b2)))
    }
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.is_negative() || (j.doubled() - m.doubled()) % 2 != 0 {
        return Err(AngularError::MalformedPair { j, m });
    }
    Ok(())
}

/// The four triads `(a,b,c)`, `(a,e,f)`, `(d,b,f)`, `(d,e,c)` of `{a b c; d e f}`.
pub fn sixj_triads_hold(args: [HalfInt; 6]) -> bool {
    let [a, b, c, d, e, f] = args;
    triangle(a, b, c) && triangle(a, e, f) && triangle(d, b, f) && triangle(d, e, c)
}

/// All 24 images of `{a b c; d e f}` under column permutations and exchange of upper
/// and lower entries in two columns.
pub fn sixj_symmetry_images(args: [HalfInt; 6]) -> Vec<[HalfInt; 6]> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    const FLIPS: [[bool; 3]; 4] =
        [[false, false, false], [true, true, false], [true, false, true], [false, true, true]];
    let cols = [(args[0], args[3]), (args[1], args[4]), (args[2], args[5])];
    let mut out = Vec::with_capacity(24);
    for p in PERMS {
        for fl in FLIPS {
            let mut img = [HalfInt::ZERO; 6];
            for (k, &src) in p.iter().enumerate() {
                let (up, lo) = cols[src];
                let (up, lo) = if fl[k] { (lo, up) } else { (up, lo) };
                img[k] = up;
                img[k + 3] = lo;
            }
            out.push(img);
        }
    }
    out
}

fn canonical_sixj_key(args: [HalfInt; 6]) -> SixJKey {
    sixj_symmetry_images(args).into_iter().map(|img| img.map(HalfInt::doubled)).min().expect("24 images")
}

/// `⟨j1 m1; j2 m2 | J M⟩` with the process-wide calculator.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<SqrtRational> {
    Wigner::global().clebsch_gordan(j1, m1, j2, m2, j, m)
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)` with the process-wide calculator.
pub fn wigner_3j(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> Result<SqrtRational> {
    Wigner::global().wigner_3j(j1, j2, j3, m1, m2, m3)
}

/// Wigner 6-j symbol `{a b c; d e f}` with the process-wide calculator.
pub fn wigner_6j(a: HalfInt, b: HalfInt, c: HalfInt, d: HalfInt, e: HalfInt, f: HalfInt) -> Result<SqrtRational> {
    Wigner::global().wigner_6j(a, b, c, d, e, f)
}

/// Racah W-coefficient with the process-wide calculator.
pub fn racah_w(a: HalfInt, b: HalfInt, a2: HalfInt, b2: HalfInt, j: HalfInt, j2: HalfInt) -> Result<SqrtRational> {
    Wigner::global().racah_w(a, b, a2, b2, j, j2)
}
