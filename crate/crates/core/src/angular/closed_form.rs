//! Closed forms for 6-j symbols with one entry equal to 1/2 or 1.
//!
//! Each [`SixJPattern`] is one literal arrangement of arguments; [`sixj_closed_form`]
//! searches the 24 symmetry images of a symbol for a matching arrangement.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{sixj_symmetry_images, sixj_triads_hold};
use crate::exact::{Rational, SqrtRational};
use crate::half::{phase, HalfInt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no closed form applies to {{{} {} {}; {} {} {}}}", .0[0], .0[1], .0[2], .0[3], .0[4], .0[5])]
pub struct NoClosedForm(pub [HalfInt; 6]);

/// The six special arrangements, each parameterized by `(j1, j2, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SixJPattern {
    /// `{j1-1/2, 1/2, j1; j2, j, j2-1/2}`
    HalfCrossed { j1: HalfInt, j2: HalfInt, j: HalfInt },
    /// `{j1-1/2, 1/2, j1; j2-1/2, j, j2}`
    HalfParallel { j1: HalfInt, j2: HalfInt, j: HalfInt },
    /// `{j1-1, 1, j1; j2, j, j2-1}`
    OneCrossed { j1: HalfInt, j2: HalfInt, j: HalfInt },
    /// `{j1-1, 1, j1; j2-1, j, j2}`
    OneParallel { j1: HalfInt, j2: HalfInt, j: HalfInt },
    /// `{j1, 1, j1; j2-1, j, j2}`
    OneMixed { j1: HalfInt, j2: HalfInt, j: HalfInt },
    /// `{j1, 1, j1; j2, j, j2}`
    OneDiagonal { j1: HalfInt, j2: HalfInt, j: HalfInt },
}

fn q(h: HalfInt) -> Rational {
    Rational::new(BigInt::from(h.doubled()), BigInt::from(2))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

impl SixJPattern {
    fn params(&self) -> (HalfInt, HalfInt, HalfInt) {
        match *self {
            SixJPattern::HalfCrossed { j1, j2, j }
            | SixJPattern::HalfParallel { j1, j2, j }
            | SixJPattern::OneCrossed { j1, j2, j }
            | SixJPattern::OneParallel { j1, j2, j }
            | SixJPattern::OneMixed { j1, j2, j }
            | SixJPattern::OneDiagonal { j1, j2, j } => (j1, j2, j),
        }
    }

    /// The symbol's arguments `[a, b, c, d, e, f]` for `{a b c; d e f}`.
    pub fn args(&self) -> [HalfInt; 6] {
        let (j1, j2, j) = self.params();
        let half = HalfInt::HALF;
        let one = HalfInt::ONE;
        match self {
            SixJPattern::HalfCrossed { .. } => [j1 - half, half, j1, j2, j, j2 - half],
            SixJPattern::HalfParallel { .. } => [j1 - half, half, j1, j2 - half, j, j2],
            SixJPattern::OneCrossed { .. } => [j1 - one, one, j1, j2, j, j2 - one],
            SixJPattern::OneParallel { .. } => [j1 - one, one, j1, j2 - one, j, j2],
            SixJPattern::OneMixed { .. } => [j1, one, j1, j2 - one, j, j2],
            SixJPattern::OneDiagonal { .. } => [j1, one, j1, j2, j, j2],
        }
    }

    /// Recognizes the literal arrangement of `args` (no symmetry applied).
    pub fn match_literal(args: [HalfInt; 6]) -> Option<SixJPattern> {
        let [a, b, c, d, e, f] = args;
        let half = HalfInt::HALF;
        let one = HalfInt::ONE;
        let (j1, j) = (c, e);
        if args.iter().any(|x| x.is_negative()) {
            return None;
        }
        let candidates = [
            (b == half && a == j1 - half && f == d - half, SixJPattern::HalfCrossed { j1, j2: d, j }),
            (b == half && a == j1 - half && d == f - half, SixJPattern::HalfParallel { j1, j2: f, j }),
            (b == one && a == j1 - one && f == d - one, SixJPattern::OneCrossed { j1, j2: d, j }),
            (b == one && a == j1 - one && d == f - one, SixJPattern::OneParallel { j1, j2: f, j }),
            (b == one && a == j1 && d == f - one, SixJPattern::OneMixed { j1, j2: f, j }),
            (b == one && a == j1 && d == f, SixJPattern::OneDiagonal { j1, j2: f, j }),
        ];
        candidates.into_iter().find(|(ok, p)| *ok && p.denominators_nonzero()).map(|(_, p)| p)
    }

    fn denominators_nonzero(&self) -> bool {
        let (j1, j2, _) = self.params();
        match self {
            SixJPattern::HalfCrossed { .. } | SixJPattern::HalfParallel { .. } => {
                j1 >= HalfInt::HALF && j2 >= HalfInt::HALF
            }
            SixJPattern::OneCrossed { .. } | SixJPattern::OneParallel { .. } => {
                j1 >= HalfInt::ONE && j2 >= HalfInt::ONE
            }
            SixJPattern::OneMixed { .. } => j1 >= HalfInt::HALF && j2 >= HalfInt::ONE,
            SixJPattern::OneDiagonal { .. } => j1 >= HalfInt::HALF && j2 >= HalfInt::HALF,
        }
    }

    /// Evaluates the closed form. The arguments must satisfy the triangle conditions.
    pub fn evaluate(&self) -> SqrtRational {
        let (j1, j2, j) = self.params();
        let big_j = j1 + j2 + j;
        let (a1, a2, aj, s) = (q(j1), q(j2), q(j), q(big_j));
        let two = int(2);
        let one = int(1);
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        let (sign, radicand) = match self {
            SixJPattern::HalfCrossed { .. } => {
                let num = (&s + &one) * (&s - &two * &aj);
                let den = &two * &a1 * (&two * &a1 + &one) * &two * &a2 * (&two * &a2 + &one);
                (phase(big_j), num / den)
            }
            SixJPattern::HalfParallel { .. } => {
                let num = (&s - &two * &a1 + &half) * (&s - &two * &a2 + &half);
                let den = &two * &a1 * (&two * &a1 + &one) * &two * &a2 * (&two * &a2 + &one);
                (phase(big_j - HalfInt::HALF), num / den)
            }
            SixJPattern::OneCrossed { .. } => {
                let num = &s * (&s + &one) * (&s - &two * &aj - &one) * (&s - &two * &aj);
                (phase(big_j), num / one_shift_den(&a1, &a2))
            }
            SixJPattern::OneParallel { .. } => {
                let num = (&s - &two * &a1) * (&s - &two * &a1 + &one) * (&s - &two * &a2) * (&s - &two * &a2 + &one);
                (phase(big_j - HalfInt::ONE), num / one_shift_den(&a1, &a2))
            }
            SixJPattern::OneMixed { .. } => {
                let num = &two * (&s + &one) * (&s - &two * &aj) * (&s - &two * &a1) * (&s - &two * &a2 + &one);
                let den = &two
                    * &a1
                    * (&two * &a1 + &one)
                    * (&two * &a1 + &two)
                    * (&two * &a2 - &one)
                    * &two
                    * &a2
                    * (&two * &a2 + &one);
                (phase(big_j), num / den)
            }
            SixJPattern::OneDiagonal { .. } => {
                let num = &aj * (&aj + &one) - &a1 * (&a1 + &one) - &a2 * (&a2 + &one);
                let den =
                    &a1 * (&two * &a1 + &one) * (&two * &a1 + &two) * &a2 * (&two * &a2 + &one) * (&two * &a2 + &two);
                let value = SqrtRational::from_rational(&num);
                let scale = SqrtRational::new(1, den.recip()).expect("positive denominator");
                return (&value * &scale).scale_sign(phase(big_j));
            }
        };
        debug_assert!(!radicand.is_negative(), "{self:?} radicand {radicand}");
        if radicand.is_zero() || radicand.is_negative() {
            return SqrtRational::zero();
        }
        SqrtRational::new(1, radicand).expect("non-negative").scale_sign(sign)
    }
}

fn one_shift_den(a1: &Rational, a2: &Rational) -> Rational {
    let two = int(2);
    let one = int(1);
    (&two * a1 - &one) * &two * a1 * (&two * a1 + &one) * (&two * a2 - &one) * &two * a2 * (&two * a2 + &one)
}

/// Evaluates `{a b c; d e f}` through a closed form if one of its symmetry images
/// matches a [`SixJPattern`]. Arguments violating a triangle condition give zero.
pub fn sixj_closed_form(args: [HalfInt; 6]) -> Result<SqrtRational, NoClosedForm> {
    if args.iter().any(|x| x.is_negative()) {
        return Err(NoClosedForm(args));
    }
    if !sixj_triads_hold(args) {
        return Ok(SqrtRational::zero());
    }
    find_pattern(args).map(|p| p.evaluate()).ok_or(NoClosedForm(args))
}

/// The first pattern matching any symmetry image of `args`.
pub fn find_pattern(args: [HalfInt; 6]) -> Option<SixJPattern> {
    sixj_symmetry_images(args).into_iter().find_map(SixJPattern::match_literal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::wigner_6j;
    use crate::exact::rational;

    fn h(two: i32) -> HalfInt {
        HalfInt::from_doubled(two)
    }

    #[test]
    fn diagonal_pattern_example() {
        let p = SixJPattern::OneDiagonal { j1: h(2), j2: h(2), j: h(0) };
        assert_eq!(p.args(), [h(2), h(2), h(2), h(2), h(0), h(2)]);
        assert_eq!(p.evaluate().to_rational(), Some(rational(-1, 3)));
        assert_eq!(sixj_closed_form([h(2), h(2), h(0), h(2), h(2), h(0)]).unwrap().to_rational(), Some(rational(1, 3)));
    }

    #[test]
    fn no_closed_form_for_generic_symbol() {
        let args = [h(6); 6];
        assert_eq!(sixj_closed_form(args), Err(NoClosedForm(args)));
    }

    #[test]
    fn every_pattern_agrees_with_racah_sum() {
        // sweep (j1, j2, j) so that every argument stays at or below 9/2
        let mut seen = [0usize; 6];
        for tj1 in 0..=9 {
            for tj2 in 0..=9 {
                for tj in 0..=9 {
                    let (j1, j2, j) = (h(tj1), h(tj2), h(tj));
                    let patterns = [
                        SixJPattern::HalfCrossed { j1, j2, j },
                        SixJPattern::HalfParallel { j1, j2, j },
                        SixJPattern::OneCrossed { j1, j2, j },
                        SixJPattern::OneParallel { j1, j2, j },
                        SixJPattern::OneMixed { j1, j2, j },
                        SixJPattern::OneDiagonal { j1, j2, j },
                    ];
                    for (k, p) in patterns.into_iter().enumerate() {
                        let args = p.args();
                        if !p.denominators_nonzero()
                            || args.iter().any(|a| a.is_negative() || *a > h(9))
                            || !sixj_triads_hold(args)
                        {
                            continue;
                        }
                        let [a, b, c, d, e, f] = args;
                        let exact = wigner_6j(a, b, c, d, e, f).unwrap();
                        assert_eq!(p.evaluate(), exact, "{p:?}");
                        seen[k] += 1;
                    }
                }
            }
        }
        assert!(seen.iter().all(|&n| n > 20), "{seen:?}");
    }

    #[test]
    fn symmetry_search_agrees_with_racah_sum() {
        let spins: Vec<_> = HalfInt::magnitudes_up_to(h(5)).collect();
        let mut matched = 0;
        for &a in &spins {
            for &b in &spins {
                for &c in &spins {
                    for &d in &spins {
                        for &e in &spins {
                            for &f in &spins {
                                let args = [a, b, c, d, e, f];
                                if let Ok(v) = sixj_closed_form(args) {
                                    assert_eq!(v, wigner_6j(a, b, c, d, e, f).unwrap(), "{args:?}");
                                    matched += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(matched > 1000);
    }

    #[test]
    fn printed_parallel_shift_one_numerator_is_not_symmetric() {
        // The alternative numerator (J-2j1)(J-2j+1)(J-2j2)(J-2j2+1) misses the
        // j1 <-> j2 symmetry of the symbol; {1 1 2; 1 1 2} separates the two.
        let p = SixJPattern::OneParallel { j1: h(4), j2: h(4), j: h(2) };
        let [a, b, c, d, e, f] = p.args();
        assert_eq!(p.evaluate(), wigner_6j(a, b, c, d, e, f).unwrap());
        let s = rational(5, 1);
        let alt = (&s - rational(4, 1))
            * (&s - rational(2, 1) + rational(1, 1))
            * (&s - rational(4, 1))
            * (&s - rational(4, 1) + rational(1, 1))
            / (rational(3 * 4 * 5, 1) * rational(3 * 4 * 5, 1));
        assert_ne!(SqrtRational::new(1, alt).unwrap().abs(), p.evaluate().abs());
    }
}
