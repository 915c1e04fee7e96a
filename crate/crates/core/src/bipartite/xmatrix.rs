//! The partial-transposition matrix `X`: `(1 ⊗ τ) Q̃^J = Σ_J' X_JJ' P̃^J'`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{partial_transpose_b, projector, BipartiteError, ProjectorKind, Result, SpinPair};
use crate::angular::Wigner;
use crate::exact::{format_rational, rational_to_f64, snap_to_rational, Rational, SnapConfig};
use crate::half::{phase, HalfInt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XMethod {
    /// Floating-point trace `Tr[(1 ⊗ τ) Q̃^J P^J']`, snapped to rationals.
    Trace,
    /// `(-1)^(2(j_A + j_B)) (2J'+1) {j_A j_B J; j_A j_B J'}`.
    SixJ,
    /// Explicit rational functions of `j_B`, available for `j_A = 1/2` and `j_A = 1`.
    Closed,
}

/// Overall phase used with the 6-j expression for `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SixJPhase {
    /// `(-1)^(2(j_A + j_B))`, which agrees with the trace definition for every pair.
    BothSpins,
    /// `(-1)^(2 j_B)`, which agrees only when `j_A` is an integer.
    SecondSpinOnly,
}

/// Exact `d_A × d_A` matrix, rows and columns indexed by ascending total spin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XMatrix {
    pair: SpinPair,
    method: XMethod,
    entries: Vec<Rational>,
}

/// Outcome of the three structural checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XChecks {
    pub row_sums_one: bool,
    pub involution: bool,
    pub detailed_balance: bool,
}

impl XChecks {
    pub fn all(&self) -> bool {
        self.row_sums_one && self.involution && self.detailed_balance
    }
}

impl XMatrix {
    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn method(&self) -> XMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.pair.d_a()
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.dim() + col]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        let d = self.dim();
        &self.entries[row * d..(row + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.dim())
    }

    /// True when both matrices have identical entries, whatever method produced them.
    pub fn same_entries(&self, other: &XMatrix) -> bool {
        self.pair == other.pair && self.entries == other.entries
    }

    /// Row vector times matrix: `out_J = Σ_J' v_J' X_J'J`.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length must equal d_A");
        (0..d)
            .map(|c| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(r, x)| x * self.get(r, c)).sum())
            .collect()
    }

    pub fn checks(&self) -> XChecks {
        let d = self.dim();
        let row_sums_one = self.rows().all(|r| r.iter().sum::<Rational>().is_one());
        let involution = (0..d).all(|r| {
            let sq = self.apply(self.row(r));
            sq.iter().enumerate().all(|(c, v)| if r == c { v.is_one() } else { v.is_zero() })
        });
        let weight = |k: usize| Rational::from_integer(BigInt::from(self.pair.total_spin(k).doubled() + 1));
        let detailed_balance = (0..d).all(|r| (0..d).all(|c| weight(r) * self.get(r, c) == weight(c) * self.get(c, r)));
        XChecks { row_sums_one, involution, detailed_balance }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| rational_to_f64(self.get(r, c)))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows().map(|r| r.iter().map(format_rational).collect()).collect()
    }
}

/// The exact `X` for `pair` through the 6-j expression, memoized per pair.
pub(crate) fn cached_x(pair: SpinPair) -> Result<Arc<XMatrix>> {
    static CACHE: OnceLock<RwLock<HashMap<SpinPair, Arc<XMatrix>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(x) = cache.read().expect("X cache poisoned").get(&pair) {
        return Ok(Arc::clone(x));
    }
    let x = Arc::new(x_matrix(pair, XMethod::SixJ)?);
    cache.write().expect("X cache poisoned").insert(pair, Arc::clone(&x));
    Ok(x)
}

pub fn x_matrix(pair: SpinPair, method: XMethod) -> Result<XMatrix> {
    match method {
        XMethod::Trace => trace_method(pair),
        XMethod::SixJ => x_matrix_sixj_with_phase(pair, SixJPhase::BothSpins),
        XMethod::Closed => closed_method(pair),
    }
}

/// `X_JJ'` in floating point from the trace definition.
pub fn x_matrix_trace_f64(pair: SpinPair) -> Result<DMatrix<f64>> {
    let d = pair.d_a();
    let pts: Vec<DMatrix<f64>> = pair
        .total_spins()
        .map(|j| {
            let q = projector(pair, j, ProjectorKind::Q)?;
            Ok(partial_transpose_b(&q, pair.d_a(), pair.d_b()) / f64::from(j.doubled() + 1))
        })
        .collect::<Result<_>>()?;
    let ps: Vec<DMatrix<f64>> =
        pair.total_spins().map(|j| projector(pair, j, ProjectorKind::P)).collect::<Result<_>>()?;
    // Tr(A B) = Σ A_ik B_ki; P is symmetric
    Ok(DMatrix::from_fn(d, d, |r, c| pts[r].component_mul(&ps[c]).sum()))
}

fn trace_method(pair: SpinPair) -> Result<XMatrix> {
    let x = x_matrix_trace_f64(pair)?;
    let d = pair.d_a();
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            let value = x[(r, c)];
            let snapped = snap_to_rational(value, SnapConfig::default()).ok_or(BipartiteError::SnapFailed {
                row: r,
                col: c,
                value,
            })?;
            entries.push(snapped);
        }
    }
    Ok(XMatrix { pair, method: XMethod::Trace, entries })
}

/// The 6-j expression for `X` under either overall phase.
pub fn x_matrix_sixj_with_phase(pair: SpinPair, convention: SixJPhase) -> Result<XMatrix> {
    let (ja, jb) = (pair.ja(), pair.jb());
    let sign = match convention {
        SixJPhase::BothSpins => phase(HalfInt::from_doubled(2 * (ja + jb).doubled())),
        SixJPhase::SecondSpinOnly => phase(HalfInt::from_doubled(2 * jb.doubled())),
    };
    let w = Wigner::global();
    let mut entries = Vec::with_capacity(pair.d_a() * pair.d_a());
    for j in pair.total_spins() {
        for jp in pair.total_spins() {
            let six = w.wigner_6j(ja, jb, j, ja, jb, jp)?;
            let six = six.to_rational().expect("paired 6-j symbols are rational");
            let weight = Rational::from_integer(BigInt::from(sign * (jp.doubled() + 1)));
            entries.push(weight * six);
        }
    }
    Ok(XMatrix { pair, method: XMethod::SixJ, entries })
}

fn closed_method(pair: SpinPair) -> Result<XMatrix> {
    let b = Rational::new(BigInt::from(pair.jb().doubled()), BigInt::from(2));
    let one = Rational::one();
    let two = &one + &one;
    let three = &two + &one;
    let entries = match pair.ja().doubled() {
        1 => {
            let den = &two * &b + &one;
            [-one.clone(), &two * (&b + &one), &two * &b, one.clone()].into_iter().map(|v| v / &den).collect()
        }
        2 => {
            let den = &b * (&b + &one) * (&two * &b + &one);
            let raw = [
                &b + &one,
                -((&b + &one) * (&two * &b + &one)),
                &b * (&b + &one) * (&two * &b + &three),
                -((&b + &one) * (&two * &b - &one)),
                (&b * &b + &b - &one) * (&two * &b + &one),
                &b * (&two * &b + &three),
                &b * (&b + &one) * (&two * &b - &one),
                &b * (&two * &b + &one),
                b.clone(),
            ];
            raw.into_iter().map(|v| v / &den).collect()
        }
        _ => return Err(BipartiteError::NoClosedForm(pair.ja())),
    };
    Ok(XMatrix { pair, method: XMethod::Closed, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    fn matrix(rows: &[&[(i64, i64)]]) -> Vec<Rational> {
        rows.iter().flat_map(|r| r.iter().map(|&(n, d)| rational(n, d))).collect()
    }

    fn pair(ta: i32, tb: i32) -> SpinPair {
        SpinPair::from_doubled(ta, tb).unwrap()
    }

    #[test]
    fn known_matrices() {
        let cases = [
            (pair(1, 1), matrix(&[&[(-1, 2), (3, 2)], &[(1, 2), (1, 2)]])),
            (pair(2, 2), matrix(&[&[(2, 6), (-6, 6), (10, 6)], &[(-2, 6), (3, 6), (5, 6)], &[(2, 6), (3, 6), (1, 6)]])),
            (pair(1, 2), matrix(&[&[(-1, 3), (4, 3)], &[(2, 3), (1, 3)]])),
            (
                pair(2, 4),
                matrix(&[&[(1, 10), (-1, 2), (7, 5)], &[(-3, 10), (5, 6), (7, 15)], &[(3, 5), (1, 3), (1, 15)]]),
            ),
        ];
        for (p, expected) in cases {
            for method in [XMethod::Trace, XMethod::SixJ, XMethod::Closed] {
                let x = x_matrix(p, method).unwrap();
                assert_eq!(x.entries, expected, "{p} {method:?}");
                assert!(x.checks().all());
            }
        }
    }

    #[test]
    fn methods_agree() {
        for ta in [1, 2] {
            for tb in ta..=9 {
                let p = pair(ta, tb);
                let six = x_matrix(p, XMethod::SixJ).unwrap();
                let tr = x_matrix_trace_f64(p).unwrap();
                assert!((six.to_f64() - &tr).abs().max() < 1e-10, "{p}");
                assert!(x_matrix(p, XMethod::Trace).unwrap().same_entries(&six), "{p}");
                assert!(x_matrix(p, XMethod::Closed).unwrap().same_entries(&six), "{p}");
            }
        }
    }

    #[test]
    fn structural_identities() {
        for ta in 0..=4 {
            for tb in ta..=8 {
                let p = pair(ta, tb);
                let x = x_matrix(p, XMethod::SixJ).unwrap();
                assert!(x.checks().all(), "{p}: {:?}", x.checks());
            }
        }
    }

    #[test]
    fn second_spin_phase_fails_for_half_integer_first_spin() {
        let p = pair(1, 1);
        let printed = x_matrix_sixj_with_phase(p, SixJPhase::SecondSpinOnly).unwrap();
        let good = x_matrix(p, XMethod::SixJ).unwrap();
        assert!(!printed.same_entries(&good));
        assert!(printed.entries.iter().zip(&good.entries).all(|(a, b)| a == &-b));
        let p = pair(2, 3);
        let printed = x_matrix_sixj_with_phase(p, SixJPhase::SecondSpinOnly).unwrap();
        assert!(printed.same_entries(&x_matrix(p, XMethod::SixJ).unwrap()));
    }

    #[test]
    fn closed_forms_are_involutions() {
        for ta in [1, 2] {
            for tb in ta..=9 {
                let x = x_matrix(pair(ta, tb), XMethod::Closed).unwrap();
                assert!(x.checks().all());
            }
        }
        assert_eq!(x_matrix(pair(4, 4), XMethod::Closed), Err(BipartiteError::NoClosedForm(HalfInt::integer(2))));
    }
}
