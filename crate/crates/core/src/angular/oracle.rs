//! Brute-force 6-j evaluation as a sum over products of four 3-j symbols.
//!
//! This path is deliberately floating point: the terms are products of four surds, which
//! do not close under [`SqrtRational`](crate::exact::SqrtRational). It exists to
//! cross-check the Racah single-sum evaluator.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use super::{sixj_triads_hold, Result, Wigner};
use crate::half::{phase, HalfInt};

type ThreeJKey = [i32; 6];

fn three_j_cache() -> &'static RwLock<HashMap<ThreeJKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<ThreeJKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn three_j(j: [HalfInt; 3], m: [HalfInt; 3]) -> Result<f64> {
    let key = [j[0], j[1], j[2], m[0], m[1], m[2]].map(HalfInt::doubled);
    if let Some(v) = three_j_cache().read().expect("3-j cache poisoned").get(&key) {
        return Ok(*v);
    }
    let v = Wigner::global().wigner_3j(j[0], j[1], j[2], m[0], m[1], m[2])?.to_f64();
    three_j_cache().write().expect("3-j cache poisoned").insert(key, v);
    Ok(v)
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `{l1 l2 l3; l1' l2' l3'}` from
///
/// ```text
/// (-1)^(l1'+l2'+l3') {l1 l2 l3; l1' l2' l3'}
///   = Σ (-1)^(m1'+m2'+m3') (l1 l2 l3; m1 m2 m3) (l1 l2' l3'; -m1 m2' -m3')
///                          (l1' l2 l3'; -m1' -m2 m3') (l1' l2' l3; m1' -m2' -m3)
/// ```
///
/// summed over all magnetic numbers. The two phases are combined into the integer
/// exponent `Σ (l'_k - m'_k)` so that half-integer spins are handled without complex
/// phases. Triad-violating arguments give an empty sum, `0.0`.
pub fn wigner_6j_oracle(l1: HalfInt, l2: HalfInt, l3: HalfInt, k1: HalfInt, k2: HalfInt, k3: HalfInt) -> Result<f64> {
    if !sixj_triads_hold([l1, l2, l3, k1, k2, k3]) {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::default();
    // Free summation variables m1, m2, m2'; the 3-j selection rules fix the rest.
    for m1 in l1.projections() {
        for m2 in l2.projections() {
            let m3 = -(m1 + m2);
            if !l3.admits_projection(m3) {
                continue;
            }
            let a = three_j([l1, l2, l3], [m1, m2, m3])?;
            if a == 0.0 {
                continue;
            }
            for n2 in k2.projections() {
                let n3 = n2 - m1;
                if !k3.admits_projection(n3) {
                    continue;
                }
                let n1 = n3 - m2;
                if !k1.admits_projection(n1) {
                    continue;
                }
                let b = three_j([l1, k2, k3], [-m1, n2, -n3])?;
                let c = three_j([k1, l2, k3], [-n1, -m2, n3])?;
                let d = three_j([k1, k2, l3], [n1, -n2, -m3])?;
                let sign = phase(l1 + l2 + l3 + (k1 + n1) + (k2 + n2) + (k3 + n3));
                acc.add(f64::from(sign) * a * b * c * d);
            }
        }
    }
    Ok(acc.value())
}
