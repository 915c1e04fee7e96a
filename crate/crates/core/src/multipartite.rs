//! Invariant states of `K` spin pairs and their σ-partial transposes.
//!
//! The fidelity tensor is stored row-major over slots in declaration order, slot 0
//! most significant, each slot's total spin ascending. The σ-transform is applied slot
//! by slot, touching only slots with `σ_i = 1`, so a mask costs
//! `O(K · D · max d_A)` for a tensor of `D` entries.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bipartite::{
    cached_x, projector, separability_is_decisive, BipartiteError, DensityMatrix, Family, SpinPair, XMatrix,
};
use crate::exact::{format_rational, rational_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultipartiteError {
    #[error("at least one spin pair is required")]
    NoPairs,
    #[error("at most {max} pairs are supported, got {found}")]
    TooManyPairs { max: usize, found: usize },
    #[error("mask has {found} bits, expected {expected}")]
    MaskLength { expected: usize, found: usize },
    #[error("invalid mask {0:?}: expected a string of 0 and 1")]
    InvalidMask(String),
    #[error("invalid fidelities: {0}")]
    InvalidFidelities(String),
    #[error("slot {slot} is out of range for {k} pairs")]
    SlotOutOfRange { slot: usize, k: usize },
    #[error("cannot reduce a single pair")]
    CannotReduce,
    #[error("state is not {mask}-PPT")]
    NotPositive { mask: BinaryMask, signed: Vec<Rational> },
    #[error(transparent)]
    Bipartite(#[from] BipartiteError),
}

pub type Result<T> = std::result::Result<T, MultipartiteError>;

/// Masks are stored in a machine word; enumeration over `2^K` masks bounds `K` anyway.
pub const MAX_PAIRS: usize = 63;

/// Binary `K`-vector `(σ_1, …, σ_K)`, written as the string `σ_1 σ_2 … σ_K`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryMask {
    len: usize,
    bits: u64,
}

impl BinaryMask {
    pub fn zeros(len: usize) -> Self {
        BinaryMask { len, bits: 0 }
    }

    pub fn ones(len: usize) -> Self {
        BinaryMask { len, bits: if len == 64 { u64::MAX } else { (1u64 << len) - 1 } }
    }

    /// The mask whose `σ_i` is bit `i - 1` of `n`. Ascending `n` is the enumeration
    /// order used by [`classify`].
    pub fn from_index(n: u64, len: usize) -> Self {
        BinaryMask { len, bits: n & BinaryMask::ones(len).bits }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut m = BinaryMask::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            m = m.with(i, b);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> u64 {
        self.bits
    }

    /// `σ_{slot+1}`.
    pub fn get(&self, slot: usize) -> bool {
        self.bits >> slot & 1 == 1
    }

    pub fn with(self, slot: usize, value: bool) -> Self {
        let bits = if value { self.bits | 1 << slot } else { self.bits & !(1 << slot) };
        BinaryMask { len: self.len, bits }
    }

    pub fn xor(self, other: BinaryMask) -> Self {
        assert_eq!(self.len, other.len, "mask lengths differ");
        BinaryMask { len: self.len, bits: self.bits ^ other.bits }
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn remove(self, slot: usize) -> Self {
        let bits: Vec<bool> = (0..self.len).filter(|&i| i != slot).map(|i| self.get(i)).collect();
        BinaryMask::from_bits(&bits)
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Display for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryMask({self})")
    }
}

impl FromStr for BinaryMask {
    type Err = MultipartiteError;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > 64 || s.chars().any(|c| c != '0' && c != '1') {
            return Err(MultipartiteError::InvalidMask(s.to_owned()));
        }
        Ok(BinaryMask::from_bits(&s.chars().map(|c| c == '1').collect::<Vec<_>>()))
    }
}

impl Serialize for BinaryMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn check_pairs(pairs: &[SpinPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(MultipartiteError::NoPairs);
    }
    if pairs.len() > MAX_PAIRS {
        return Err(MultipartiteError::TooManyPairs { max: MAX_PAIRS, found: pairs.len() });
    }
    Ok(())
}

fn check_mask(pairs: &[SpinPair], mask: BinaryMask) -> Result<()> {
    if mask.len() != pairs.len() {
        return Err(MultipartiteError::MaskLength { expected: pairs.len(), found: mask.len() });
    }
    Ok(())
}

/// Point of the invariant simplex of `K` pairs in the family selected by `family`
/// (bit `i` set means slot `i` uses `P^J`, clear means `Q^J`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiFidelity {
    pairs: Vec<SpinPair>,
    family: BinaryMask,
    values: Vec<Rational>,
}

impl MultiFidelity {
    pub fn new(pairs: Vec<SpinPair>, family: BinaryMask, values: Vec<Rational>) -> Result<Self> {
        check_pairs(&pairs)?;
        check_mask(&pairs, family)?;
        let len: usize = pairs.iter().map(SpinPair::d_a).product();
        if values.len() != len {
            return Err(MultipartiteError::InvalidFidelities(format!("expected {len} values, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(MultipartiteError::InvalidFidelities(format!("negative value {}", format_rational(v))));
        }
        let total: Rational = values.iter().sum();
        if !total.is_one() {
            return Err(MultipartiteError::InvalidFidelities(format!("values sum to {}", format_rational(&total))));
        }
        Ok(MultiFidelity { pairs, family, values })
    }

    /// All weight on one multi-index, given as per-slot positions.
    pub fn delta(pairs: Vec<SpinPair>, family: BinaryMask, index: &[usize]) -> Result<Self> {
        check_pairs(&pairs)?;
        let dims: Vec<usize> = pairs.iter().map(SpinPair::d_a).collect();
        if index.len() != dims.len() || index.iter().zip(&dims).any(|(k, d)| k >= d) {
            return Err(MultipartiteError::InvalidFidelities(format!("index {index:?} out of range")));
        }
        let mut values = vec![Rational::zero(); dims.iter().product()];
        values[flat_index(&dims, index)] = Rational::one();
        MultiFidelity::new(pairs, family, values)
    }

    pub fn pairs(&self) -> &[SpinPair] {
        &self.pairs
    }

    pub fn family(&self) -> BinaryMask {
        self.family
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.pairs.iter().map(SpinPair::d_a).collect()
    }

    /// Reorders slots: slot `i` of the result is slot `perm[i]` of `self`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(MultipartiteError::InvalidFidelities(format!("{perm:?} is not a permutation")));
        }
        let dims = self.dims();
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let mut values = vec![Rational::zero(); self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = multi_index(&dims, flat);
            let new_idx: Vec<usize> = perm.iter().map(|&p| idx[p]).collect();
            values[flat_index(&new_dims, &new_idx)] = v.clone();
        }
        let pairs = perm.iter().map(|&p| self.pairs[p]).collect();
        let family = BinaryMask::from_bits(&perm.iter().map(|&p| self.family.get(p)).collect::<Vec<_>>());
        Ok(MultiFidelity { pairs, family, values })
    }

    /// `ρ = Σ_J q_J ⊗_i Π̃^{J_i}` on the pair-grouped space `A_1 B_1 A_2 B_2 …`.
    pub fn to_density(&self) -> DensityMatrix {
        let weights: Vec<f64> = self.values.iter().map(rational_to_f64).collect();
        invariant_density(&self.pairs, self.family, &weights).expect("validated")
    }
}

/// `Σ_J w_J ⊗_i Π̃^{J_i}` for floating-point weights in multi-index order.
pub fn invariant_density(pairs: &[SpinPair], family: BinaryMask, weights: &[f64]) -> Result<DensityMatrix> {
    check_pairs(pairs)?;
    check_mask(pairs, family)?;
    let dims: Vec<usize> = pairs.iter().map(SpinPair::d_a).collect();
    let len: usize = dims.iter().product();
    if weights.len() != len {
        return Err(MultipartiteError::InvalidFidelities(format!("expected {len} values, got {}", weights.len())));
    }
    let normalized: Vec<Vec<DMatrix<f64>>> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let kind = Family::from_bit(family.get(i)).projector_kind();
            p.total_spins().map(|j| projector(*p, j, kind).expect("own J") / f64::from(j.doubled() + 1)).collect()
        })
        .collect();
    let total: usize = pairs.iter().map(SpinPair::dim).product();
    let mut rho = DMatrix::zeros(total, total);
    for (flat, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let idx = multi_index(&dims, flat);
        let mut term = DMatrix::from_element(1, 1, w);
        for (slot, &k) in idx.iter().enumerate() {
            term = term.kronecker(&normalized[slot][k]);
        }
        rho += term;
    }
    Ok(DensityMatrix::new(rho).expect("square"))
}

/// `Tr(ρ ⊗_i Π^{J_i})` for every multi-index, in floating point.
pub fn twirl_fidelities_f64(rho: &DensityMatrix, pairs: &[SpinPair], family: BinaryMask) -> Result<Vec<f64>> {
    check_pairs(pairs)?;
    check_mask(pairs, family)?;
    let total: usize = pairs.iter().map(SpinPair::dim).product();
    if rho.dim() != total {
        return Err(BipartiteError::DimensionMismatch { expected: total, found: rho.dim() }.into());
    }
    let projectors: Vec<Vec<DMatrix<f64>>> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let kind = Family::from_bit(family.get(i)).projector_kind();
            p.total_spins().map(|j| projector(*p, j, kind)).collect::<std::result::Result<_, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;
    let dims: Vec<usize> = pairs.iter().map(SpinPair::d_a).collect();
    let len: usize = dims.iter().product();
    Ok((0..len)
        .map(|flat| {
            let idx = multi_index(&dims, flat);
            let mut op = DMatrix::from_element(1, 1, 1.0);
            for (slot, &k) in idx.iter().enumerate() {
                op = op.kronecker(&projectors[slot][k]);
            }
            rho.expectation(&op)
        })
        .collect())
}

fn flat_index(dims: &[usize], index: &[usize]) -> usize {
    dims.iter().zip(index).fold(0, |acc, (d, k)| acc * d + k)
}

fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, d) in dims.iter().enumerate().rev() {
        idx[slot] = flat % d;
        flat /= d;
    }
    idx
}

/// `X^σ = X^{σ_1} ⊗ … ⊗ X^{σ_K}`, kept as its factors.
#[derive(Debug, Clone)]
pub struct SigmaXMatrix {
    pairs: Vec<SpinPair>,
    mask: BinaryMask,
    factors: Vec<Arc<XMatrix>>,
}

impl SigmaXMatrix {
    pub fn new(pairs: &[SpinPair], mask: BinaryMask) -> Result<Self> {
        check_pairs(pairs)?;
        check_mask(pairs, mask)?;
        let factors = pairs.iter().map(|p| cached_x(*p)).collect::<std::result::Result<_, _>>()?;
        Ok(SigmaXMatrix { pairs: pairs.to_vec(), mask, factors })
    }

    pub fn mask(&self) -> BinaryMask {
        self.mask
    }

    pub fn pairs(&self) -> &[SpinPair] {
        &self.pairs
    }

    /// Entry `X^σ_{J J'}` for flat multi-indices.
    pub fn entry(&self, row: usize, col: usize) -> Rational {
        let dims: Vec<usize> = self.pairs.iter().map(SpinPair::d_a).collect();
        let (r, c) = (multi_index(&dims, row), multi_index(&dims, col));
        let mut v = Rational::one();
        for slot in 0..dims.len() {
            if self.mask.get(slot) {
                v *= self.factors[slot].get(r[slot], c[slot]);
            } else if r[slot] != c[slot] {
                return Rational::zero();
            }
        }
        v
    }

    /// The full `D × D` matrix. Only sensible for small tensors.
    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let d: usize = self.pairs.iter().map(SpinPair::d_a).product();
        (0..d).map(|r| (0..d).map(|c| self.entry(r, c)).collect()).collect()
    }

    /// Row vector times the dense matrix; reference for [`apply`](Self::apply).
    pub fn apply_dense(&self, v: &[Rational]) -> Vec<Rational> {
        let dense = self.to_dense();
        (0..v.len()).map(|c| v.iter().zip(&dense).map(|(x, row)| x * &row[c]).sum()).collect()
    }

    /// Row vector times `X^σ`, one slot at a time.
    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        let dims: Vec<usize> = self.pairs.iter().map(SpinPair::d_a).collect();
        let mut cur = v.to_vec();
        for slot in 0..dims.len() {
            if self.mask.get(slot) {
                cur = contract_slot_rational(&cur, &dims, slot, &self.factors[slot]);
            }
        }
        cur
    }
}

fn contract_slot_rational(input: &[Rational], dims: &[usize], slot: usize, x: &XMatrix) -> Vec<Rational> {
    let d = dims[slot];
    let inner: usize = dims[slot + 1..].iter().product();
    let mut out = vec![Rational::zero(); input.len()];
    for base in (0..input.len()).step_by(d * inner) {
        for r in 0..d {
            for c in 0..d {
                let xv = x.get(r, c);
                if xv.is_zero() {
                    continue;
                }
                for t in 0..inner {
                    let v = &input[base + r * inner + t];
                    if !v.is_zero() {
                        out[base + c * inner + t] += v * xv;
                    }
                }
            }
        }
    }
    out
}

fn contract_slot_i128(input: &[i128], out: &mut [i128], dims: &[usize], slot: usize, x: &[i128]) -> Option<()> {
    let d = dims[slot];
    let inner: usize = dims[slot + 1..].iter().product();
    out.fill(0);
    for base in (0..input.len()).step_by(d * inner) {
        for r in 0..d {
            let src = &input[base + r * inner..base + (r + 1) * inner];
            for c in 0..d {
                let xv = x[r * d + c];
                if xv == 0 {
                    continue;
                }
                let dst = &mut out[base + c * inner..base + (c + 1) * inner];
                for (o, &v) in dst.iter_mut().zip(src) {
                    if v != 0 {
                        *o = o.checked_add(v.checked_mul(xv)?)?;
                    }
                }
            }
        }
    }
    Some(())
}

/// Common denominator and integer numerators, if the numerators fit in `i128`.
fn integer_form(values: &[Rational]) -> Option<(BigInt, Vec<i128>)> {
    let den = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let nums = values.iter().map(|v| (v.numer() * (&den / v.denom())).to_i128()).collect::<Option<Vec<_>>>()?;
    Some((den, nums))
}

/// Per-state data shared by all mask evaluations: integer numerators of the tensor and
/// of every factor of `X`, with rational fallbacks when they overflow.
struct Prepared {
    dims: Vec<usize>,
    values: Vec<Rational>,
    int_values: Option<(BigInt, Vec<i128>)>,
    factors: Vec<Arc<XMatrix>>,
    int_factors: Vec<Option<(BigInt, Vec<i128>)>>,
}

impl Prepared {
    fn new(s: &MultiFidelity) -> Result<Self> {
        let factors: Vec<Arc<XMatrix>> = s.pairs.iter().map(|p| cached_x(*p)).collect::<std::result::Result<_, _>>()?;
        let int_factors =
            factors.iter().map(|x| integer_form(&x.rows().flatten().cloned().collect::<Vec<_>>())).collect();
        Ok(Prepared {
            dims: s.dims(),
            values: s.values.clone(),
            int_values: integer_form(&s.values),
            factors,
            int_factors,
        })
    }

    /// Numerators of `q X^σ` over a positive common denominator, or `None` on overflow.
    fn transform_int(&self, mask: BinaryMask) -> Option<(BigInt, Vec<i128>)> {
        let (den, nums) = self.int_values.as_ref()?;
        let mut den = den.clone();
        let mut cur = nums.clone();
        let mut scratch = vec![0i128; cur.len()];
        for slot in 0..self.dims.len() {
            if !mask.get(slot) {
                continue;
            }
            let (xden, xnum) = self.int_factors[slot].as_ref()?;
            contract_slot_i128(&cur, &mut scratch, &self.dims, slot, xnum)?;
            std::mem::swap(&mut cur, &mut scratch);
            den *= xden;
        }
        Some((den, cur))
    }

    fn transform(&self, mask: BinaryMask) -> Vec<Rational> {
        if let Some((den, nums)) = self.transform_int(mask) {
            return nums.into_iter().map(|n| Rational::new(BigInt::from(n), den.clone())).collect();
        }
        let mut cur = self.values.clone();
        for slot in 0..self.dims.len() {
            if mask.get(slot) {
                cur = contract_slot_rational(&cur, &self.dims, slot, &self.factors[slot]);
            }
        }
        cur
    }

    fn is_positive(&self, mask: BinaryMask) -> bool {
        match self.transform_int(mask) {
            Some((_, nums)) => nums.iter().all(|&n| n >= 0),
            None => self.transform(mask).iter().all(|v| !v.is_negative()),
        }
    }
}

/// `q' = q X^σ`, the fidelities of `τ_σ ρ`. The state is σ-PPT iff every entry is
/// non-negative.
pub fn sigma_ppt_transform(s: &MultiFidelity, sigma: BinaryMask) -> Result<Vec<Rational>> {
    check_mask(&s.pairs, sigma)?;
    Ok(Prepared::new(s)?.transform(sigma))
}

pub fn is_sigma_ppt(s: &MultiFidelity, sigma: BinaryMask) -> Result<bool> {
    check_mask(&s.pairs, sigma)?;
    Ok(Prepared::new(s)?.is_positive(sigma))
}

/// `τ_ν` maps a μ-family state to a (μ ⊕ ν)-family state when the result is positive.
pub fn apply_partial_transpose_family(s: &MultiFidelity, nu: BinaryMask) -> Result<MultiFidelity> {
    let signed = sigma_ppt_transform(s, nu)?;
    if signed.iter().any(Signed::is_negative) {
        return Err(MultipartiteError::NotPositive { mask: nu, signed });
    }
    Ok(MultiFidelity { pairs: s.pairs.clone(), family: s.family.xor(nu), values: signed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FullySeparable,
    Biseparable,
    Entangled,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Smallest mask in enumeration order whose transform has a negative entry.
    pub failing_mask: Option<BinaryMask>,
    /// Whether every pair is one for which PPT implies separability.
    pub decisive: bool,
}

/// Checks every mask `σ` for σ-PPT.
///
/// When every pair has `j_A = 1/2`, or `j_A = 1` with integer `j_B`, a state that is
/// σ-PPT for all masks is fully separable, and one that is `(1…1)`-PPT but fails
/// another mask is biseparable. Otherwise PPT failures still prove entanglement but
/// passing every mask leaves the question open.
pub fn classify(s: &MultiFidelity) -> Result<Classification> {
    let prepared = Prepared::new(s)?;
    let k = s.k();
    let count = 1u64 << k;
    let failing = (0..count)
        .into_par_iter()
        .find_first(|&n| !prepared.is_positive(BinaryMask::from_index(n, k)))
        .map(|n| BinaryMask::from_index(n, k));
    let decisive = s.pairs.iter().all(|p| separability_is_decisive(*p) || p.d_a() == 1);
    let verdict = match (failing, decisive) {
        (None, true) => Verdict::FullySeparable,
        (None, false) => Verdict::Undecided,
        (Some(_), false) => Verdict::Entangled,
        (Some(_), true) => {
            if prepared.is_positive(BinaryMask::ones(k)) {
                Verdict::Biseparable
            } else {
                Verdict::Entangled
            }
        }
    };
    Ok(Classification { verdict, failing_mask: failing, decisive })
}

/// The transformed tensor for every mask, in enumeration order.
pub fn sigma_report(s: &MultiFidelity) -> Result<Vec<(BinaryMask, Vec<Rational>)>> {
    let prepared = Prepared::new(s)?;
    let k = s.k();
    Ok((0..1u64 << k)
        .into_par_iter()
        .map(|n| {
            let m = BinaryMask::from_index(n, k);
            (m, prepared.transform(m))
        })
        .collect())
}

/// Marginalizes slot `slot` (0-based), dropping its pair and family bit.
pub fn reduce(s: &MultiFidelity, slot: usize) -> Result<MultiFidelity> {
    let k = s.k();
    if slot >= k {
        return Err(MultipartiteError::SlotOutOfRange { slot, k });
    }
    if k < 2 {
        return Err(MultipartiteError::CannotReduce);
    }
    let dims = s.dims();
    let d = dims[slot];
    let inner: usize = dims[slot + 1..].iter().product();
    let mut values = vec![Rational::zero(); s.values.len() / d];
    for (flat, v) in s.values.iter().enumerate() {
        let outer = flat / (d * inner);
        let t = flat % inner;
        values[outer * inner + t] += v;
    }
    let pairs = s.pairs.iter().enumerate().filter(|(i, _)| *i != slot).map(|(_, p)| *p).collect();
    Ok(MultiFidelity { pairs, family: s.family.remove(slot), values })
}

/// Twirl of the product of stretched states: all weight on `J_i = j_A + j_B` in every
/// slot, Werner-like family.
pub fn extremal_separable_fidelities(pairs: &[SpinPair]) -> Result<MultiFidelity> {
    let index: Vec<usize> = pairs.iter().map(|p| p.d_a() - 1).collect();
    MultiFidelity::delta(pairs.to_vec(), BinaryMask::zeros(pairs.len()), &index)
}
