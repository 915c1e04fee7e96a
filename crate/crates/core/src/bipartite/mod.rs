//! Rotationally invariant states of one spin pair `(j_A, j_B)`.
//!
//! The product basis `|m_A; m_B⟩` is ordered with `m` descending in each factor and
//! the `A` index most significant, so `|m_A; m_B⟩` sits at `k_A * d_B + k_B` with
//! `k = j - m`. Total spins `J` always run upward from `j_B - j_A`.

mod fidelity;
mod separability;
mod xmatrix;

pub use fidelity::{
    density_from_fidelities, fidelities_from_density, fidelities_from_density_with, twirl_fidelities_f64, Fidelities,
    FidelityVector, InexactFidelities,
};
pub use separability::{
    coupled_rank_profiles, is_ppt, ppt_transform, schmidt_rank, separability_check, separability_is_decisive,
    RankProfile, Separability,
};
pub(crate) use xmatrix::cached_x;
pub use xmatrix::{x_matrix, x_matrix_sixj_with_phase, x_matrix_trace_f64, SixJPhase, XChecks, XMatrix, XMethod};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{AngularError, Wigner};
use crate::exact::{Rational, SqrtRational, SurdSum};
use crate::half::{phase, HalfInt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BipartiteError {
    #[error("invalid spin pair ({ja}, {jb}): need j_B >= j_A >= 0")]
    InvalidPair { ja: HalfInt, jb: HalfInt },
    #[error("total spin {j} is outside {lo}..={hi}")]
    TotalSpinOutOfRange { j: HalfInt, lo: HalfInt, hi: HalfInt },
    #[error("projection {m} is not allowed for spin {j}")]
    ProjectionOutOfRange { j: HalfInt, m: HalfInt },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid fidelities: {0}")]
    InvalidFidelities(String),
    #[error("no closed-form X matrix for j_A = {0}")]
    NoClosedForm(HalfInt),
    #[error("X entry ({row}, {col}) = {value} does not snap to a rational")]
    SnapFailed { row: usize, col: usize, value: f64 },
    #[error(transparent)]
    Angular(#[from] AngularError),
}

pub type Result<T> = std::result::Result<T, BipartiteError>;

/// Two spins with `j_B >= j_A`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct SpinPair {
    ja: HalfInt,
    jb: HalfInt,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    ja: HalfInt,
    jb: HalfInt,
}

impl TryFrom<RawPair> for SpinPair {
    type Error = BipartiteError;
    fn try_from(raw: RawPair) -> Result<Self> {
        SpinPair::new(raw.ja, raw.jb)
    }
}

impl From<SpinPair> for RawPair {
    fn from(p: SpinPair) -> Self {
        RawPair { ja: p.ja, jb: p.jb }
    }
}

impl SpinPair {
    pub fn new(ja: HalfInt, jb: HalfInt) -> Result<Self> {
        if ja.is_negative() || jb < ja {
            return Err(BipartiteError::InvalidPair { ja, jb });
        }
        Ok(SpinPair { ja, jb })
    }

    /// Shorthand taking doubled spins, e.g. `from_doubled(1, 2)` for `(1/2, 1)`.
    pub fn from_doubled(two_ja: i32, two_jb: i32) -> Result<Self> {
        SpinPair::new(HalfInt::from_doubled(two_ja), HalfInt::from_doubled(two_jb))
    }

    pub fn ja(&self) -> HalfInt {
        self.ja
    }

    pub fn jb(&self) -> HalfInt {
        self.jb
    }

    pub fn d_a(&self) -> usize {
        self.ja.dimension()
    }

    pub fn d_b(&self) -> usize {
        self.jb.dimension()
    }

    /// Dimension `d_A d_B` of the product space.
    pub fn dim(&self) -> usize {
        self.d_a() * self.d_b()
    }

    pub fn j_min(&self) -> HalfInt {
        self.jb - self.ja
    }

    pub fn j_max(&self) -> HalfInt {
        self.jb + self.ja
    }

    /// Allowed total spins, ascending. There are always `d_A` of them.
    pub fn total_spins(&self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        HalfInt::range_step_one(self.j_min(), self.j_max())
    }

    /// Position of `j` in [`total_spins`](Self::total_spins).
    pub fn j_index(&self, j: HalfInt) -> Result<usize> {
        let offset = j - self.j_min();
        if offset.is_negative() || !offset.is_integer() || j > self.j_max() {
            return Err(BipartiteError::TotalSpinOutOfRange { j, lo: self.j_min(), hi: self.j_max() });
        }
        Ok((offset.doubled() / 2) as usize)
    }

    pub fn total_spin(&self, index: usize) -> HalfInt {
        self.j_min() + HalfInt::integer(index as i32)
    }

    /// Index of `|m_A; m_B⟩` in the product basis.
    pub fn basis_index(&self, ma: HalfInt, mb: HalfInt) -> Result<usize> {
        if !self.ja.admits_projection(ma) {
            return Err(BipartiteError::ProjectionOutOfRange { j: self.ja, m: ma });
        }
        if !self.jb.admits_projection(mb) {
            return Err(BipartiteError::ProjectionOutOfRange { j: self.jb, m: mb });
        }
        let ka = ((self.ja - ma).doubled() / 2) as usize;
        let kb = ((self.jb - mb).doubled() / 2) as usize;
        Ok(ka * self.d_b() + kb)
    }
}

impl fmt::Display for SpinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ja, self.jb)
    }
}

impl fmt::Debug for SpinPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinPair{self}")
    }
}

/// Which symmetry a state is invariant under: `D ⊗ D` or `D ⊗ conj(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    WernerLike,
    IsotropicLike,
}

impl Family {
    pub fn projector_kind(self) -> ProjectorKind {
        match self {
            Family::WernerLike => ProjectorKind::Q,
            Family::IsotropicLike => ProjectorKind::P,
        }
    }

    /// The family reached by partially transposing the `B` factor.
    pub fn flipped(self) -> Family {
        match self {
            Family::WernerLike => Family::IsotropicLike,
            Family::IsotropicLike => Family::WernerLike,
        }
    }

    pub fn from_bit(bit: bool) -> Family {
        if bit {
            Family::IsotropicLike
        } else {
            Family::WernerLike
        }
    }

    pub fn bit(self) -> bool {
        self == Family::IsotropicLike
    }
}

/// `Q^J = Σ_M |JM⟩⟨JM|` or `P^J = (1 ⊗ V) Q^J (1 ⊗ V†)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorKind {
    Q,
    P,
}

/// `|JM⟩` expanded in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledVector {
    pub pair: SpinPair,
    pub j: HalfInt,
    pub m: HalfInt,
    /// Nonzero coefficients keyed by `(m_A, m_B)`.
    pub coefficients: BTreeMap<(HalfInt, HalfInt), SqrtRational>,
}

pub fn coupled_vector(pair: SpinPair, j: HalfInt, m: HalfInt) -> Result<CoupledVector> {
    pair.j_index(j)?;
    if !j.admits_projection(m) {
        return Err(BipartiteError::ProjectionOutOfRange { j, m });
    }
    let w = Wigner::global();
    let mut coefficients = BTreeMap::new();
    for ma in pair.ja.projections() {
        let mb = m - ma;
        if !pair.jb.admits_projection(mb) {
            continue;
        }
        let c = w.clebsch_gordan(pair.ja, ma, pair.jb, mb, j, m)?;
        if !c.is_zero() {
            coefficients.insert((ma, mb), c);
        }
    }
    Ok(CoupledVector { pair, j, m, coefficients })
}

impl CoupledVector {
    /// Exact squared norm; always 1.
    pub fn norm_squared(&self) -> Rational {
        self.coefficients.values().map(SqrtRational::square).sum()
    }

    pub fn to_dense(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.pair.dim());
        for (&(ma, mb), c) in &self.coefficients {
            let i = self.pair.basis_index(ma, mb).expect("coefficient keys are valid");
            v[i] = c.to_f64();
        }
        v
    }
}

/// `V|j,m⟩ = (-1)^(j-m) |j,-m⟩` as a signed permutation: entry `k` maps basis
/// vector `k` to `sign * e_target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPermutation {
    pub images: Vec<(usize, i8)>,
}

pub fn intertwiner_v(j: HalfInt) -> SignedPermutation {
    let d = j.dimension();
    let images = j.projections().enumerate().map(|(k, m)| (d - 1 - k, phase(j - m) as i8)).collect();
    SignedPermutation { images }
}

impl SignedPermutation {
    pub fn dim(&self) -> usize {
        self.images.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut v = DMatrix::zeros(d, d);
        for (src, &(dst, s)) in self.images.iter().enumerate() {
            v[(dst, src)] = f64::from(s);
        }
        v
    }

    pub fn compose(&self, inner: &SignedPermutation) -> SignedPermutation {
        let images = inner
            .images
            .iter()
            .map(|&(mid, s)| {
                let (dst, t) = self.images[mid];
                (dst, s * t)
            })
            .collect();
        SignedPermutation { images }
    }
}

/// Dense real projector `Q^J` or `P^J` (not normalized).
pub fn projector(pair: SpinPair, j: HalfInt, kind: ProjectorKind) -> Result<DMatrix<f64>> {
    let q = exact_projector(pair, j, kind)?;
    let mut out = DMatrix::zeros(pair.dim(), pair.dim());
    for (&(r, c), v) in &q.entries {
        out[(r, c)] = v.to_f64();
    }
    Ok(out)
}

/// Sparse operator with exact surd entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOperator {
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), SqrtRational>,
}

/// Sparse operator whose entries are sums of surds, e.g. a product of two
/// [`ExactOperator`]s.
#[derive(Debug, Clone, Default)]
pub struct SurdOperator {
    pub entries: BTreeMap<(usize, usize), SurdSum>,
}

/// `Q^J` or `P^J` with exact entries. Each entry is a product of two Clebsch-Gordan
/// coefficients, since only one `M` contributes to a given matrix element.
pub fn exact_projector(pair: SpinPair, j: HalfInt, kind: ProjectorKind) -> Result<ExactOperator> {
    let v = intertwiner_v(pair.jb);
    let mut entries = BTreeMap::new();
    for m in j.projections() {
        let cv = coupled_vector(pair, j, m)?;
        let mut column: Vec<(usize, SqrtRational)> = Vec::with_capacity(cv.coefficients.len());
        for (&(ma, mb), c) in &cv.coefficients {
            let idx = pair.basis_index(ma, mb)?;
            match kind {
                ProjectorKind::Q => column.push((idx, c.clone())),
                ProjectorKind::P => {
                    let (ia, ib) = (idx / pair.d_b(), idx % pair.d_b());
                    let (tb, s) = v.images[ib];
                    column.push((ia * pair.d_b() + tb, c.scale_sign(i32::from(s))));
                }
            }
        }
        for (r, a) in &column {
            for (c, b) in &column {
                entries.insert((*r, *c), a * b);
            }
        }
    }
    Ok(ExactOperator { dim: pair.dim(), entries })
}

impl ExactOperator {
    pub fn trace(&self) -> SurdSum {
        let mut t = SurdSum::zero();
        for ((r, c), v) in &self.entries {
            if r == c {
                t.add_sqrt(v);
            }
        }
        t
    }

    pub fn product(&self, other: &ExactOperator) -> SurdOperator {
        let mut by_row: BTreeMap<usize, Vec<(usize, &SqrtRational)>> = BTreeMap::new();
        for (&(r, c), v) in &other.entries {
            by_row.entry(r).or_default().push((c, v));
        }
        let mut out = SurdOperator::default();
        for (&(r, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(c, b) in row {
                    out.entries.entry((r, c)).or_insert_with(SurdSum::zero).add_sqrt(&(a * b));
                }
            }
        }
        out.entries.retain(|_, v| !v.is_zero());
        out
    }
}

impl SurdOperator {
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(SurdSum::is_zero)
    }

    /// Exact equality with an operator of single-surd entries.
    pub fn equals(&self, other: &ExactOperator) -> bool {
        let nonzero: BTreeMap<_, _> = other.entries.iter().filter(|(_, v)| !v.is_zero()).collect();
        let own: Vec<_> = self.entries.iter().filter(|(_, v)| !v.is_zero()).collect();
        if own.len() != nonzero.len() {
            return false;
        }
        own.into_iter().all(|(k, v)| match nonzero.get(k) {
            Some(w) => {
                let mut diff = v.clone();
                diff += &(-SurdSum::from(*w));
                diff.is_zero()
            }
            None => false,
        })
    }
}

/// A real symmetric density matrix in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<f64>);

impl DensityMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(BipartiteError::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(DensityMatrix(matrix))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &DVector<f64>) -> Self {
        let n = psi.norm_squared();
        DensityMatrix(psi * psi.transpose() / n)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(DMatrix::identity(dim, dim) / dim as f64)
    }

    /// The product state `|m_A; m_B⟩⟨m_A; m_B|`.
    pub fn product_state(pair: SpinPair, ma: HalfInt, mb: HalfInt) -> Result<Self> {
        let mut psi = DVector::zeros(pair.dim());
        psi[pair.basis_index(ma, mb)?] = 1.0;
        Ok(DensityMatrix::pure(&psi))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).abs().max()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Symmetric, unit trace and no eigenvalue below `-tolerance`.
    pub fn is_state(&self, tolerance: f64) -> bool {
        self.asymmetry() <= tolerance && (self.trace() - 1.0).abs() <= tolerance && self.min_eigenvalue() >= -tolerance
    }

    /// Partial transpose on the `B` factor of a single pair.
    pub fn partial_transpose_b(&self, pair: SpinPair) -> Result<Self> {
        check_dim(pair.dim(), self.dim())?;
        Ok(DensityMatrix(partial_transpose_b(&self.0, pair.d_a(), pair.d_b())))
    }

    /// `Tr(ρ A)` for a symmetric `A`.
    pub fn expectation(&self, a: &DMatrix<f64>) -> f64 {
        self.0.component_mul(a).sum()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(BipartiteError::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn partial_transpose_b(m: &DMatrix<f64>, da: usize, db: usize) -> DMatrix<f64> {
    DMatrix::from_fn(da * db, da * db, |r, c| {
        let (ra, rb) = (r / db, r % db);
        let (ca, cb) = (c / db, c % db);
        m[(ra * db + cb, ca * db + rb)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rational, rational_from_int};
    use num_traits::One;

    fn h(two: i32) -> HalfInt {
        HalfInt::from_doubled(two)
    }

    #[test]
    fn spin_pair_validation_and_indexing() {
        assert!(SpinPair::from_doubled(2, 1).is_err());
        assert!(SpinPair::from_doubled(-1, 1).is_err());
        let p = SpinPair::from_doubled(1, 2).unwrap();
        assert_eq!(p.total_spins().collect::<Vec<_>>(), vec![h(1), h(3)]);
        assert_eq!(p.j_index(h(3)).unwrap(), 1);
        assert!(p.j_index(h(5)).is_err());
        assert!(p.j_index(h(2)).is_err());
        assert_eq!(p.basis_index(h(1), h(2)).unwrap(), 0);
        assert_eq!(p.basis_index(h(-1), h(-2)).unwrap(), 5);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"ja":"1/2","jb":"1"}"#);
        assert!(serde_json::from_str::<SpinPair>(r#"{"ja":"1","jb":"1/2"}"#).is_err());
    }

    #[test]
    fn coupled_vector_examples() {
        let qubits = SpinPair::from_doubled(1, 1).unwrap();
        let top = coupled_vector(qubits, h(2), h(2)).unwrap();
        assert_eq!(top.coefficients.len(), 1);
        assert_eq!(top.coefficients[&(h(1), h(1))], SqrtRational::one());
        let singlet = coupled_vector(qubits, h(0), h(0)).unwrap();
        let half = SqrtRational::new(1, rational(1, 2)).unwrap();
        assert_eq!(singlet.coefficients[&(h(1), h(-1))], half);
        assert_eq!(singlet.coefficients[&(h(-1), h(1))], -half);
        let p = SpinPair::from_doubled(1, 2).unwrap();
        let top = coupled_vector(p, h(3), h(3)).unwrap();
        assert_eq!(top.coefficients.keys().collect::<Vec<_>>(), vec![&(h(1), h(2))]);
        assert!(coupled_vector(p, h(5), h(1)).is_err());
        assert!(coupled_vector(p, h(3), h(5)).is_err());
    }

    #[test]
    fn coupled_vectors_are_normalized() {
        for (ta, tb) in [(1, 1), (1, 4), (2, 2), (2, 5), (3, 6), (4, 8)] {
            let p = SpinPair::from_doubled(ta, tb).unwrap();
            for j in p.total_spins() {
                for m in j.projections() {
                    assert_eq!(coupled_vector(p, j, m).unwrap().norm_squared(), rational_from_int(1));
                }
            }
        }
    }

    #[test]
    fn intertwiner_examples() {
        let v = intertwiner_v(h(1));
        assert_eq!(v.images, vec![(1, 1), (0, -1)]);
        let v1 = intertwiner_v(h(2));
        assert_eq!(v1.images[1], (1, -1));
        for two_j in 0..=8 {
            let v = intertwiner_v(h(two_j));
            let vv = v.compose(&v);
            let s = phase(h(2 * two_j)) as i8;
            assert!(vv.images.iter().enumerate().all(|(k, &(t, sign))| t == k && sign == s));
            let d = v.to_dense();
            assert!((&d * d.transpose() - DMatrix::identity(v.dim(), v.dim())).abs().max() < 1e-15);
        }
    }

    #[test]
    fn projector_examples() {
        let qubits = SpinPair::from_doubled(1, 1).unwrap();
        let q0 = projector(qubits, h(0), ProjectorKind::Q).unwrap();
        let singlet = DVector::from_vec(vec![0.0, 1.0, -1.0, 0.0]) / 2f64.sqrt();
        assert!((&q0 - &singlet * singlet.transpose()).abs().max() < 1e-15);
        let p0 = projector(qubits, h(0), ProjectorKind::P).unwrap();
        let bell = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]) / 2f64.sqrt();
        assert!((&p0 - &bell * bell.transpose()).abs().max() < 1e-15);
        let p = SpinPair::from_doubled(1, 2).unwrap();
        let sum = projector(p, h(1), ProjectorKind::Q).unwrap() + projector(p, h(3), ProjectorKind::Q).unwrap();
        assert!((sum - DMatrix::identity(6, 6)).abs().max() < 1e-15);
    }

    #[test]
    fn exact_projector_algebra() {
        for ta in 0..=4 {
            for tb in ta..=8 {
                let pair = SpinPair::from_doubled(ta, tb).unwrap();
                for kind in [ProjectorKind::Q, ProjectorKind::P] {
                    let ops: Vec<_> = pair.total_spins().map(|j| exact_projector(pair, j, kind).unwrap()).collect();
                    let mut diagonal = vec![Rational::from_integer(0.into()); pair.dim()];
                    for (a, (ja, qa)) in pair.total_spins().zip(&ops).enumerate() {
                        assert_eq!(qa.trace().to_rational(), Some(rational_from_int(i64::from(ja.doubled() + 1))));
                        for ((r, c), v) in &qa.entries {
                            if r == c {
                                diagonal[*r] += v.to_rational().expect("diagonal entries are squares");
                            }
                        }
                        for (b, qb) in ops.iter().enumerate() {
                            let prod = qa.product(qb);
                            if a == b {
                                assert!(prod.equals(qa), "{pair} {kind:?} J={ja}");
                            } else {
                                assert!(prod.is_zero(), "{pair} {kind:?}");
                            }
                        }
                    }
                    // completeness: diagonal sums to 1 and off-diagonal parts cancel
                    assert!(diagonal.iter().all(|d| d.is_one()));
                    let mut off: BTreeMap<(usize, usize), SurdSum> = BTreeMap::new();
                    for q in &ops {
                        for (&(r, c), v) in &q.entries {
                            if r != c {
                                off.entry((r, c)).or_insert_with(SurdSum::zero).add_sqrt(v);
                            }
                        }
                    }
                    assert!(off.values().all(SurdSum::is_zero), "{pair} {kind:?}");
                }
            }
        }
    }

    #[test]
    fn partial_transpose_of_bell_projector_is_swap_over_two() {
        let qubits = SpinPair::from_doubled(1, 1).unwrap();
        let p0 = DensityMatrix::new(projector(qubits, h(0), ProjectorKind::P).unwrap()).unwrap();
        let pt = p0.partial_transpose_b(qubits).unwrap();
        let mut swap = DMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(r, c)] = 0.5;
        }
        assert!((pt.matrix() - swap).abs().max() < 1e-15);
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-12);
    }
}
