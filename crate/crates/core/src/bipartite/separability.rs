//! PPT test, separability verdicts and Schmidt ranks of coupled vectors.

use num_traits::Signed;
use serde::Serialize;

use super::{cached_x, coupled_vector, CoupledVector, FidelityVector, SpinPair};
use crate::exact::Rational;
use crate::half::HalfInt;

/// `q'_J = Σ_J' q_J' X_J'J`. Entries may be negative; applying `X` again returns `q`.
pub fn ppt_transform(f: &FidelityVector) -> Vec<Rational> {
    cached_x(f.pair()).expect("valid pair").apply(f.values())
}

pub fn is_ppt(f: &FidelityVector) -> bool {
    ppt_transform(f).iter().all(|v| !v.is_negative())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Separability {
    Separable,
    Entangled,
    Undecided,
}

/// Pairs for which PPT is equivalent to separability: `j_A = 1/2`, or `j_A = 1` with
/// integer `j_B`.
pub fn separability_is_decisive(pair: SpinPair) -> bool {
    match pair.ja().doubled() {
        1 => true,
        2 => pair.jb().is_integer(),
        _ => false,
    }
}

/// NPT states are entangled; PPT states are separable where PPT is known to suffice
/// and undecided elsewhere.
pub fn separability_check(f: &FidelityVector) -> Separability {
    if !is_ppt(f) {
        Separability::Entangled
    } else if separability_is_decisive(f.pair()) || f.pair().ja() == HalfInt::ZERO {
        Separability::Separable
    } else {
        Separability::Undecided
    }
}

/// Number of nonzero terms of `|JM⟩`; the product terms are already bi-orthogonal.
pub fn schmidt_rank(v: &CoupledVector) -> usize {
    v.coefficients.values().filter(|c| !c.is_zero()).count()
}

/// Schmidt ranks of the pure components `|JM⟩` of one projector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub j: HalfInt,
    /// Rank of `|J, J⟩`.
    pub top: usize,
    pub min: usize,
    pub max: usize,
}

/// Rank profiles of every `Q^J` for two equal spins `j`.
pub fn coupled_rank_profiles(j: HalfInt) -> Vec<RankProfile> {
    let pair = SpinPair::new(j, j).expect("equal spins form a pair");
    pair.total_spins()
        .map(|big_j| {
            let ranks: Vec<usize> = big_j
                .projections()
                .map(|m| schmidt_rank(&coupled_vector(pair, big_j, m).expect("valid J, M")))
                .collect();
            RankProfile {
                j: big_j,
                top: ranks[0],
                min: *ranks.iter().min().expect("at least one M"),
                max: *ranks.iter().max().expect("at least one M"),
            }
        })
        .collect()
}
