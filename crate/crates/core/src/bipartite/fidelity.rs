//! Fidelity coordinates of invariant states and the exact twirl.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use super::{check_dim, projector, BipartiteError, DensityMatrix, Family, Result, SpinPair};
use crate::exact::{format_rational, rational_to_f64, snap_to_rational, Rational, SnapConfig};

/// Exact point of the invariant simplex for one pair: `values[k]` is the weight of the
/// `k`-th total spin, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FidelityVector {
    pair: SpinPair,
    family: Family,
    values: Vec<Rational>,
}

impl FidelityVector {
    pub fn new(pair: SpinPair, family: Family, values: Vec<Rational>) -> Result<Self> {
        if values.len() != pair.d_a() {
            return Err(BipartiteError::InvalidFidelities(format!(
                "expected {} values for {pair}, got {}",
                pair.d_a(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(BipartiteError::InvalidFidelities(format!("negative value {}", format_rational(v))));
        }
        let total: Rational = values.iter().sum();
        if !total.is_one() {
            return Err(BipartiteError::InvalidFidelities(format!("values sum to {}", format_rational(&total))));
        }
        Ok(FidelityVector { pair, family, values })
    }

    /// All weight on the total spin `j`.
    pub fn delta(pair: SpinPair, family: Family, j: crate::half::HalfInt) -> Result<Self> {
        let k = pair.j_index(j)?;
        let mut values = vec![Rational::zero(); pair.d_a()];
        values[k] = Rational::one();
        Ok(FidelityVector { pair, family, values })
    }

    pub fn pair(&self) -> SpinPair {
        self.pair
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }
}

/// Fidelities that did not all snap to rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct InexactFidelities {
    pub pair: SpinPair,
    pub family: Family,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fidelities {
    Exact(FidelityVector),
    Inexact(InexactFidelities),
}

impl Fidelities {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Fidelities::Exact(f) => f.to_f64(),
            Fidelities::Inexact(f) => f.values.clone(),
        }
    }

    pub fn exact(&self) -> Option<&FidelityVector> {
        match self {
            Fidelities::Exact(f) => Some(f),
            Fidelities::Inexact(_) => None,
        }
    }
}

/// `Tr(ρ Q^J)` (or `Tr(ρ P^J)`) for every `J`, in floating point.
pub fn twirl_fidelities_f64(rho: &DensityMatrix, pair: SpinPair, family: Family) -> Result<Vec<f64>> {
    check_dim(pair.dim(), rho.dim())?;
    pair.total_spins().map(|j| Ok(rho.expectation(&projector(pair, j, family.projector_kind())?))).collect()
}

/// The exact twirl of `ρ`, with the default snapping configuration.
pub fn fidelities_from_density(rho: &DensityMatrix, pair: SpinPair, family: Family) -> Result<Fidelities> {
    fidelities_from_density_with(rho, pair, family, SnapConfig::default())
}

/// The exact twirl of `ρ`: fidelities are snapped to rationals when every value snaps
/// and the snapped values form a valid simplex point; otherwise they stay floats.
pub fn fidelities_from_density_with(
    rho: &DensityMatrix,
    pair: SpinPair,
    family: Family,
    cfg: SnapConfig,
) -> Result<Fidelities> {
    let values = twirl_fidelities_f64(rho, pair, family)?;
    let snapped: Option<Vec<Rational>> = values.iter().map(|&x| snap_to_rational(x, cfg)).collect();
    if let Some(exact) = snapped {
        if let Ok(f) = FidelityVector::new(pair, family, exact) {
            return Ok(Fidelities::Exact(f));
        }
    }
    Ok(Fidelities::Inexact(InexactFidelities { pair, family, values }))
}

/// `ρ = Σ_J f_J Π^J / (2J+1)`.
pub fn density_from_fidelities(f: &FidelityVector) -> DensityMatrix {
    let pair = f.pair();
    let mut rho = DMatrix::zeros(pair.dim(), pair.dim());
    for (j, w) in pair.total_spins().zip(f.values()) {
        if w.is_zero() {
            continue;
        }
        let p = projector(pair, j, f.family().projector_kind()).expect("J from the pair's own range");
        rho += p * (rational_to_f64(w) / f64::from(j.doubled() + 1));
    }
    DensityMatrix::new(rho).expect("square")
}
