//! Floating-point rotation lab: Wigner D-matrices, Haar sampling on SO(3) and a
//! Monte-Carlo twirl used to cross-check the exact algebra.
//!
//! Sampling is split into fixed chunks of [`CHUNK`] rotations. Chunk `c` draws from a
//! ChaCha8 stream `c` keyed by the caller's seed and chunk sums are added in chunk
//! order, so results depend on the seed only, not on the number of threads.

use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, Matrix3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bipartite::{BipartiteError, DensityMatrix, SpinPair};
use crate::half::HalfInt;
use crate::multipartite::{BinaryMask, MultipartiteError, Result};

pub type C64 = Complex<f64>;

/// Rotations per RNG stream.
pub const CHUNK: usize = 4096;

/// A rotation as a unit quaternion `(w, x, y, z)`; `q` and `-q` are the same rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    q: [f64; 4],
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation { q: [1.0, 0.0, 0.0, 0.0] }
    }

    /// Normalizes `q`; panics on the zero quaternion.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(n > 0.0, "zero quaternion");
        Rotation { q: q.map(|x| x / n) }
    }

    /// Rotation by `angle` about `axis` (normalized here).
    pub fn about_axis(axis: [f64; 3], angle: f64) -> Self {
        let n = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (s, c) = (angle / 2.0).sin_cos();
        Rotation::from_quaternion([c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n])
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn norm(&self) -> f64 {
        self.q.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let [w1, x1, y1, z1] = self.q;
        let [w2, x2, y2, z2] = other.q;
        Rotation {
            q: [
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            ],
        }
    }

    pub fn inverse(&self) -> Rotation {
        let [w, x, y, z] = self.q;
        Rotation { q: [w, -x, -y, -z] }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [w, x, y, z] = self.q;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    /// Euler angles with `R = R_z(α) R_y(β) R_z(γ)`, read off the quaternion so that the
    /// spin-1/2 sign follows `q`.
    pub fn euler_zyz(&self) -> (f64, f64, f64) {
        let [w, x, y, z] = self.q;
        let beta = 2.0 * (x * x + y * y).sqrt().atan2((w * w + z * z).sqrt());
        let sum = z.atan2(w);
        let diff = (-x).atan2(y);
        (sum + diff, beta, sum - diff)
    }
}

/// Haar-uniform rotation: a normalized vector of four standard Gaussians.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if q.iter().map(|x| x * x).sum::<f64>() > 1e-300 {
            return Rotation::from_quaternion(q);
        }
    }
}

/// The RNG for chunk `chunk` of a run keyed by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// `D^(j)(R)` in the basis `|j, m⟩`, `m` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct RepMatrix {
    pub j: HalfInt,
    pub matrix: DMatrix<C64>,
}

impl RepMatrix {
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.nrows();
        (self.matrix.adjoint() * &self.matrix - DMatrix::identity(n, n)).map(|c| c.norm()).max()
    }

    pub fn conjugate(&self) -> RepMatrix {
        RepMatrix { j: self.j, matrix: self.matrix.map(|c| c.conj()) }
    }
}

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; 172];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// Terms of the little-d sum for one spin: per entry, `(coefficient, cos power, sin power)`.
struct SmallDTable {
    n: usize,
    ms: Vec<f64>,
    terms: Vec<Vec<(f64, i32, i32)>>,
}

impl SmallDTable {
    fn new(j: HalfInt) -> Self {
        let lf = ln_factorials();
        let ms: Vec<HalfInt> = j.projections().collect();
        let n = ms.len();
        let as_int = |h: HalfInt| h.as_integer().expect("integral combination") as i64;
        let two_j = as_int(j + j);
        let mut terms = Vec::with_capacity(n * n);
        for &mp in &ms {
            for &m in &ms {
                let (jpm, jmm) = (as_int(j + m), as_int(j - m));
                let (jpmp, jmmp) = (as_int(j + mp), as_int(j - mp));
                let dm = as_int(mp - m);
                let prefactor = 0.5 * (lf[jpmp as usize] + lf[jmmp as usize] + lf[jpm as usize] + lf[jmm as usize]);
                let entry = (0.max(-dm)..=jpm.min(jmmp))
                    .map(|k| {
                        let ln_den =
                            lf[(jpm - k) as usize] + lf[k as usize] + lf[(dm + k) as usize] + lf[(jmmp - k) as usize];
                        let sign = if (dm + k) % 2 == 0 { 1.0 } else { -1.0 };
                        (sign * (prefactor - ln_den).exp(), (two_j - dm - 2 * k) as i32, (dm + 2 * k) as i32)
                    })
                    .collect();
                terms.push(entry);
            }
        }
        SmallDTable { n, ms: ms.iter().map(|m| m.to_f64()).collect(), terms }
    }

    fn small_d(&self, a: usize, b: usize, c_pow: &[f64], s_pow: &[f64]) -> f64 {
        self.terms[a * self.n + b].iter().map(|&(coef, pc, ps)| coef * c_pow[pc as usize] * s_pow[ps as usize]).sum()
    }

    fn powers(x: f64, n: usize) -> Vec<f64> {
        std::iter::successors(Some(1.0), |p| Some(p * x)).take(n).collect()
    }

    fn eval(&self, r: &Rotation, conjugate: bool) -> DMatrix<C64> {
        let (alpha, beta, gamma) = r.euler_zyz();
        let (s, c) = (beta / 2.0).sin_cos();
        let (c_pow, s_pow) = (Self::powers(c, self.n), Self::powers(s, self.n));
        let sign = if conjugate { 1.0 } else { -1.0 };
        DMatrix::from_fn(self.n, self.n, |a, b| {
            let d = self.small_d(a, b, &c_pow, &s_pow);
            C64::from_polar(d, sign * (self.ms[a] * alpha + self.ms[b] * gamma))
        })
    }
}

/// Wigner little-d `d^j_{m'm}(β)` by the explicit finite sum.
pub fn wigner_small_d(j: HalfInt, mp: HalfInt, m: HalfInt, beta: f64) -> f64 {
    let table = SmallDTable::new(j);
    let a = (j - mp).as_integer().expect("projection of j") as usize;
    let b = (j - m).as_integer().expect("projection of j") as usize;
    let (s, c) = (beta / 2.0).sin_cos();
    table.small_d(a, b, &SmallDTable::powers(c, table.n), &SmallDTable::powers(s, table.n))
}

/// `D^j_{m'm}(R) = e^{-i m' α} d^j_{m'm}(β) e^{-i m γ}`.
pub fn wigner_d(j: HalfInt, r: &Rotation) -> RepMatrix {
    RepMatrix { j, matrix: SmallDTable::new(j).eval(r, false) }
}

/// Precomputed tables for `⊗_i D^{(j_A)}(R_i) ⊗ D^{(j_B)}(R_i)`, with the `B` factor
/// conjugated on slots whose family bit is set.
struct ProductRep {
    slots: Vec<(SmallDTable, SmallDTable, bool)>,
}

impl ProductRep {
    fn new(pairs: &[SpinPair], family: BinaryMask) -> Self {
        let slots = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (SmallDTable::new(p.ja()), SmallDTable::new(p.jb()), family.get(i)))
            .collect();
        ProductRep { slots }
    }

    fn eval(&self, rotations: &[Rotation]) -> DMatrix<C64> {
        let mut u: Option<DMatrix<C64>> = None;
        for ((a, b, conj), r) in self.slots.iter().zip(rotations) {
            let factor = a.eval(r, false).kronecker(&b.eval(r, *conj));
            u = Some(match u {
                None => factor,
                Some(u) => u.kronecker(&factor),
            });
        }
        u.expect("at least one pair")
    }
}

pub fn product_representation(pairs: &[SpinPair], family: BinaryMask, rotations: &[Rotation]) -> DMatrix<C64> {
    ProductRep::new(pairs, family).eval(rotations)
}

fn check_inputs(rho: &DensityMatrix, pairs: &[SpinPair], family: BinaryMask) -> Result<()> {
    if pairs.is_empty() {
        return Err(MultipartiteError::NoPairs);
    }
    if family.len() != pairs.len() {
        return Err(MultipartiteError::MaskLength { expected: pairs.len(), found: family.len() });
    }
    let total: usize = pairs.iter().map(SpinPair::dim).product();
    if rho.dim() != total {
        return Err(BipartiteError::DimensionMismatch { expected: total, found: rho.dim() }.into());
    }
    Ok(())
}

/// Monte-Carlo twirl: the average of `U ρ U†` over `samples` Haar-random rotation
/// tuples, one independent rotation per pair.
pub fn mc_twirl(
    rho: &DensityMatrix,
    pairs: &[SpinPair],
    family: BinaryMask,
    samples: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    check_inputs(rho, pairs, family)?;
    let n = rho.dim();
    let rho_m = rho.matrix();
    let rep = ProductRep::new(pairs, family);
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<DMatrix<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = DMatrix::zeros(n, n);
            let (mut part, mut part_t, mut tmp) = (DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n));
            let mut rotations = vec![Rotation::identity(); pairs.len()];
            for _ in 0..count {
                rotations.iter_mut().for_each(|r| *r = haar_sample(&mut rng));
                let u = rep.eval(&rotations);
                // ρ is real symmetric, so Re(U ρ U†) = A ρ Aᵀ + B ρ Bᵀ with U = A + iB
                for re in [true, false] {
                    part.zip_apply(&u, |x, z| *x = if re { z.re } else { z.im });
                    part.transpose_to(&mut part_t);
                    part.mul_to(rho_m, &mut tmp);
                    acc.gemm(1.0, &tmp, &part_t, 1.0);
                }
            }
            acc
        })
        .collect();
    let mut total = DMatrix::zeros(n, n);
    for p in partials {
        total += p;
    }
    total /= samples.max(1) as f64;
    Ok(DensityMatrix::new(total).expect("square"))
}

/// Largest Frobenius norm of `U ρ U† − ρ` over `samples` random rotation tuples.
pub fn invariance_residual(
    rho: &DensityMatrix,
    pairs: &[SpinPair],
    family: BinaryMask,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    check_inputs(rho, pairs, family)?;
    let rho_c = rho.matrix().map(|x| C64::new(x, 0.0));
    let rep = ProductRep::new(pairs, family);
    let chunks = samples.div_ceil(CHUNK);
    let worst = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut worst = 0.0f64;
            for _ in 0..count {
                let rotations: Vec<Rotation> = pairs.iter().map(|_| haar_sample(&mut rng)).collect();
                let u = rep.eval(&rotations);
                let diff = &u * &rho_c * u.adjoint() - &rho_c;
                worst = worst.max(diff.norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::{density_from_fidelities, intertwiner_v, projector, Family, FidelityVector, ProjectorKind};

    fn h(two: i32) -> HalfInt {
        HalfInt::from_doubled(two)
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).map(|c| c.norm()).max()
    }

    /// `exp(-i θ n·J)` from spin matrices, as an independent construction of `D`.
    fn exp_generator(j: HalfInt, r: &Rotation) -> DMatrix<C64> {
        let ms: Vec<f64> = j.projections().map(HalfInt::to_f64).collect();
        let n = ms.len();
        let jf = j.to_f64();
        let mut jz = DMatrix::<C64>::zeros(n, n);
        let mut jp = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            jz[(k, k)] = C64::new(ms[k], 0.0);
            if k > 0 {
                // J+ |m⟩ = √(j(j+1) - m(m+1)) |m+1⟩, and m+1 sits one row up
                let m = ms[k];
                jp[(k - 1, k)] = C64::new((jf * (jf + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
            }
        }
        let jm = jp.adjoint();
        let jx = (&jp + &jm) * C64::new(0.5, 0.0);
        let jy = (&jp - &jm) * C64::new(0.0, -0.5);
        let [w, x, y, z] = r.quaternion();
        let half = w.clamp(-1.0, 1.0).acos();
        let s = half.sin();
        let (nx, ny, nz) = if s.abs() < 1e-15 { (0.0, 0.0, 1.0) } else { (x / s, y / s, z / s) };
        let theta = 2.0 * half;
        let gen = (jx * C64::new(nx, 0.0) + jy * C64::new(ny, 0.0) + jz * C64::new(nz, 0.0)) * C64::new(0.0, -theta);
        gen.exp()
    }

    #[test]
    fn identity_and_pi_about_y() {
        for two_j in 0..=6 {
            let d = wigner_d(h(two_j), &Rotation::identity());
            let n = d.matrix.nrows();
            assert!(max_diff(&d.matrix, &DMatrix::identity(n, n)) < 1e-14);
        }
        let d = wigner_d(h(1), &Rotation::about_axis([0.0, 1.0, 0.0], std::f64::consts::PI));
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]).map(|x| C64::new(x, 0.0));
        assert!(max_diff(&d.matrix, &expected) < 1e-12);
    }

    #[test]
    fn matches_spin_exponential() {
        let mut rng = chunk_rng(7, 0);
        for _ in 0..50 {
            let r = haar_sample(&mut rng);
            for two_j in 1..=4 {
                let d = wigner_d(h(two_j), &r);
                assert!(max_diff(&d.matrix, &exp_generator(h(two_j), &r)) < 1e-10);
            }
        }
    }

    #[test]
    fn unitary_and_homomorphic() {
        let mut rng = chunk_rng(11, 0);
        for _ in 0..1000 {
            let (r1, r2) = (haar_sample(&mut rng), haar_sample(&mut rng));
            let r12 = r1.compose(&r2);
            assert!((r12.norm() - 1.0).abs() < 1e-12);
            for two_j in 0..=4 {
                let (d1, d2) = (wigner_d(h(two_j), &r1), wigner_d(h(two_j), &r2));
                assert!(d1.unitarity_error() < 1e-10);
                let prod = &d1.matrix * &d2.matrix;
                let d12 = wigner_d(h(two_j), &r12).matrix;
                let err = max_diff(&prod, &d12).min(max_diff(&prod, &(-d12)));
                assert!(err < 1e-9, "j={two_j}/2 err={err}");
            }
        }
    }

    #[test]
    fn rotation_matrix_agrees_with_spin_one() {
        // D^1 in the spherical basis is unitarily equivalent to the 3x3 rotation; compare traces
        let mut rng = chunk_rng(3, 0);
        for _ in 0..100 {
            let r = haar_sample(&mut rng);
            let tr = wigner_d(h(2), &r).matrix.trace();
            assert!((tr.re - r.to_matrix().trace()).abs() < 1e-10 && tr.im.abs() < 1e-10);
        }
    }

    #[test]
    fn intertwiner_conjugates_representation() {
        let mut rng = chunk_rng(5, 0);
        for _ in 0..100 {
            let r = haar_sample(&mut rng);
            for two_j in 0..=4 {
                let d = wigner_d(h(two_j), &r);
                let v = intertwiner_v(h(two_j)).to_dense().map(|x| C64::new(x, 0.0));
                assert!(max_diff(&(&v * &d.matrix), &(&d.conjugate().matrix * &v)) < 1e-9);
            }
        }
    }

    #[test]
    fn haar_is_reproducible_and_centred() {
        let a: Vec<_> = {
            let mut r = chunk_rng(42, 0);
            (0..10).map(|_| haar_sample(&mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = chunk_rng(42, 0);
            (0..10).map(|_| haar_sample(&mut r)).collect()
        };
        assert_eq!(a, b);
        let mut rng = chunk_rng(42, 1);
        let n = 100_000;
        let mut mean = Matrix3::zeros();
        for _ in 0..n {
            mean += haar_sample(&mut rng).to_matrix();
        }
        mean /= n as f64;
        assert!(mean.norm() < 0.02, "{}", mean.norm());
    }

    #[test]
    fn twirl_of_invariant_states_is_fixed() {
        let qubits = SpinPair::from_doubled(1, 1).unwrap();
        for family in [Family::WernerLike, Family::IsotropicLike] {
            for j in qubits.total_spins() {
                let rho = density_from_fidelities(&FidelityVector::delta(qubits, family, j).unwrap());
                let mask = BinaryMask::from_bits(&[family.bit()]);
                assert!(invariance_residual(&rho, &[qubits], mask, 200, 9).unwrap() < 1e-10);
                let t = mc_twirl(&rho, &[qubits], mask, 500, 9).unwrap();
                assert!((t.matrix() - rho.matrix()).abs().max() < 1e-10);
            }
        }
        let up_down = DensityMatrix::product_state(qubits, h(1), h(-1)).unwrap();
        assert!(invariance_residual(&up_down, &[qubits], BinaryMask::zeros(1), 100, 1).unwrap() > 0.1);
    }

    #[test]
    fn twirl_converges_to_projection() {
        let qubits = SpinPair::from_doubled(1, 1).unwrap();
        let up_down = DensityMatrix::product_state(qubits, h(1), h(-1)).unwrap();
        let n = 20_000;
        let t = mc_twirl(&up_down, &[qubits], BinaryMask::zeros(1), n, 2024).unwrap();
        let q0 = t.expectation(&projector(qubits, h(0), ProjectorKind::Q).unwrap());
        assert!((q0 - 0.5).abs() < 5.0 / (n as f64).sqrt());
    }

    #[test]
    fn twirl_is_chunk_deterministic() {
        let qubits = SpinPair::from_doubled(1, 2).unwrap();
        let rho = DensityMatrix::product_state(qubits, h(1), h(0)).unwrap();
        let a = mc_twirl(&rho, &[qubits], BinaryMask::zeros(1), CHUNK + 17, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| mc_twirl(&rho, &[qubits], BinaryMask::zeros(1), CHUNK + 17, 5).unwrap());
        assert_eq!(a, b);
        assert!(mc_twirl(&rho, &[qubits, qubits], BinaryMask::zeros(2), 10, 5).is_err());
    }
}
