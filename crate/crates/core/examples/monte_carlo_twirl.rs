//! Haar-random rotations twirl a product state onto the invariant simplex.

use rotsym::bipartite::{fidelities_from_density, DensityMatrix, Family, SpinPair};
use rotsym::exact::format_rational;
use rotsym::half::HalfInt;
use rotsym::multipartite::{twirl_fidelities_f64, BinaryMask};
use rotsym::numlab::{invariance_residual, mc_twirl};

fn main() {
    let seed = 2024;
    let pair = SpinPair::from_doubled(1, 2).unwrap();
    let rho = DensityMatrix::product_state(pair, HalfInt::from_doubled(1), HalfInt::from_doubled(0)).unwrap();
    let exact = fidelities_from_density(&rho, pair, Family::WernerLike).unwrap();
    let exact: Vec<String> = exact.exact().expect("rational").values().iter().map(format_rational).collect();
    println!("exact fidelities: {exact:?}");

    for n in [1_000, 10_000, 100_000] {
        let t = mc_twirl(&rho, &[pair], BinaryMask::zeros(1), n, seed).unwrap();
        let q = twirl_fidelities_f64(&t, &[pair], BinaryMask::zeros(1)).unwrap();
        let residual = invariance_residual(&t, &[pair], BinaryMask::zeros(1), 100, seed + 1).unwrap();
        println!("N = {n:>6}: q = {q:.4?}, invariance residual {residual:.2e}");
    }
}
