//! Werner-like states of one pair: PPT transform and separability along a line of states.

use rotsym::bipartite::{density_from_fidelities, ppt_transform, separability_check, Family, FidelityVector, SpinPair};
use rotsym::exact::{format_rational, rational};

fn main() {
    let qubits = SpinPair::from_doubled(1, 1).unwrap();
    for k in 0..=4 {
        let top = rational(k, 4);
        let f = FidelityVector::new(qubits, Family::WernerLike, vec![rational(1, 1) - &top, top]).unwrap();
        let q: Vec<String> = ppt_transform(&f).iter().map(format_rational).collect();
        println!(
            "q = {:?} -> q' = {q:?}: {:?}",
            f.values().iter().map(format_rational).collect::<Vec<_>>(),
            separability_check(&f)
        );
    }

    // spin 1 with spin 1: separable exactly when q_0 <= 1/3 and q_1 <= 1/2
    let spin_one = SpinPair::from_doubled(2, 2).unwrap();
    let f = FidelityVector::new(spin_one, Family::WernerLike, vec![rational(1, 3), rational(1, 2), rational(1, 6)])
        .unwrap();
    let rho = density_from_fidelities(&f);
    let pt = rho.partial_transpose_b(spin_one).unwrap();
    println!(
        "(1,1) corner: {:?}, min eigenvalue of the partial transpose {:.2e}",
        separability_check(&f),
        pt.min_eigenvalue()
    );

    // j_A = 1 with half-integer j_B: PPT alone does not settle it
    let odd = SpinPair::from_doubled(2, 3).unwrap();
    let f = FidelityVector::delta(odd, Family::WernerLike, odd.j_max()).unwrap();
    println!("{odd} top state: {:?}", separability_check(&f));
}
