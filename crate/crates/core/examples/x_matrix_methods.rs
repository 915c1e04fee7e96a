//! The partial-transposition matrix X by trace, 6-j and closed form, plus its identities.

use rotsym::bipartite::{x_matrix, x_matrix_sixj_with_phase, SixJPhase, SpinPair, XMethod};

fn main() {
    for (ta, tb) in [(1, 1), (1, 4), (2, 2), (2, 3), (3, 5)] {
        let pair = SpinPair::from_doubled(ta, tb).unwrap();
        let trace = x_matrix(pair, XMethod::Trace).unwrap();
        let sixj = x_matrix(pair, XMethod::SixJ).unwrap();
        let closed = x_matrix(pair, XMethod::Closed).ok();
        println!("{pair}: {:?}", trace.to_strings());
        println!(
            "  6-j agrees: {}, closed form: {}, checks: {:?}",
            trace.same_entries(&sixj),
            closed.map_or("n/a".to_string(), |c| c.same_entries(&trace).to_string()),
            trace.checks()
        );
    }

    // the overall sign (-1)^(2 j_B) alone is off by -1 for half-integer j_A
    let qubits = SpinPair::from_doubled(1, 1).unwrap();
    let off = x_matrix_sixj_with_phase(qubits, SixJPhase::SecondSpinOnly).unwrap();
    println!("(1/2,1/2) with phase (-1)^(2jB): {:?}", off.to_strings());
}
