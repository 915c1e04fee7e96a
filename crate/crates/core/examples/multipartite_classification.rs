//! σ-PPT masks over several pairs and the resulting classification.

use std::time::Instant;

use rotsym::bipartite::SpinPair;
use rotsym::exact::{format_rational, rational};
use rotsym::multipartite::{classify, extremal_separable_fidelities, sigma_report, BinaryMask, MultiFidelity};

fn main() {
    let qubits = SpinPair::from_doubled(1, 1).unwrap();
    let pairs = vec![qubits, qubits];
    let states = [
        ("singlet x singlet", MultiFidelity::delta(pairs.clone(), BinaryMask::zeros(2), &[0, 0]).unwrap()),
        ("triplet x triplet", MultiFidelity::delta(pairs.clone(), BinaryMask::zeros(2), &[1, 1]).unwrap()),
        (
            "biseparable mix",
            MultiFidelity::new(
                pairs.clone(),
                BinaryMask::zeros(2),
                vec![rational(1, 4), rational(0, 1), rational(0, 1), rational(3, 4)],
            )
            .unwrap(),
        ),
    ];
    for (name, s) in &states {
        let c = classify(s).unwrap();
        println!("{name}: {:?}, first failing mask {:?}", c.verdict, c.failing_mask.map(|m| m.to_string()));
        for (mask, v) in sigma_report(s).unwrap() {
            println!("  {mask}: {:?}", v.iter().map(format_rational).collect::<Vec<_>>());
        }
    }

    let many = extremal_separable_fidelities(&[qubits; 12]).unwrap();
    let start = Instant::now();
    let c = classify(&many).unwrap();
    println!("12 pairs, 4096 masks: {:?} in {:.2?}", c.verdict, start.elapsed());
}
