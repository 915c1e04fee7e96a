//! Tracing out pairs and switching families with partial transpositions.

use rotsym::bipartite::SpinPair;
use rotsym::exact::{format_rational, rational};
use rotsym::multipartite::{apply_partial_transpose_family, reduce, BinaryMask, MultiFidelity};

fn show(label: &str, s: &MultiFidelity) {
    let v: Vec<String> = s.values().iter().map(format_rational).collect();
    println!("{label}: family {} q = {v:?}", s.family());
}

fn main() {
    let pairs = vec![SpinPair::from_doubled(1, 1).unwrap(), SpinPair::from_doubled(1, 2).unwrap()];
    let q = [(1, 8), (1, 8), (1, 4), (1, 2)].map(|(n, d)| rational(n, d)).to_vec();
    let s = MultiFidelity::new(pairs, BinaryMask::zeros(2), q).unwrap();
    show("state", &s);
    show("without pair 1", &reduce(&s, 0).unwrap());
    show("without pair 2", &reduce(&s, 1).unwrap());

    let nu: BinaryMask = "01".parse().unwrap();
    match apply_partial_transpose_family(&s, nu) {
        Ok(t) => {
            show("transposed on pair 2", &t);
            show("and back", &apply_partial_transpose_family(&t, nu).unwrap());
        }
        Err(e) => println!("not {nu}-PPT: {e}"),
    }
}
