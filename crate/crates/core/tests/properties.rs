use proptest::prelude::*;

use rotsym::bipartite::{
    density_from_fidelities, is_ppt, ppt_transform, twirl_fidelities_f64, Family, FidelityVector, SpinPair,
};
use rotsym::exact::{rational, rational_to_f64, Rational};
use rotsym::multipartite::{classify, sigma_ppt_transform, BinaryMask, MultiFidelity};

const PAIRS: [(i32, i32); 7] = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 3)];

fn normalize(w: &[u32]) -> Vec<Rational> {
    let total: i64 = w.iter().map(|&x| i64::from(x)).sum::<i64>().max(1);
    let mut v: Vec<Rational> = w.iter().map(|&x| rational(i64::from(x), total)).collect();
    if w.iter().all(|&x| x == 0) {
        v[0] = rational(1, 1);
    }
    v
}

fn fidelity_vector() -> impl Strategy<Value = FidelityVector> {
    (0..PAIRS.len(), prop::collection::vec(0u32..20, 4), any::<bool>()).prop_map(|(i, w, iso)| {
        let (ta, tb) = PAIRS[i];
        let pair = SpinPair::from_doubled(ta, tb).unwrap();
        let family = if iso { Family::IsotropicLike } else { Family::WernerLike };
        FidelityVector::new(pair, family, normalize(&w[..pair.d_a()])).unwrap()
    })
}

fn multi_state(k: usize) -> impl Strategy<Value = MultiFidelity> {
    (prop::collection::vec(0..4usize, k), prop::collection::vec(0u32..10, 27), 0..1u64 << k).prop_map(
        move |(idx, w, fam)| {
            let pairs: Vec<SpinPair> =
                idx.iter().map(|&i| SpinPair::from_doubled(PAIRS[i].0, PAIRS[i].1).unwrap()).collect();
            let len: usize = pairs.iter().map(SpinPair::d_a).product();
            MultiFidelity::new(pairs, BinaryMask::from_index(fam, k), normalize(&w[..len])).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The exact transform predicts the fidelities of the numerically partially
    /// transposed state in the other family.
    #[test]
    fn partial_transpose_matches_x(f in fidelity_vector()) {
        let pair = f.pair();
        let rho = density_from_fidelities(&f);
        let pt = rho.partial_transpose_b(pair).unwrap();
        let trace_norm = pt.trace();
        let predicted: Vec<f64> = ppt_transform(&f).iter().map(rational_to_f64).collect();
        let measured = twirl_fidelities_f64(&pt, pair, f.family().flipped()).unwrap();
        prop_assert!((trace_norm - 1.0).abs() < 1e-12);
        for (p, m) in predicted.iter().zip(&measured) {
            prop_assert!((p - m).abs() < 1e-10, "{predicted:?} vs {measured:?}");
        }
        prop_assert_eq!(is_ppt(&f), pt.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn masks_compose_by_xor(s in multi_state(3), mu in 0..8u64, nu in 0..8u64) {
        let (mu, nu) = (BinaryMask::from_index(mu, 3), BinaryMask::from_index(nu, 3));
        let once = sigma_ppt_transform(&s, mu).unwrap();
        let x = rotsym::multipartite::SigmaXMatrix::new(s.pairs(), nu).unwrap();
        let direct = sigma_ppt_transform(&s, mu.xor(nu)).unwrap();
        prop_assert_eq!(x.apply(&once), direct);
    }

    #[test]
    fn classification_ignores_slot_order(s in multi_state(3), perm in Just([2usize, 0, 1])) {
        let permuted = s.permute_slots(&perm).unwrap();
        let (a, b) = (classify(&s).unwrap(), classify(&permuted).unwrap());
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.decisive, b.decisive);
    }
}
