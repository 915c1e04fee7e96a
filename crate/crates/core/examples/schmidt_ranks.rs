//! Schmidt ranks of the coupled vectors |J M> for two equal spins.

use rotsym::bipartite::coupled_rank_profiles;
use rotsym::half::HalfInt;

fn main() {
    for two_j in 1..=5 {
        let j = HalfInt::from_doubled(two_j);
        let d = j.dimension();
        for p in coupled_rank_profiles(j) {
            println!(
                "j = {j}, J = {}: |J,J> rank {} (d - J = {}), ranks over M {}..={}",
                p.j,
                p.top,
                d as i32 - p.j.doubled() / 2,
                p.min,
                p.max
            );
        }
    }
}
