//! Exact coupling coefficients, printed as `s*sqrt(p/q)` next to their decimal value.

use rotsym::angular::{clebsch_gordan, racah_w, sixj_closed_form, wigner_3j, wigner_6j, wigner_6j_oracle};
use rotsym::half::HalfInt;

fn h(s: &str) -> HalfInt {
    s.parse().unwrap()
}

fn main() {
    let cg = clebsch_gordan(h("1"), h("1"), h("1/2"), h("-1/2"), h("3/2"), h("1/2")).unwrap();
    println!("<1 1; 1/2 -1/2 | 3/2 1/2> = {cg} ~ {:.6}", cg.to_f64());

    let three = wigner_3j(h("1"), h("1"), h("1"), h("1"), h("-1"), h("0")).unwrap();
    println!("(1 1 1; 1 -1 0)            = {three}");

    let args = ["1/2", "1/2", "1", "1/2", "1/2", "1"].map(h);
    let six = wigner_6j(args[0], args[1], args[2], args[3], args[4], args[5]).unwrap();
    let oracle = wigner_6j_oracle(args[0], args[1], args[2], args[3], args[4], args[5]).unwrap();
    println!("{{1/2 1/2 1; 1/2 1/2 1}}     = {six} (brute force {oracle:.15})");

    // closed forms cover the small-spin patterns, in any of the 24 symmetric arrangements
    let closed = sixj_closed_form(["2", "5/2", "3/2", "1", "3/2", "5/2"].map(h)).unwrap();
    let racah = wigner_6j(h("2"), h("5/2"), h("3/2"), h("1"), h("3/2"), h("5/2")).unwrap();
    println!("closed form {closed} vs Racah sum {racah}");

    let w = racah_w(h("1"), h("1"), h("1"), h("1"), h("1"), h("1")).unwrap();
    println!("W(1 1 1 1; 1 1)            = {w}");
}
