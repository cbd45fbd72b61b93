//! Hard core with an attractive tail: the `C*` bound beats the classic one
//! at every temperature, both through the smaller integral constant and the
//! single (instead of doubled) stability exponent.
//!
//! Run with `cargo run --release --example square_well_improvement`.

use cluster_radius::bounds;
use cluster_radius::potential::RadialPotential;
use cluster_radius::quad::{self, QuadratureSpec};
use cluster_radius::stability;

fn main() {
    let p = RadialPotential::square_well(1.0, 1.0, 2.0, 3);
    let spec = QuadratureSpec::default();

    // search lower bound on the stability constant (credible, not certified)
    let est = stability::configuration_lower_bound(&p, 8, 4, 17);
    let b = est.lower_bound;
    println!("square well (a=1, w=1, R=2, d=3); search stability bound B >= {b:.4}");
    println!(
        "{:>6} {:>12} {:>12} {:>14} {:>14} {:>10}",
        "beta", "C(beta)", "C*(beta)", "classic", "hard-core", "gain"
    );
    for beta in [0.1, 0.2, 0.5, 1.0, 2.0] {
        let c = quad::c_beta(&p, beta, &spec).unwrap();
        let cs = quad::c_star_beta(&p, beta, &spec).unwrap();
        let classic = bounds::penrose_ruelle_radius(b, c, beta).unwrap();
        let improved = bounds::penrose_potential_radius(b, cs, beta).unwrap();
        println!(
            "{beta:>6} {c:>12.5} {cs:>12.5} {:>14.6e} {:>14.6e} {:>10.3}",
            classic.value,
            improved.value,
            (improved.log - classic.log).exp()
        );
    }
    println!("\n(gain = ratio of the two radius bounds; both C* < C and e^{{bB}} < e^{{2bB}} contribute)");
}
