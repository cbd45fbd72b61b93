//! Mayer coefficients of the 1-D hard-rod gas: exact nested quadrature and
//! Monte Carlo against the closed-form oracle `(-n a)^{n-1}/n!`, and the
//! root-test radius diagnostic against the rigorous bound.
//!
//! Run with `cargo run --release --example tonks_gas`.

use cluster_radius::bounds;
use cluster_radius::mayer::{
    CubicBox, MayerMethod, mayer_coefficient, radius_lower_bound_empirical, tonks_oracle,
};
use cluster_radius::potential::RadialPotential;

fn main() {
    let rods = RadialPotential::hard_core(1.0, 1);
    let bx = CubicBox::new(1, 64.0);

    println!("hard rods (a = 1) in a box of side 64, first Mayer coefficients:");
    println!("{:>3} {:>16} {:>16} {:>12}", "n", "exact quadrature", "oracle", "rel err");
    let mut estimates = Vec::new();
    for n in 2..=4 {
        let est = mayer_coefficient(&rods, 1.0, bx, n, MayerMethod::Exact1D, 0, 0).unwrap();
        let oracle = tonks_oracle(1.0, n);
        println!(
            "{n:>3} {:>16.10} {oracle:>16.10} {:>12.2e}",
            est.value,
            ((est.value - oracle) / oracle).abs()
        );
        estimates.push(est);
    }

    println!("\nn = 5 via stratified Monte Carlo:");
    let mc = mayer_coefficient(&rods, 1.0, CubicBox::new(1, 24.0), 5, MayerMethod::MonteCarlo, 400_000, 11)
        .unwrap();
    println!(
        "  estimate {:.5} +/- {:.5} (3 sigma), oracle {:.5}",
        mc.value,
        3.0 * mc.std_error,
        tonks_oracle(1.0, 5)
    );
    estimates.push(mc);

    let diag = radius_lower_bound_empirical(&estimates).unwrap();
    // d=1 rods: C*(beta) = 2a, B = 0
    let rigorous = bounds::penrose_potential_radius(0.0, 2.0, 1.0).unwrap();
    println!("\nroot-test radius diagnostic (not rigorous): {diag:.6}");
    println!("rigorous hard-core-tail bound:              {:.6}", rigorous.value);
    println!("true radius of the rod series:              {:.6}", 1.0 / 1f64.exp());
}
