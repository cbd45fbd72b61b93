//! The Morse rho = 6 benchmark: integral constants, the classic and the
//! absolutely-summable radius bounds, and their ratio in log space.
//!
//! Run with `cargo run --release --example morse_comparison`.

use cluster_radius::bounds::{self, StabilityInputs};
use cluster_radius::potential::RadialPotential;
use cluster_radius::quad::QuadratureSpec;
use std::f64::consts::PI;

fn main() {
    let p = RadialPotential::morse(6.0, 3);
    let beta = 1.0;
    // literature upper bound for the rho = 6 stability constant
    let b6 = 38.65;

    let report = bounds::compare_report(
        &p,
        beta,
        StabilityInputs { b: b6, b_tilde: None },
        &QuadratureSpec::with_tols(1e-8, 1e-12),
    )
    .unwrap();

    let four_pi = 4.0 * PI;
    println!("Morse rho = 6 at beta = 1 (B = {b6} assumed):");
    println!("  C(beta)  = {:.6}  (= 4pi x {:.4})", report.constants.c_beta, report.constants.c_beta / four_pi);
    let l1 = report.constants.v_l1.unwrap();
    println!("  ||V||_1  = {l1:.6}  (= 4pi x {:.4})", l1 / four_pi);

    println!("\nradius bounds (log-space):");
    for (name, r) in &report.radii {
        println!("  {name:<20} log = {:>10.4}   value = {:.4e}", r.log, r.value);
    }
    println!("\nratios:");
    for (name, r) in &report.ratios {
        println!("  {name:<40} e^{:.4}", r.log);
    }
    println!("\nbest bound: {}", report.best);
    let improvement = report.ratios["brydges_federbush/penrose_ruelle"].log;
    println!(
        "the summable-potential bound improves the classic one by e^{improvement:.2} here \
         (driven by e^{{beta B}} vs e^{{2 beta B}})"
    );
}
