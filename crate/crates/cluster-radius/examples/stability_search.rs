//! Stability-constant machinery: the exact finite-n algebraic constant by
//! subset scan, the configuration-search lower bound, and the
//! positive-definite upper bound.
//!
//! Run with `cargo run --release --example stability_search`.

use cluster_radius::potential::{ExtendedReal, InteractionMatrix, PotentialKind, RadialPotential, log_grid};
use cluster_radius::stability::{
    RuelleCriterion, configuration_lower_bound, finite_algebraic_b, ruelle_criterion_upper_bound,
};

fn main() {
    // exact algebraic constant of a small matrix
    let v = InteractionMatrix::from_fn(4, |i, j| {
        ExtendedReal::finite(if (i + j) % 2 == 0 { -1.0 } else { 0.25 })
    });
    println!("exact algebraic stability constant (n=4 example): {}", finite_algebraic_b(&v).unwrap());

    // configuration search for the Morse potential
    let p = RadialPotential::morse(6.0, 3);
    for (n_max, restarts) in [(4, 2), (8, 4), (13, 6)] {
        let est = configuration_lower_bound(&p, n_max, restarts, 7);
        println!(
            "morse rho=6: N <= {n_max:>2}, {restarts} restarts  ->  B >= {:.4}  (witness N = {})",
            est.lower_bound,
            est.witness.len()
        );
    }
    println!("(literature upper bound for this constant: 38.65; the search only ever gives lower bounds)");

    // positive-definite criterion: a gaussian is accepted, a sharp well is not
    let radii = log_grid(1e-3, 12.0, 512);
    let values: Vec<f64> = radii.iter().map(|r| (-r * r / 2.0).exp()).collect();
    let gaussian = RadialPotential::new(PotentialKind::Tabulated { radii, values }, 3);
    match ruelle_criterion_upper_bound(&gaussian, 8.0, 161, 1e-6).unwrap() {
        RuelleCriterion::Applicable { bound, min_transform } => {
            println!("\ngaussian e^(-r^2/2): transform min {min_transform:.3e} >= 0  ->  B <= {bound}");
        }
        RuelleCriterion::Refused { .. } => unreachable!(),
    }
    let well = RadialPotential::square_well(0.0, -1.0, 1.0, 3);
    match ruelle_criterion_upper_bound(&well, 12.0, 241, 1e-9).unwrap() {
        RuelleCriterion::Refused { min_transform, at_p } => {
            println!("repulsive step: transform dips to {min_transform:.3e} at p = {at_p:.2}  ->  criterion refused");
        }
        RuelleCriterion::Applicable { .. } => unreachable!(),
    }
}
