//! Radial Fourier transforms: the Gaussian self-transform in d = 3, the
//! interval indicator in d = 1, and the momentum-side kernel used by the
//! decomposition, cross-checked against its closed form.
//!
//! Run with `cargo run --release --example radial_transforms`.

use cluster_radius::decompose::{GridTail, RadialGridFunction, radial_fourier, radial_fourier_fn};
use cluster_radius::quad::QuadratureSpec;
use std::f64::consts::PI;

fn main() {
    let spec = QuadratureSpec::with_tols(1e-11, 1e-14);

    println!("gaussian e^(-r^2/2) in d = 3 (exact transform (2pi)^(3/2) e^(-p^2/2)):");
    let f = |r: f64| (-r * r / 2.0).exp();
    let p_grid = [0.0, 1.0, 2.0, 4.0, 6.0, 8.0];
    let got = radial_fourier_fn(&f, 3, 14.0, &p_grid, &spec).unwrap();
    for (p, v) in p_grid.iter().zip(&got) {
        let exact = (2.0 * PI).powf(1.5) * (-p * p / 2.0).exp();
        println!("  p = {p:>3}: {v:>14.6e}   exact {exact:>14.6e}   diff {:.1e}", (v - exact).abs());
    }

    println!("\nindicator of [0,1] in d = 1 (exact 2 sin(p)/p), grid route:");
    let indicator =
        RadialGridFunction::new(vec![1e-9, 0.5, 1.0], vec![1.0, 1.0, 1.0], 1, GridTail::Zero)
            .unwrap();
    let p_grid = [0.5, 1.0, PI, 4.0, 10.0];
    let hat = radial_fourier(&indicator, &p_grid).unwrap();
    for (p, v) in p_grid.iter().zip(&hat.values) {
        let exact = 2.0 * p.sin() / p;
        println!("  p = {p:>8.4}: {v:>12.8}   exact {exact:>12.8}   diff {:.1e}", (v - exact).abs());
    }

    println!("\nmomentum kernel int e^(ip.x) (p^2+1)^(-3) dp in d = 3");
    println!("(numerical oscillatory quadrature vs the closed form (pi^2/4)(1+r)e^(-r)):");
    let g = |q: f64| (q * q + 1.0).powi(-3);
    for r in [0.1, 0.5, 1.0] {
        let integrand = |q: f64| q * g(q) * (q * r).sin();
        // period-matched panels out to q = 400
        let mut breaks = Vec::new();
        let mut x = PI / r;
        while x < 400.0 {
            breaks.push(x);
            x += PI / r;
        }
        let raw = cluster_radius::quad::integrate(&integrand, 0.0, 400.0, &breaks, &spec).value;
        let got = 4.0 * PI / r * raw;
        let exact = PI * PI / 4.0 * (1.0 + r) * (-r).exp();
        println!("  r = {r:>4}: {got:>12.8}   exact {exact:>12.8}   diff {:.1e}", (got - exact).abs());
    }
}
