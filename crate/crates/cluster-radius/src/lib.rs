//! Rigorous convergence-radius bounds for the Mayer series of classical
//! continuous gases.
//!
//! The crate computes the four classical lower bounds on the convergence
//! radius of the Mayer activity expansion (Penrose-Ruelle, Brydges-Federbush,
//! the hard-core-with-attractive-tail bound and the nonnegative-plus-stable
//! split bound), together with everything needed to feed and cross-check
//! them:
//!
//! - [`potential`]: radial pair potentials with extended-real values,
//!   hard cores, envelope metadata and the algebraic interaction matrices
//!   they induce on finite point sets;
//! - [`quad`]: adaptive radial quadrature for the integral constants
//!   `C(beta)`, `C*(beta)`, `C~(beta)` and `||V||_1`;
//! - [`combinat`]: exact enumeration of connected graphs, labeled trees
//!   (Prüfer sequences) and the tree-compatible vertex orderings with their
//!   crossing counts;
//! - [`tgi`]: numerical evaluation of both sides of the tree-graph identity,
//!   its regularized form for unbounded interactions, and the two tree-graph
//!   inequalities;
//! - [`mayer`]: brute-force Mayer coefficients (exact nested quadrature in
//!   one dimension, seeded stratified Monte Carlo otherwise) and the exact
//!   hard-rod oracle;
//! - [`stability`]: exact finite-n stability constants by subset scan and
//!   configuration-search lower bounds for radial potentials;
//! - [`decompose`]: the constructive split of a Lennard-Jones type potential
//!   into a nonnegative part plus a stable, absolutely summable part, with
//!   sampled Fourier positivity checks;
//! - [`bounds`]: the radius and coefficient bound formulas themselves,
//!   evaluated in log space, and comparison reports;
//! - [`cli`]: the command-line front end (`cluster-radius` binary).
//!
//! Start with the `examples/` directory: each example is a runnable
//! walkthrough of one capability (identity verification, the Tonks gas
//! oracle, the Morse comparison, the square-well improvement, the
//! Lennard-Jones decomposition, stability search, radial transforms).

pub mod bounds;
pub mod cli;
pub mod combinat;
pub mod decompose;
pub mod mayer;
pub mod potential;
pub mod quad;
pub mod stability;
pub mod tgi;

pub use potential::{ExtendedReal, InteractionMatrix, RadialPotential};
pub use quad::{IntegralConstants, QuadratureSpec};
