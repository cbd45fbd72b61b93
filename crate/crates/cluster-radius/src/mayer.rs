//! Brute-force Mayer coefficients and the exactly solvable hard-rod oracle.
//!
//! The `n`-th coefficient is `(1/(|box| n!)) int ... int sum over connected
//! graphs of the product of Mayer factors`. Translation invariance is
//! exploited by pinning the first particle at the box center and
//! integrating the remaining `n - 1` over the box; the pinned estimator
//! differs from the free-boundary definition by boundary terms, and a flag
//! is raised when the interaction range is not small against the box.
//!
//! In one dimension the nested integrals are evaluated by adaptive panels
//! whose boundaries include every distance at which the pair factor kinks
//! (all reachable sums of kink radii around the already-placed particles),
//! so piecewise-flat potentials such as hard rods integrate exactly. In
//! higher dimensions, or at `n = 5`, a seeded stratified Monte Carlo
//! estimator takes over.

use crate::combinat::{ClusterSummer, edge_index, pairwise_sum};
use crate::potential::{PotentialError, RadialPotential, TailBehavior};
use crate::quad::{self, QuadratureSpec};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum MayerError {
    #[error("Mayer coefficients are computed for 2 <= n <= 5, got {0}")]
    OrderOutOfRange(usize),
    #[error("exact quadrature is one-dimensional and capped at n <= 4 (got d={d}, n={n}); use Monte Carlo")]
    ExactUnsupported { d: u32, n: usize },
    #[error("Monte Carlo needs a positive sample count")]
    ZeroSamples,
    #[error("the root-test diagnostic needs at least 3 orders")]
    NeedThreeOrders,
    #[error("all estimates are zero; no radius diagnostic")]
    AllZero,
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// The cubic box `[0, L]^d`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CubicBox {
    pub dimension: u32,
    pub side: f64,
}

impl CubicBox {
    pub fn new(dimension: u32, side: f64) -> CubicBox {
        assert!(side > 0.0 && dimension >= 1);
        CubicBox { dimension, side }
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dimension as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MayerMethod {
    Exact1D,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MayerEstimate {
    pub n: usize,
    pub value: f64,
    /// 0 for exact quadrature.
    pub std_error: f64,
    pub samples: u64,
    pub method: MayerMethod,
    pub box_side: f64,
    /// Raised when interaction range / box side > 0.1: the pinned estimator
    /// then carries non-negligible boundary terms against the free-boundary
    /// definition.
    pub boundary_flag: bool,
}

/// Radius beyond which the Mayer factor of `beta V` is below `tol`.
fn interaction_range(p: &RadialPotential, beta: f64, tol: f64) -> f64 {
    match p.tail() {
        TailBehavior::Zero { from } => from,
        TailBehavior::Enveloped { from, eta } => {
            let mut r = from.max(1e-3);
            for _ in 0..200 {
                if beta * eta.eval(r) < tol {
                    return r;
                }
                r *= 1.25;
            }
            r
        }
        TailBehavior::Unknown => 8.0 * p.breakpoints().last().copied().unwrap_or(1.0).max(1.0),
    }
}

/// All distances at which a partial integrand can kink: sums of at most
/// `depth` kink radii of the pair potential.
fn kink_offsets(breakpoints: &[f64], depth: usize) -> Vec<f64> {
    let mut sums = vec![0.0f64];
    for _ in 0..depth {
        let mut next = sums.clone();
        for &s in &sums {
            for &b in breakpoints {
                next.push(s + b);
            }
        }
        next.sort_by(|a, b| a.partial_cmp(b).unwrap());
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        sums = next;
    }
    sums.retain(|&s| s > 0.0);
    sums
}

struct Exact1dCtx<'a> {
    p: &'a RadialPotential,
    beta: f64,
    l: f64,
    n: usize,
    range: f64,
    offsets: Vec<f64>,
    spec: QuadratureSpec,
    // current partial configuration and its cached pair weights
    pts: RefCell<Vec<f64>>,
    weights: RefCell<Vec<f64>>,
    summer: RefCell<ClusterSummer>,
}

impl Exact1dCtx<'_> {
    fn mayer_weight(&self, r: f64) -> f64 {
        self.p
            .evaluate(r)
            .map(|v| v.scale(self.beta).mayer_f())
            .unwrap_or(-1.0)
    }

    /// Integrates particle `k` (0-based; particle 0 is pinned).
    fn level(&self, k: usize) -> f64 {
        let (lo, hi, breaks) = {
            let pts = self.pts.borrow();
            let min = pts.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = pts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            // a connected cluster can reach the new particle only through
            // the particles still to be placed: n - k links at most
            let reach = (self.n - pts.len()) as f64 * self.range * 1.0001;
            let lo = (min - reach).max(0.0);
            let hi = (max + reach).min(self.l);
            let mut breaks = Vec::new();
            for &x in pts.iter() {
                for &off in &self.offsets {
                    breaks.push(x - off);
                    breaks.push(x + off);
                }
                breaks.push(x);
            }
            breaks.retain(|b| *b > lo && *b < hi);
            breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
            breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            (lo, hi, breaks)
        };
        if hi <= lo {
            return 0.0;
        }
        let f = |x: f64| {
            // extend the configuration by x; pair weights live at their
            // lexicographic edge index and are refreshed on every push
            {
                let mut pts = self.pts.borrow_mut();
                let mut w = self.weights.borrow_mut();
                let kth = pts.len();
                for i in 0..kth {
                    w[edge_index(self.n, i, kth)] = self.mayer_weight((pts[i] - x).abs());
                }
                pts.push(x);
            }
            let value = if k + 1 == self.n {
                let w = self.weights.borrow();
                self.summer.borrow_mut().sum(&w)
            } else {
                self.level(k + 1)
            };
            self.pts.borrow_mut().pop();
            value
        };
        quad::integrate(&f, lo, hi, &breaks, &self.spec).value
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exact pinned estimator in one dimension, `n <= 4`.
fn mayer_exact_1d(
    p: &RadialPotential,
    beta: f64,
    bx: CubicBox,
    n: usize,
) -> Result<MayerEstimate, MayerError> {
    if bx.dimension != 1 || n > 4 {
        return Err(MayerError::ExactUnsupported { d: bx.dimension, n });
    }
    let range = interaction_range(p, beta, 1e-14);
    let offsets = kink_offsets(&p.breakpoints(), n - 1);
    let ctx = Exact1dCtx {
        p,
        beta,
        l: bx.side,
        n,
        range,
        offsets,
        spec: QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-13, tail_cut: None, panel_order: 8 },
        pts: RefCell::new(vec![bx.side / 2.0]),
        weights: RefCell::new(vec![0.0; n * (n - 1) / 2]),
        summer: RefCell::new(ClusterSummer::new(n).expect("n <= 5")),
    };
    let integral = ctx.level(1);
    Ok(MayerEstimate {
        n,
        value: integral / factorial(n),
        std_error: 0.0,
        samples: 0,
        method: MayerMethod::Exact1D,
        box_side: bx.side,
        boundary_flag: range / bx.side > 0.1,
    })
}

/// Stratified Monte Carlo estimator: the cube `box^{n-1}` is cut into
/// `m^D` congruent cells, every cell receives the same number of jittered
/// samples, and each sample has its own counter-derived generator so the
/// estimate is independent of sharding.
fn mayer_monte_carlo(
    p: &RadialPotential,
    beta: f64,
    bx: CubicBox,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<MayerEstimate, MayerError> {
    if samples == 0 {
        return Err(MayerError::ZeroSamples);
    }
    let d = bx.dimension as usize;
    let dims = (n - 1) * d;
    // cell grid: m^dims <= 4096 strata
    let m = (4096f64.powf(1.0 / dims as f64).floor() as usize).max(1);
    let cells = m.pow(dims as u32);
    let per_cell = samples.div_ceil(cells as u64).max(1);
    let total = per_cell * cells as u64;

    let range = interaction_range(p, beta, 1e-14);
    let center = vec![bx.side / 2.0; d];

    let cell_stats: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut summer = ClusterSummer::new(n).expect("n <= 5");
            let mut corner = vec![0usize; dims];
            let mut c = cell;
            for slot in corner.iter_mut() {
                *slot = c % m;
                c /= m;
            }
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let npairs = n * (n - 1) / 2;
            let mut weights = vec![0.0f64; npairs];
            let mut pts = vec![vec![0.0f64; d]; n];
            pts[0].copy_from_slice(&center);
            for j in 0..per_cell {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, cell as u64, j));
                for axis in 0..dims {
                    let u: f64 = rng.random_range(0.0..1.0);
                    let x = (corner[axis] as f64 + u) / m as f64 * bx.side;
                    pts[1 + axis / d][axis % d] = x;
                }
                for i in 0..n {
                    for jj in (i + 1)..n {
                        let r = crate::potential::distance(&pts[i], &pts[jj]);
                        weights[edge_index(n, i, jj)] = p
                            .evaluate(r)
                            .map(|v| v.scale(beta).mayer_f())
                            .unwrap_or(-1.0);
                    }
                }
                let w = summer.sum(&weights);
                sum += w;
                sumsq += w * w;
            }
            (sum, sumsq)
        })
        .collect();

    let scale = bx.volume().powi((n - 1) as i32) / factorial(n);
    let mean_total = pairwise_sum(&cell_stats.iter().map(|s| s.0).collect::<Vec<_>>())
        / total as f64;
    // stratified estimator: Var = (1/K^2) sum_c Var(mean_c), with
    // Var(mean_c) estimated by biased_var_c / (n_c - 1)
    let nc = per_cell as f64;
    let mut var_est = 0.0;
    for &(s, s2) in &cell_stats {
        let mean_c = s / nc;
        let biased_var = (s2 / nc - mean_c * mean_c).max(0.0);
        var_est += biased_var / (nc - 1.0).max(1.0);
    }
    let std_error = scale * (var_est / (cells * cells) as f64).sqrt();
    Ok(MayerEstimate {
        n,
        value: scale * mean_total,
        std_error,
        samples: total,
        method: MayerMethod::MonteCarlo,
        box_side: bx.side,
        boundary_flag: range / bx.side > 0.1,
    })
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ (a.wrapping_shl(27) ^ b).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The pinned Mayer coefficient estimator.
pub fn mayer_coefficient(
    p: &RadialPotential,
    beta: f64,
    bx: CubicBox,
    n: usize,
    method: MayerMethod,
    samples: u64,
    seed: u64,
) -> Result<MayerEstimate, MayerError> {
    assert!(beta > 0.0);
    if !(2..=5).contains(&n) {
        return Err(MayerError::OrderOutOfRange(n));
    }
    match method {
        MayerMethod::Exact1D => mayer_exact_1d(p, beta, bx, n),
        MayerMethod::MonteCarlo => mayer_monte_carlo(p, beta, bx, n, samples, seed),
    }
}

/// The infinite-volume Mayer coefficient of 1-D hard rods of length `a`:
/// `(-n a)^{n-1} / n!`, from inverting the rod equation of state
/// `activity = w e^{a w}` (`w` the reduced pressure). The series reversion
/// is re-derived in the test suite before these values are trusted.
pub fn tonks_oracle(a: f64, n: usize) -> f64 {
    assert!(a > 0.0 && n >= 1);
    (-(n as f64) * a).powi(n as i32 - 1) / factorial(n)
}

/// Root-test diagnostic `1 / max_n |C_n|^{1/n}`; a heuristic ceiling for
/// the rigorous bounds, never itself rigorous.
pub fn radius_lower_bound_empirical(estimates: &[MayerEstimate]) -> Result<f64, MayerError> {
    if estimates.len() < 3 {
        return Err(MayerError::NeedThreeOrders);
    }
    let mut best = 0.0f64;
    for e in estimates {
        if e.value != 0.0 {
            best = best.max(e.value.abs().powf(1.0 / e.n as f64));
        }
    }
    if best == 0.0 {
        return Err(MayerError::AllZero);
    }
    Ok(1.0 / best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    /// Formal power-series reversion of `lambda(w) = sum_m w^m a^{m-1}/(m-1)!`
    /// in exact rationals (a = 1): the independent derivation of the rod
    /// coefficients.
    fn revert_rod_series(orders: usize) -> Vec<Ratio<i64>> {
        let r = |n: i64, d: i64| Ratio::new(n, d);
        // lambda coefficients A_m for m = 1..=orders (a = 1)
        let mut fact = 1i64;
        let mut a_coeff = vec![r(0, 1); orders + 1];
        for m in 1..=orders {
            if m >= 2 {
                fact *= (m - 1) as i64;
            }
            a_coeff[m] = r(1, fact);
        }
        // w(lambda) = sum c_k lambda^k by matching coefficients
        let mut c = vec![r(0, 1); orders + 1];
        c[1] = r(1, 1) / a_coeff[1];
        for k in 2..=orders {
            // coefficient of lambda^k in sum_{m>=2} A_m w(lambda)^m
            let mut w_pow = vec![r(0, 1); orders + 1]; // w^1
            w_pow[..(orders + 1)].copy_from_slice(&c);
            let mut acc = r(0, 1);
            for m in 2..=k {
                // w_pow becomes w^m
                let mut next = vec![r(0, 1); orders + 1];
                for i in 1..=orders {
                    if w_pow[i] == r(0, 1) {
                        continue;
                    }
                    for j in 1..=(orders - i) {
                        next[i + j] += w_pow[i] * c[j];
                    }
                }
                w_pow = next;
                acc += a_coeff[m] * w_pow[k];
            }
            c[k] = -acc / a_coeff[1];
        }
        c
    }

    #[test]
    fn tonks_oracle_rederived_by_series_reversion() {
        let c = revert_rod_series(6);
        for n in 1..=6usize {
            let expect = tonks_oracle(1.0, n);
            let got = *c[n].numer() as f64 / *c[n].denom() as f64;
            assert!(
                (got - expect).abs() < 1e-12 * expect.abs().max(1.0),
                "n={n}: reversion {got}, formula {expect}"
            );
        }
        // frozen values
        assert_eq!(c[1], Ratio::new(1, 1));
        assert_eq!(c[2], Ratio::new(-1, 1));
        assert_eq!(c[3], Ratio::new(3, 2));
        assert_eq!(c[4], Ratio::new(-8, 3));
        assert_eq!(c[5], Ratio::new(625, 120));
    }

    #[test]
    fn hard_rod_c2_exact() {
        let p = RadialPotential::hard_core(1.0, 1);
        let est = mayer_coefficient(
            &p,
            1.0,
            CubicBox::new(1, 64.0),
            2,
            MayerMethod::Exact1D,
            0,
            0,
        )
        .unwrap();
        assert!((est.value - (-1.0)).abs() < 1e-10, "{}", est.value);
        assert_eq!(est.std_error, 0.0);
        assert!(!est.boundary_flag);
    }

    #[test]
    fn hard_rod_c3_exact() {
        let p = RadialPotential::hard_core(1.0, 1);
        let est = mayer_coefficient(
            &p,
            1.0,
            CubicBox::new(1, 32.0),
            3,
            MayerMethod::Exact1D,
            0,
            0,
        )
        .unwrap();
        assert!((est.value - 1.5).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn square_well_c2_closed_form() {
        // C_2 = (1/2) int (e^{-beta V} - 1) dx
        //     = (1/2)(-2a + (e^{beta w} - 1) 2 (R - a)) in d = 1
        let p = RadialPotential::square_well(1.0, 1.0, 2.0, 1);
        let beta = 0.7;
        let est = mayer_coefficient(
            &p,
            beta,
            CubicBox::new(1, 48.0),
            2,
            MayerMethod::Exact1D,
            0,
            0,
        )
        .unwrap();
        let exact = 0.5 * (-2.0 + (beta.exp() - 1.0) * 2.0);
        assert!((est.value - exact).abs() < 1e-10, "{} vs {exact}", est.value);
    }

    #[test]
    fn morse_c2_matches_radial_quadrature() {
        // at n=2 the pinned estimator is (1/2) int (e^{-beta V} - 1) dx
        let p = RadialPotential::morse(6.0, 1);
        let est = mayer_coefficient(
            &p,
            1.0,
            CubicBox::new(1, 40.0),
            2,
            MayerMethod::Exact1D,
            0,
            0,
        )
        .unwrap();
        let spec = QuadratureSpec::default();
        let integrand = |r: f64| p.evaluate(r).unwrap().scale(1.0).mayer_f();
        let direct = quad::integrate(&integrand, 0.0, 20.0, &p.breakpoints(), &spec).value;
        // d=1 surface factor is 2 (both half-lines)
        let exact = 0.5 * 2.0 * direct;
        assert!((est.value - exact).abs() < 1e-7 * exact.abs(), "{} vs {exact}", est.value);
    }

    #[test]
    fn exact_caps() {
        let p = RadialPotential::hard_core(1.0, 1);
        assert!(matches!(
            mayer_coefficient(&p, 1.0, CubicBox::new(1, 16.0), 5, MayerMethod::Exact1D, 0, 0),
            Err(MayerError::ExactUnsupported { .. })
        ));
        let p3 = RadialPotential::hard_core(1.0, 3);
        assert!(matches!(
            mayer_coefficient(&p3, 1.0, CubicBox::new(3, 16.0), 3, MayerMethod::Exact1D, 0, 0),
            Err(MayerError::ExactUnsupported { .. })
        ));
        assert!(matches!(
            mayer_coefficient(&p, 1.0, CubicBox::new(1, 16.0), 6, MayerMethod::MonteCarlo, 10, 0),
            Err(MayerError::OrderOutOfRange(6))
        ));
        assert!(matches!(
            mayer_coefficient(&p, 1.0, CubicBox::new(1, 16.0), 3, MayerMethod::MonteCarlo, 0, 0),
            Err(MayerError::ZeroSamples)
        ));
    }

    #[test]
    fn monte_carlo_brackets_exact_1d() {
        // 3-sigma bracket holds in >= 29 of 30 seeded runs
        let p = RadialPotential::hard_core(1.0, 1);
        let bx = CubicBox::new(1, 8.0);
        let exact = mayer_coefficient(&p, 1.0, bx, 3, MayerMethod::Exact1D, 0, 0)
            .unwrap()
            .value;
        let mut hits = 0;
        for seed in 0..30u64 {
            let est =
                mayer_coefficient(&p, 1.0, bx, 3, MayerMethod::MonteCarlo, 40_000, seed).unwrap();
            if (est.value - exact).abs() <= 3.0 * est.std_error {
                hits += 1;
            }
        }
        assert!(hits >= 29, "only {hits}/30 bracketed");
    }

    #[test]
    fn monte_carlo_is_shard_deterministic() {
        let p = RadialPotential::hard_core(1.0, 1);
        let bx = CubicBox::new(1, 8.0);
        let a = mayer_coefficient(&p, 1.0, bx, 3, MayerMethod::MonteCarlo, 20_000, 5).unwrap();
        let b = mayer_coefficient(&p, 1.0, bx, 3, MayerMethod::MonteCarlo, 20_000, 5).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn volume_sequence_approaches_oracle() {
        let p = RadialPotential::hard_core(1.0, 1);
        for n in 2..=4usize {
            let oracle = tonks_oracle(1.0, n);
            for side in [16.0, 32.0, 64.0] {
                let est =
                    mayer_coefficient(&p, 1.0, CubicBox::new(1, side), n, MayerMethod::Exact1D, 0, 0)
                        .unwrap();
                let rel = ((est.value - oracle) / oracle).abs();
                assert!(rel < 1e-4, "n={n}, L={side}: rel err {rel}");
            }
        }
    }

    #[test]
    fn boundary_flag_raised_for_small_boxes() {
        let p = RadialPotential::hard_core(1.0, 1);
        let est = mayer_coefficient(&p, 1.0, CubicBox::new(1, 6.0), 2, MayerMethod::Exact1D, 0, 0)
            .unwrap();
        assert!(est.boundary_flag);
    }

    #[test]
    fn radius_diagnostic() {
        let ests: Vec<MayerEstimate> = (2..=5)
            .map(|n| MayerEstimate {
                n,
                value: tonks_oracle(1.0, n),
                std_error: 0.0,
                samples: 0,
                method: MayerMethod::Exact1D,
                box_side: 64.0,
                boundary_flag: false,
            })
            .collect();
        let r = radius_lower_bound_empirical(&ests).unwrap();
        let expect = 1.0
            / [2usize, 3, 4, 5]
                .iter()
                .map(|&n| tonks_oracle(1.0, n).abs().powf(1.0 / n as f64))
                .fold(0.0f64, f64::max);
        assert!((r - expect).abs() < 1e-14);
        // and the error paths
        assert!(matches!(
            radius_lower_bound_empirical(&ests[..2]),
            Err(MayerError::NeedThreeOrders)
        ));
        let zeros: Vec<MayerEstimate> = ests
            .iter()
            .map(|e| MayerEstimate { value: 0.0, ..e.clone() })
            .collect();
        assert!(matches!(radius_lower_bound_empirical(&zeros), Err(MayerError::AllZero)));
    }
}
