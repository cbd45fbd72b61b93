//! Numerical evaluation of both sides of the tree-graph identity and the
//! tree-graph inequalities.
//!
//! The identity rewrites the connected-graph sum
//! `sum_{g in G_n} prod_{{i,j} in E_g} (e^{-V_ij} - 1)` as a sum over trees:
//! each tree `tau` carries the edge product `prod (-V_ij)` and an integral
//! over interpolation parameters `t in [0,1]^{n-1}` against the probability
//! measure built from the tree-compatible vertex sequences and their
//! crossing counts. The left side is exact enumeration (it is the oracle);
//! the right side is tensor Gauss-Legendre quadrature, deterministic so the
//! comparison is a hard pass/fail.
//!
//! Two exponent conventions coexist and are never shared: the identity
//! integrates `t_n({i,j}) V_ij` summed over all pairs, while the per-tree
//! product lemma sums over tree edges only.

use crate::combinat::{
    self, ClusterSummer, CombinatError, CompatibleSequence, LabeledTree, pairwise_sum,
};
use crate::potential::{ExtendedReal, InteractionMatrix};
use crate::quad::gauss_legendre;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum TgiError {
    #[error(transparent)]
    Combinat(#[from] CombinatError),
    #[error("tree-sum evaluation supports 2 <= n <= {max}, got {n}")]
    OrderOutOfRange { n: usize, max: usize },
    #[error("tree sum requires a bounded matrix; use the regularized form for +inf entries")]
    UnboundedMatrix,
    #[error("phi1 must be nonnegative, found a negative entry at ({0}, {1})")]
    NegativePhi1Entry(usize, usize),
    #[error("phi2 must be bounded, found +inf at ({0}, {1})")]
    InfinitePhi2Entry(usize, usize),
}

/// Largest `n` for the quadrature side: the integral dimension is `n - 1`.
pub const MAX_TREE_SUM_N: usize = 5;

/// H-regularization schedule for matrices with `+inf` entries.
#[derive(Clone, Debug)]
pub struct Regularization {
    pub schedule: Vec<f64>,
}

impl Default for Regularization {
    fn default() -> Self {
        Regularization { schedule: (3..=10).map(|k| 2f64.powi(k)).collect() }
    }
}

impl Regularization {
    pub fn new(schedule: Vec<f64>) -> Self {
        assert!(
            schedule.windows(2).all(|w| w[0] < w[1]),
            "H schedule must be strictly increasing"
        );
        assert!(schedule.iter().all(|h| h.is_finite()));
        Regularization { schedule }
    }
}

/// Tree-sum value with the internal refinement-difference error estimate
/// (the same sum re-evaluated at a lower tensor order).
#[derive(Clone, Copy, Debug)]
pub struct TreeSum {
    pub value: f64,
    pub refinement_error: f64,
}

// ---------------------------------------------------------------------------
// Left side: connected-graph enumeration
// ---------------------------------------------------------------------------

/// `sum_{g in G_n} prod_{{i,j} in E_g} (e^{-V_ij} - 1)`, exactly; the factor
/// for an incompatible pair is exactly -1.
pub fn lhs_connected_graph_sum(v: &InteractionMatrix) -> Result<f64, TgiError> {
    let n = v.n();
    let mut summer = ClusterSummer::new(n)?;
    let weights: Vec<f64> = v.pairs().map(|(_, _, e)| e.mayer_f()).collect();
    Ok(summer.sum(&weights))
}

// ---------------------------------------------------------------------------
// Right side: tree sum against the interpolation measure
// ---------------------------------------------------------------------------

/// Which pairs feed the exponent `sum t_n({i,j}) V_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentPairs {
    /// The identity convention: every pair `1 <= i < j <= n`.
    AllPairs,
    /// The per-tree lemma convention: tree edges only.
    TreeEdgesOnly,
}

/// One summand of the measure: a tree together with one compatible
/// sequence. The integrand weight `prod_s t_s^{b_s - 1}` is bounded on the
/// cube since every `b_s >= 1`.
#[derive(Clone, Debug)]
pub struct TgiMeasureTerm {
    pub tree_edges: Vec<(usize, usize)>,
    pub seq: CompatibleSequence,
}

struct CompiledTerm {
    /// `(stage_lo, stage_hi, V_ij)` per pair with nonzero coupling,
    /// 1-based inclusive stage ranges.
    exponent: Vec<(usize, usize, f64)>,
    /// per-stage exponents `b_s - 1`
    pow: Vec<i32>,
    /// product of `-V_ij` over tree edges
    prefactor: f64,
}

fn compile_term(term: &TgiMeasureTerm, v: &[f64], n: usize, mode: ExponentPairs) -> CompiledTerm {
    let idx = |i: usize, j: usize| combinat::edge_index(n, i, j);
    let prefactor = term.tree_edges.iter().map(|&(i, j)| -v[idx(i, j)]).product();
    let mut exponent = Vec::new();
    let mut push = |i: usize, j: usize| {
        let vij = v[idx(i, j)];
        if vij != 0.0 {
            let (lo, hi) = term.seq.stage_interval(i, j);
            exponent.push((lo, hi, vij));
        }
    };
    match mode {
        ExponentPairs::AllPairs => {
            for i in 0..n {
                for j in (i + 1)..n {
                    push(i, j);
                }
            }
        }
        ExponentPairs::TreeEdgesOnly => {
            for &(i, j) in &term.tree_edges {
                push(i, j);
            }
        }
    }
    let pow = term.seq.cross_counts.iter().map(|&b| b as i32 - 1).collect();
    CompiledTerm { exponent, pow, prefactor }
}

/// `int_{[0,1]^{n-1}} prod_s t_s^{b_s-1} exp(-sum t_n({i,j}) V_ij) dt` by
/// tensor Gauss-Legendre at `order` nodes per axis.
fn term_integral(ct: &CompiledTerm, dims: usize, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let t01: Vec<f64> = rule.0.iter().map(|x| 0.5 * (x + 1.0)).collect();
    // per-axis weights absorb the measure factor t^{b-1}
    let axis_w: Vec<Vec<f64>> = (0..dims)
        .map(|s| {
            rule.1
                .iter()
                .zip(&t01)
                .map(|(w, t)| 0.5 * w * t.powi(ct.pow[s]))
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; dims];
    let mut total = 0.0;
    'outer: loop {
        let mut weight = 1.0;
        for s in 0..dims {
            weight *= axis_w[s][idx[s]];
        }
        let mut expo = 0.0;
        for &(lo, hi, vij) in &ct.exponent {
            let mut tfac = 1.0;
            for s in lo..=hi {
                tfac *= t01[idx[s - 1]];
            }
            expo += tfac * vij;
        }
        total += weight * (-expo).exp();
        for s in 0..dims {
            idx[s] += 1;
            if idx[s] < order {
                continue 'outer;
            }
            idx[s] = 0;
        }
        break;
    }
    total
}

/// All `(tau, X)` measure terms of order `n`, in deterministic tree-major
/// order.
pub fn measure_terms(n: usize) -> Result<Vec<TgiMeasureTerm>, TgiError> {
    let mut terms = Vec::new();
    for tree in combinat::trees(n)? {
        for seq in combinat::compatible_sequences(&tree) {
            terms.push(TgiMeasureTerm { tree_edges: tree.edges.clone(), seq });
        }
    }
    Ok(terms)
}

fn finite_entries(v: &InteractionMatrix) -> Result<Vec<f64>, TgiError> {
    v.pairs()
        .map(|(_, _, e)| e.as_finite().ok_or(TgiError::UnboundedMatrix))
        .collect()
}

fn tree_sum_at_order(
    terms: &[TgiMeasureTerm],
    entries: &[f64],
    n: usize,
    order: usize,
    mode: ExponentPairs,
) -> f64 {
    let values: Vec<f64> = terms
        .par_iter()
        .map(|term| {
            let ct = compile_term(term, entries, n, mode);
            if ct.prefactor == 0.0 {
                return 0.0;
            }
            ct.prefactor * term_integral(&ct, n - 1, order)
        })
        .collect();
    // fixed tree-major order, pairwise reduction: bit-stable across workers
    pairwise_sum(&values)
}

/// The tree side of the identity for a bounded matrix:
/// `sum_tau prod_{E_tau} (-V_ij) int dmu_tau e^{-sum_{i<j} t_n({i,j}) V_ij}`.
pub fn rhs_tree_sum(v: &InteractionMatrix, order: usize) -> Result<TreeSum, TgiError> {
    let n = v.n();
    if !(2..=MAX_TREE_SUM_N).contains(&n) {
        return Err(TgiError::OrderOutOfRange { n, max: MAX_TREE_SUM_N });
    }
    let entries = finite_entries(v)?;
    let terms = measure_terms(n)?;
    let order = order.max(4);
    let value = tree_sum_at_order(&terms, &entries, n, order, ExponentPairs::AllPairs);
    let coarse =
        tree_sum_at_order(&terms, &entries, n, (order - 2).max(4), ExponentPairs::AllPairs);
    Ok(TreeSum { value, refinement_error: (value - coarse).abs() })
}

/// The regularized tree sum: `V^H` for each `H` in the schedule. The caller
/// observes convergence toward [`lhs_connected_graph_sum`] as `H` grows.
pub fn rhs_tree_sum_regularized(
    v: &InteractionMatrix,
    reg: &Regularization,
    order: usize,
) -> Result<Vec<f64>, TgiError> {
    reg.schedule
        .iter()
        .map(|&h| Ok(rhs_tree_sum(&v.capped(h), order)?.value))
        .collect()
}

/// Monte Carlo fallback for the tree sum at `n = 6`, where the tensor grid
/// is out of reach. Each `(tau, X)` term draws `samples_per_term`
/// importance-sampled points: `t_s = U^{1/b_s}` realizes the measure factor
/// `t^{b_s-1}` exactly, so the term reduces to `prod(-V) prod(1/b_s)` times
/// the sample mean of `e^{-sum t_n({i,j}) V_ij}`. Returns the estimate with
/// its standard error; streams are counter-derived per term.
pub fn rhs_tree_sum_monte_carlo(
    v: &InteractionMatrix,
    samples_per_term: usize,
    seed: u64,
) -> Result<TreeSum, TgiError> {
    let n = v.n();
    if !(2..=combinat::MAX_GRAPH_N).contains(&n) {
        return Err(TgiError::OrderOutOfRange { n, max: combinat::MAX_GRAPH_N });
    }
    assert!(samples_per_term >= 2);
    let entries = finite_entries(v)?;
    let terms = measure_terms(n)?;
    let stats: Vec<(f64, f64)> = terms
        .par_iter()
        .enumerate()
        .map(|(idx, term)| {
            let ct = compile_term(term, &entries, n, ExponentPairs::AllPairs);
            let weight: f64 = ct.prefactor
                * term
                    .seq
                    .cross_counts
                    .iter()
                    .map(|&b| 1.0 / b as f64)
                    .product::<f64>();
            if weight == 0.0 {
                return (0.0, 0.0);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, idx as u64));
            let dims = n - 1;
            let mut t = vec![0.0f64; dims];
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..samples_per_term {
                for (s, slot) in t.iter_mut().enumerate() {
                    let u: f64 = rng.random_range(0.0..1.0f64);
                    *slot = u.powf(1.0 / (ct.pow[s] + 1) as f64);
                }
                let mut expo = 0.0;
                for &(lo, hi, vij) in &ct.exponent {
                    let tfac: f64 = t[lo - 1..hi].iter().product();
                    expo += tfac * vij;
                }
                let x = (-expo).exp();
                sum += x;
                sumsq += x * x;
            }
            let m = samples_per_term as f64;
            let mean = sum / m;
            let var_mean = ((sumsq / m - mean * mean).max(0.0)) / (m - 1.0);
            (weight * mean, weight * weight * var_mean)
        })
        .collect();
    let value = pairwise_sum(&stats.iter().map(|s| s.0).collect::<Vec<_>>());
    let variance = pairwise_sum(&stats.iter().map(|s| s.1).collect::<Vec<_>>());
    Ok(TreeSum { value, refinement_error: variance.sqrt() })
}

// ---------------------------------------------------------------------------
// Lemmas
// ---------------------------------------------------------------------------

/// Both sides of the per-tree product identity:
/// `prod_{E_tau} |e^{-V_ij} - 1|` versus
/// `prod |V_ij| int dmu_tau e^{-sum_{E_tau} t_n({i,j}) V_ij}` (tree edges
/// only in the exponent).
pub fn lemma_posit_check(
    tree: &LabeledTree,
    v: &InteractionMatrix,
    order: usize,
) -> Result<(f64, f64), TgiError> {
    let n = v.n();
    assert_eq!(tree.n, n);
    if !(2..=MAX_TREE_SUM_N).contains(&n) {
        return Err(TgiError::OrderOutOfRange { n, max: MAX_TREE_SUM_N });
    }
    let entries = finite_entries(v)?;
    let idx = |i: usize, j: usize| combinat::edge_index(n, i, j);
    let lhs: f64 = tree
        .edges
        .iter()
        .map(|&(i, j)| (-entries[idx(i, j)]).exp_m1().abs())
        .product();
    let abs_prefactor: f64 =
        tree.edges.iter().map(|&(i, j)| entries[idx(i, j)].abs()).product();
    let mut rhs = 0.0;
    for seq in combinat::compatible_sequences(tree) {
        let term = TgiMeasureTerm { tree_edges: tree.edges.clone(), seq };
        let ct = compile_term(&term, &entries, n, ExponentPairs::TreeEdgesOnly);
        rhs += term_integral(&ct, n - 1, order.max(4));
    }
    Ok((lhs, abs_prefactor * rhs))
}

/// Samples the convexity bound `sum_{i<j} t_n({i,j}) V_ij >= -nB`: draws
/// random nested sequences and interpolation parameters and returns the
/// worst observed margin `sum + nB` (nonnegative whenever `B` really is a
/// stability constant for `V`).
pub fn lemma_convex_check(v: &InteractionMatrix, b: f64, samples: usize, seed: u64) -> f64 {
    assert!(b >= 0.0);
    let n = v.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        // random nested X: a uniform permutation of 1..n after the pinned 0
        let mut order: Vec<usize> = (1..n).collect();
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut full = vec![0usize];
        full.extend(order);
        let t: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..1.0)).collect();
        let pos = |want: usize| full.iter().position(|&u| u == want).unwrap() + 1;
        let mut sum = 0.0;
        for (i, j, e) in v.pairs() {
            let (a, bb) = (pos(i), pos(j));
            let (lo, hi) = if a < bb { (a, bb) } else { (bb, a) };
            let tfac: f64 = (lo..hi).map(|s| t[s - 1]).product();
            match e {
                ExtendedReal::Finite(val) => sum += tfac * val,
                ExtendedReal::PositiveInfinity => {
                    sum = f64::INFINITY;
                    break;
                }
            }
        }
        worst = worst.min(sum + n as f64 * b);
    }
    worst
}

// ---------------------------------------------------------------------------
// Tree-graph inequalities
// ---------------------------------------------------------------------------

/// The hard-core inequality `|graph sum| <= e^{nB} sum_tau prod F_ij` with
/// `F_ij = 1` on incompatible pairs and `|V_ij|` otherwise. Returns
/// `(lhs_abs, rhs_bound)`.
pub fn tree_inequality_penrose(v: &InteractionMatrix, b: f64) -> Result<(f64, f64), TgiError> {
    assert!(b >= 0.0, "stability constant must be nonnegative");
    let n = v.n();
    let lhs_abs = lhs_connected_graph_sum(v)?.abs();
    let idx = |i: usize, j: usize| combinat::edge_index(n, i, j);
    let f: Vec<f64> = v
        .pairs()
        .map(|(_, _, e)| match e {
            ExtendedReal::Finite(val) => val.abs(),
            ExtendedReal::PositiveInfinity => 1.0,
        })
        .collect();
    let mut rhs = 0.0;
    for tree in combinat::trees(n)? {
        rhs += tree.edges.iter().map(|&(i, j)| f[idx(i, j)]).product::<f64>();
    }
    Ok((lhs_abs, (n as f64 * b).exp() * rhs))
}

/// The split inequality for `V = phi1 + phi2` with `phi1 >= 0` (possibly
/// `+inf`) and `phi2` bounded and stable with constant `b0`:
/// `|graph sum of V| <= e^{n B0} sum_tau prod [ |e^{-phi1_ij} - 1| + |phi2_ij| ]`.
pub fn tree_inequality_ruelle(
    phi1: &InteractionMatrix,
    phi2: &InteractionMatrix,
    b0: f64,
) -> Result<(f64, f64), TgiError> {
    assert!(b0 >= 0.0);
    assert_eq!(phi1.n(), phi2.n());
    let n = phi1.n();
    for (i, j, e) in phi1.pairs() {
        if let Some(val) = e.as_finite() {
            if val < 0.0 {
                return Err(TgiError::NegativePhi1Entry(i, j));
            }
        }
    }
    for (i, j, e) in phi2.pairs() {
        if e.is_infinite() {
            return Err(TgiError::InfinitePhi2Entry(i, j));
        }
    }
    let v = phi1.add(phi2);
    let lhs_abs = lhs_connected_graph_sum(&v)?.abs();
    let idx = |i: usize, j: usize| combinat::edge_index(n, i, j);
    let f: Vec<f64> = phi1
        .pairs()
        .zip(phi2.pairs())
        .map(|((_, _, e1), (_, _, e2))| e1.mayer_f().abs() + e2.as_finite().unwrap().abs())
        .collect();
    let mut rhs = 0.0;
    for tree in combinat::trees(n)? {
        rhs += tree.edges.iter().map(|&(i, j)| f[idx(i, j)]).product::<f64>();
    }
    Ok((lhs_abs, (n as f64 * b0).exp() * rhs))
}

// ---------------------------------------------------------------------------
// Seeded random matrices (shared by the verification CLI and the test suite)
// ---------------------------------------------------------------------------

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 step over seed xor golden-ratio-scrambled salt
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random bounded matrix with entries uniform in `[lo, hi)`.
pub fn random_bounded_matrix(
    n: usize,
    lo: f64,
    hi: f64,
    seed: u64,
    trial: u64,
) -> InteractionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, ((n as u64) << 32) | trial));
    InteractionMatrix::from_fn(n, |_, _| ExtendedReal::finite(rng.random_range(lo..hi)))
}

/// As [`random_bounded_matrix`], with each entry independently `+inf` with
/// probability `p_inf`.
pub fn random_matrix_with_cores(
    n: usize,
    lo: f64,
    hi: f64,
    p_inf: f64,
    seed: u64,
    trial: u64,
) -> InteractionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, ((n as u64) << 40) | trial));
    InteractionMatrix::from_fn(n, |_, _| {
        if rng.random_range(0.0..1.0) < p_inf {
            ExtendedReal::PositiveInfinity
        } else {
            ExtendedReal::finite(rng.random_range(lo..hi))
        }
    })
}
