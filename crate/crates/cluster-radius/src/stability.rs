//! Stability constants: exact finite-n algebraic values, configuration-search
//! lower bounds, and the positive-definite upper bound `Phi2(0)/2`.

use crate::decompose::{self, DecomposeError, RadialGridFunction};
use crate::potential::{ExtendedReal, InteractionMatrix, RadialPotential};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subset scans walk all `2^n` subsets; this keeps a single call under a
/// second.
pub const MAX_SUBSET_SCAN_N: usize = 20;

#[derive(Error, Debug)]
pub enum StabilityError {
    #[error("subset scan supports n <= {MAX_SUBSET_SCAN_N}, got {0}")]
    TooManyVertices(usize),
    #[error("potential must be finite at 0 for the positive-definite criterion")]
    InfiniteAtOrigin,
    #[error(transparent)]
    Transform(#[from] DecomposeError),
}

/// Result of a configuration search: a certified-by-witness lower bound on
/// the stability constant, an optional upper bound, and the witness itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub lower_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    pub witness: Vec<Vec<f64>>,
    pub witness_energy: f64,
    pub n_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub notes: String,
}

// ---------------------------------------------------------------------------
// Exact finite-n algebraic constant
// ---------------------------------------------------------------------------

/// The exact algebraic stability constant of a finite interaction matrix:
/// `max(0, max over compatible X with |X| >= 2 of -E(X)/|X|)`. Subsets with
/// an incompatible pair are skipped (their energy is `+inf`).
///
/// Gray-code subset walk: each step flips one vertex and updates the subset
/// energy through per-vertex partial sums, so the scan is `O(2^n * n)`
/// overall instead of `O(2^n * n^2)`.
pub fn finite_algebraic_b(v: &InteractionMatrix) -> Result<f64, StabilityError> {
    let n = v.n();
    if n > MAX_SUBSET_SCAN_N {
        return Err(StabilityError::TooManyVertices(n));
    }
    // split entries into finite values and an incompatibility flag
    let mut val = vec![0.0f64; n * n];
    let mut inf = vec![false; n * n];
    for (i, j, e) in v.pairs() {
        match e {
            ExtendedReal::Finite(x) => {
                val[i * n + j] = x;
                val[j * n + i] = x;
            }
            ExtendedReal::PositiveInfinity => {
                inf[i * n + j] = true;
                inf[j * n + i] = true;
            }
        }
    }

    let mut in_set = vec![false; n];
    let mut sum_to = vec![0.0f64; n]; // sum of finite couplings into the set
    let mut inf_to = vec![0u32; n]; // incompatible couplings into the set
    let mut energy = 0.0f64;
    let mut bad_pairs = 0u32;
    let mut size = 0usize;

    let mut best = 0.0f64;
    let mut best_mask = 0usize;
    let mut mask = 0usize;
    for k in 1usize..(1 << n) {
        let flip = k.trailing_zeros() as usize;
        mask ^= 1 << flip;
        if in_set[flip] {
            in_set[flip] = false;
            size -= 1;
            energy -= sum_to[flip];
            bad_pairs -= inf_to[flip];
            for u in 0..n {
                if u != flip {
                    sum_to[u] -= val[u * n + flip];
                    inf_to[u] -= inf[u * n + flip] as u32;
                }
            }
        } else {
            in_set[flip] = true;
            size += 1;
            energy += sum_to[flip];
            bad_pairs += inf_to[flip];
            for u in 0..n {
                if u != flip {
                    sum_to[u] += val[u * n + flip];
                    inf_to[u] += inf[u * n + flip] as u32;
                }
            }
        }
        if size >= 2 && bad_pairs == 0 {
            let cand = -energy / size as f64;
            if cand > best {
                best = cand;
                best_mask = mask;
            }
        }
    }

    if best == 0.0 {
        return Ok(0.0);
    }
    // recompute the winning subset from scratch: no incremental drift
    let members: Vec<usize> = (0..n).filter(|&u| best_mask >> u & 1 == 1).collect();
    let mut exact = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            exact += val[i * n + j];
        }
    }
    Ok((-exact / members.len() as f64).max(0.0))
}

// ---------------------------------------------------------------------------
// Configuration-search lower bound
// ---------------------------------------------------------------------------

fn pair_energy(p: &RadialPotential, pts: &[Vec<f64>], i: usize) -> ExtendedReal {
    let mut e = ExtendedReal::Finite(0.0);
    for (j, q) in pts.iter().enumerate() {
        if j != i {
            let r = crate::potential::distance(&pts[i], q);
            e = e + p.evaluate(r).unwrap_or(ExtendedReal::PositiveInfinity);
        }
    }
    e
}

fn total_energy(p: &RadialPotential, pts: &[Vec<f64>]) -> ExtendedReal {
    let mut e = ExtendedReal::Finite(0.0);
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let r = crate::potential::distance(&pts[i], &pts[j]);
            e = e + p.evaluate(r).unwrap_or(ExtendedReal::PositiveInfinity);
        }
    }
    e
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ (a << 32 | b).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One multi-start descent cell: (N, restart) with a counter-based stream,
/// so enlarging `n_max` or `restarts` only *adds* cells and the estimate is
/// monotone in both.
fn descend_one(p: &RadialPotential, n: usize, restart: u64, seed: u64) -> (f64, Vec<Vec<f64>>) {
    let d = p.dimension as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, n as u64, restart));
    let core = p.core_radius().unwrap_or(0.0);
    let scale = (2.0 * core).max(1.0);
    let side = scale * (n as f64).powf(1.0 / d as f64) * 1.3;

    // initial placement on a jittered grid: finite energy even with a core
    let cells = (n as f64).powf(1.0 / d as f64).ceil() as usize;
    let spacing = (side / cells as f64).max(core * 1.05 + 1e-9);
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
    'fill: for idx in 0..cells.pow(d as u32) {
        let mut c = idx;
        let mut x = vec![0.0; d];
        for slot in x.iter_mut() {
            *slot = (c % cells) as f64 * spacing;
            c /= cells;
        }
        for slot in x.iter_mut() {
            *slot += rng.random_range(0.0..0.05 * spacing);
        }
        pts.push(x);
        if pts.len() == n {
            break 'fill;
        }
    }
    while pts.len() < n {
        let extra = pts.len() as f64;
        pts.push(vec![extra * spacing; d]);
    }

    let mut step = 0.35 * scale;
    let mut sweeps = 0;
    while step > 1e-7 * scale && sweeps < 400 {
        let mut improved = false;
        for i in 0..n {
            for k in 0..d {
                let here = pair_energy(p, &pts, i);
                let mut best_delta = 0.0;
                let mut best_val = here;
                for sgn in [-1.0, 1.0] {
                    pts[i][k] += sgn * step;
                    let cand = pair_energy(p, &pts, i);
                    pts[i][k] -= sgn * step;
                    if cand < best_val {
                        best_val = cand;
                        best_delta = sgn * step;
                    }
                }
                if best_delta != 0.0 {
                    pts[i][k] += best_delta;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.6;
        }
        sweeps += 1;
    }
    let u = total_energy(p, &pts).as_finite().unwrap_or(f64::INFINITY);
    ((-u / n as f64).max(0.0), pts)
}

/// Multi-start coordinate-descent search for configurations of low energy:
/// returns `max_N max(0, -U_min/N)` over `N <= n_max` with the witness that
/// achieves it. A credible lower bound on the stability constant, never a
/// certificate.
pub fn configuration_lower_bound(
    p: &RadialPotential,
    n_max: usize,
    restarts: usize,
    seed: u64,
) -> StabilityEstimate {
    assert!(n_max >= 2 && restarts >= 1);
    let cells: Vec<(usize, u64)> = (2..=n_max)
        .flat_map(|n| (0..restarts as u64).map(move |r| (n, r)))
        .collect();
    let results: Vec<(f64, Vec<Vec<f64>>)> = cells
        .par_iter()
        .map(|&(n, r)| descend_one(p, n, r, seed))
        .collect();
    // deterministic winner: best value, ties to the earliest (N, restart)
    // cell; a zero bound still reports its (zero-energy) witness
    let mut best = 0.0;
    let mut witness: Vec<Vec<f64>> = results.first().map(|r| r.1.clone()).unwrap_or_default();
    for (value, pts) in &results {
        if *value > best {
            best = *value;
            witness = pts.clone();
        }
    }
    let witness_energy = if witness.is_empty() {
        0.0
    } else {
        total_energy(p, &witness).as_finite().unwrap_or(0.0)
    };
    StabilityEstimate {
        lower_bound: best,
        upper_bound: None,
        witness,
        witness_energy,
        n_max,
        restarts,
        seed,
        notes: "multi-start coordinate descent with annealed steps; lower bound only".into(),
    }
}

// ---------------------------------------------------------------------------
// Positive-definite upper bound
// ---------------------------------------------------------------------------

/// Outcome of the positive-definite criterion check.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RuelleCriterion {
    /// The sampled transform is nonnegative: `Phi2(0)/2` bounds the
    /// stability constant from above.
    Applicable { bound: f64, min_transform: f64 },
    /// The sampled transform changes sign; the criterion says nothing.
    Refused { min_transform: f64, at_p: f64 },
}

/// Checks positive-definiteness of `phi2` on a sampled momentum grid and, if
/// it holds, returns the upper bound `phi2(0)/2` on its stability constant.
///
/// The transform is sampled, so `Applicable` is evidence, not proof; the
/// tolerance is relative to the largest transform magnitude.
pub fn ruelle_criterion_upper_bound(
    phi2: &RadialPotential,
    p_max: f64,
    p_samples: usize,
    rel_tol: f64,
) -> Result<RuelleCriterion, StabilityError> {
    let at_zero = phi2
        .evaluate(0.0)
        .map_err(|_| StabilityError::InfiniteAtOrigin)?
        .as_finite()
        .ok_or(StabilityError::InfiniteAtOrigin)?;
    let grid = RadialGridFunction::from_potential(phi2, 1e-4, 80.0, 2048)?;
    let p_grid: Vec<f64> = (0..p_samples)
        .map(|i| p_max * i as f64 / (p_samples - 1) as f64)
        .collect();
    let transform = decompose::radial_fourier(&grid, &p_grid)?;
    let scale = transform
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut min_v, mut min_p) = (f64::INFINITY, 0.0);
    for (p, v) in p_grid.iter().zip(&transform.values) {
        if *v < min_v {
            min_v = *v;
            min_p = *p;
        }
    }
    if min_v >= -rel_tol * scale {
        Ok(RuelleCriterion::Applicable { bound: (at_zero / 2.0).max(0.0), min_transform: min_v })
    } else {
        Ok(RuelleCriterion::Refused { min_transform: min_v, at_p: min_p })
    }
}
